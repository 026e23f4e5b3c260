#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "skate/arcfit.hpp"

using namespace skate;

namespace {

constexpr double kPiD = std::numbers::pi;

std::vector<Point> circle_points(Point c, double r, double from, double to, std::size_t n) {
    std::vector<Point> pts;
    for (std::size_t i = 0; i <= n; ++i) {
        const double phi = from + (to - from) * static_cast<double>(i) / static_cast<double>(n);
        pts.push_back({c.x + r * std::cos(phi), c.y + r * std::sin(phi)});
    }
    return pts;
}

/// Logarithmic spiral rho = exp(k phi), curvature positive and varying.
std::vector<Point> spiral_points(double k, double sweep, std::size_t n) {
    std::vector<Point> pts;
    for (std::size_t i = 0; i <= n; ++i) {
        const double phi = sweep * static_cast<double>(i) / static_cast<double>(n);
        const double rho = std::exp(k * phi);
        pts.push_back({rho * std::cos(phi), rho * std::sin(phi)});
    }
    return pts;
}

double heading(Vec2 t) { return std::atan2(t.y, t.x); }

double turn(Vec2 a, Vec2 b) { return std::abs(std::remainder(heading(b) - heading(a), 2 * kPiD)); }

/// Independent distance: dense sampling of every arc.
double brute_error(const std::vector<CircularArcSpec>& arcs, const std::vector<Point>& samples) {
    std::vector<Point> dense;
    for (const auto& a : arcs)
        for (int i = 0; i <= 4000; ++i) dense.push_back(a.at(i / 4000.0));
    double worst = 0;
    for (const auto& q : samples) {
        double best = 1e300;
        for (const auto& p : dense) best = std::min(best, distance(p, q));
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace

TEST(ArclengthParametrize, Examples) {
    const std::vector<Point> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    EXPECT_DOUBLE_EQ(arclength_parametrize(square).length(), 3.0);
    EXPECT_DOUBLE_EQ(arclength_parametrize(square, {}, true).length(), 4.0);
    const std::vector<Point> two{{0, 0}, {3, 4}};
    EXPECT_DOUBLE_EQ(arclength_parametrize(two).length(), 5.0);
    const auto circle = arclength_parametrize(circle_points({0, 0}, 2.0, 0, 2 * kPiD, 2000));
    EXPECT_NEAR(circle.length(), 4 * kPiD, 1e-3 * 4 * kPiD);
    EXPECT_LE(circle.length(), 4 * kPiD);
}

TEST(ArclengthParametrize, DuplicatesDroppedAndCuspsRemapped) {
    const std::vector<Point> pts{{0, 0}, {0, 0}, {1, 0}, {1, 0}, {1, 1}};
    const auto c = arclength_parametrize(pts, {3});
    EXPECT_EQ(c.size(), 3u);
    EXPECT_EQ(c.cusp_indices, (std::vector<std::size_t>{1}));
    EXPECT_THROW(arclength_parametrize(std::vector<Point>{{1, 1}}), DuplicatePoints);
    EXPECT_THROW(arclength_parametrize(std::vector<Point>{{1, 1}, {1, 1}}), DuplicatePoints);
    EXPECT_THROW(arclength_parametrize(pts, {7}), OutOfRange);
}

TEST(SplitAtCusps, Examples) {
    const auto pts = circle_points({0, 0}, 1, 0, kPiD, 100);
    const auto whole = split_at_cusps(arclength_parametrize(pts));
    ASSERT_EQ(whole.size(), 1u);
    EXPECT_EQ(whole[0].size(), 101u);

    const auto two = split_at_cusps(arclength_parametrize(pts, {40}));
    ASSERT_EQ(two.size(), 2u);
    EXPECT_EQ(two[0].points.back(), two[1].points.front());
    EXPECT_EQ(two[1].s.front(), 0.0);
    EXPECT_NEAR(two[0].length() + two[1].length(), arclength_parametrize(pts).length(), 1e-12);
}

TEST(SplitAtCusps, AdjacentCuspsLeaveEmptySegment) {
    const auto pts = circle_points({0, 0}, 1, 0, kPiD, 100);
    EXPECT_THROW(split_at_cusps(arclength_parametrize(pts, {40, 41})), EmptySegment);
}

TEST(DetectCusps, FindsSharpTurnOnly) {
    std::vector<Point> pts = circle_points({0, 0}, 1, 0, kPiD / 2, 50);
    for (int i = 1; i <= 50; ++i) pts.push_back({0.02 * i, 1.0});  // doubles back
    const auto c = arclength_parametrize(pts);
    const auto cusps = detect_cusps(c);
    ASSERT_EQ(cusps.size(), 1u);
    EXPECT_EQ(cusps[0], 50u);
    EXPECT_TRUE(detect_cusps(arclength_parametrize(circle_points({0, 0}, 1, 0, kPiD, 200))).empty());
}

TEST(BiarcFit, CircularArcIsOneArc) {
    const auto seg = arclength_parametrize(circle_points({0.3, -0.2}, 1.7, 0.1, 2.3, 500));
    const auto arcs = biarc_fit(seg, 1e-9);
    ASSERT_EQ(arcs.size(), 1u);
    EXPECT_LE(fit_error(arcs, seg), 1e-12);
    EXPECT_NEAR(arcs[0].r, 1.7, 1e-12);
    EXPECT_EQ(arcs[0].orientation, 1);
}

TEST(BiarcFit, StraightSegmentUsesSentinelRadius) {
    std::vector<Point> pts;
    for (int i = 0; i <= 100; ++i) pts.push_back({0.5 + 0.03 * i, -1.0 + 0.04 * i});
    const auto arcs = biarc_fit(arclength_parametrize(pts), 1e-9);
    ASSERT_FALSE(arcs.empty());
    for (const auto& a : arcs) EXPECT_GE(a.r, kStraightRadius);
    EXPECT_LE(fit_error(arcs, arclength_parametrize(pts)), 1e-9);
}

TEST(FitError, Examples) {
    const auto pts = circle_points({0, 0}, 1.0, 0, 2 * kPiD, 720);
    CircularArcSpec big;
    big.center = {0, 0};
    big.r = 1.1;
    big.psi_start = 0;
    big.psi_end = 2 * kPiD;
    big.start = {1.1, 0};
    big.end = {1.1, 0};
    const std::vector<CircularArcSpec> forced{big};
    EXPECT_NEAR(fit_error(forced, std::span<const Point>(pts)), 0.1, 1e-12);
    big.r = 1.0;
    const std::vector<CircularArcSpec> exact{big};
    EXPECT_LE(fit_error(exact, std::span<const Point>(pts)), 1e-12);
}

TEST(BiarcFit, SpiralConvergesCubically) {
    const auto seg = arclength_parametrize(spiral_points(0.2, 1.5 * kPiD, 200000));
    std::vector<double> errs;
    for (std::size_t n : {4, 8, 16, 32}) errs.push_back(fit_error(biarc_fit_uniform(seg, n), seg));
    for (std::size_t i = 1; i < errs.size(); ++i) {
        const double ratio = errs[i - 1] / errs[i];
        EXPECT_GE(ratio, 6.0) << "level " << i;
        EXPECT_LE(ratio, 10.0) << "level " << i;
    }
}

TEST(BiarcFit, SplineIsTangentContinuous) {
    const auto seg = arclength_parametrize(spiral_points(0.2, 1.5 * kPiD, 20000));
    const auto arcs = biarc_fit(seg, 1e-6);
    ASSERT_GT(arcs.size(), 2u);
    for (std::size_t i = 1; i < arcs.size(); ++i) {
        EXPECT_LE(distance(arcs[i - 1].end, arcs[i].start), 1e-12);
        EXPECT_LE(turn(arcs[i - 1].end_tangent(), arcs[i].start_tangent()), 1e-8);
    }
}

TEST(BiarcFit, ErrorCertificateMatchesBruteForce) {
    const auto pts = spiral_points(0.2, 1.5 * kPiD, 2000);
    const auto seg = arclength_parametrize(pts);
    const double tol = 1e-4;
    const auto arcs = biarc_fit(seg, tol);
    const double reported = fit_error(arcs, seg);
    EXPECT_LE(reported, tol);
    EXPECT_NEAR(brute_error(arcs, pts), reported, 1e-5);
}

TEST(BiarcFit, RejectsBadInput) {
    const auto seg = arclength_parametrize(circle_points({0, 0}, 1, 0, 1, 10));
    EXPECT_THROW(biarc_fit(seg, 0.0), OutOfRange);
    EXPECT_THROW(biarc_fit(TargetCurve{}, 1e-3), EmptySegment);
    EXPECT_THROW(biarc_fit_uniform(seg, 20), OutOfRange);
}

TEST(FitCurve, CuspSplitsIntoSmoothParts) {
    std::vector<Point> pts = circle_points({0, 1}, 1, -kPiD / 2, 0, 200);
    const Point corner = pts.back();
    for (int i = 1; i <= 200; ++i) pts.push_back({corner.x - 0.005 * i, corner.y});
    const auto curve = arclength_parametrize(pts);
    const auto parts = fit_curve(curve, 1e-6);
    ASSERT_EQ(parts.size(), 2u);
    EXPECT_EQ(parts[0].size(), 1u);
    EXPECT_NEAR(parts[0][0].r, 1.0, 1e-9);
    for (const auto& a : parts[1]) EXPECT_GE(a.r, kStraightRadius);
}

TEST(FitCurve, ClosedCircleIsSingleSmoothPart) {
    auto pts = circle_points({0, 0}, 1.5, 0, 2 * kPiD, 400);
    pts.pop_back();
    const auto curve = arclength_parametrize(pts, {}, true);
    const auto parts = fit_curve(curve, 1e-6);
    ASSERT_EQ(parts.size(), 1u);
    double total = 0;
    for (const auto& a : parts[0]) total += a.length();
    EXPECT_NEAR(total, 3 * kPiD, 1e-5);
}
