#pragma once

// Decomposition of sampled planar curves into circular arcs: cusp splitting,
// chord-length parametrization and adaptive G1 biarc fitting.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "skate/errors.hpp"
#include "skate/geometry.hpp"
#include "skate/trajectory.hpp"

namespace skate {

/// Radius assigned to straight pieces.
inline constexpr double kStraightRadius = 1e6;

struct TargetCurve {
    std::vector<Point> points;
    std::vector<double> s;  ///< cumulative chord length, s[0] = 0
    std::vector<std::size_t> cusp_indices;
    bool closed = false;

    [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
    [[nodiscard]] double length() const noexcept { return s.empty() ? 0.0 : s.back(); }
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
inline Vec2 sub(Point a, Point b) noexcept { return {a.x - b.x, a.y - b.y}; }
inline Vec2 unit(Vec2 v) noexcept {
    const double n = std::hypot(v.x, v.y);
    return n > 0 ? Vec2{v.x / n, v.y / n} : Vec2{};
}

/// Circular arc given by center, radius and the normal angles at its ends;
/// the point at normal angle psi is center + r (cos psi, sin psi).
/// orientation = +1 when psi increases along the arc (counter-clockwise).
/// Pieces with r >= kStraightRadius are straight segments from start to end.
struct CircularArcSpec {
    Point center;
    double r = 0.0;
    double psi_start = 0.0;
    double psi_end = 0.0;
    int orientation = 1;
    Point start;
    Point end;

    [[nodiscard]] bool straight() const noexcept { return r >= kStraightRadius; }
    [[nodiscard]] double length() const noexcept {
        return straight() ? distance(start, end) : r * std::abs(psi_end - psi_start);
    }
    [[nodiscard]] Vec2 tangent_at(double psi) const noexcept {
        if (straight()) return unit(sub(end, start));
        return {-orientation * std::sin(psi), orientation * std::cos(psi)};
    }
    [[nodiscard]] Vec2 start_tangent() const noexcept { return tangent_at(psi_start); }
    [[nodiscard]] Vec2 end_tangent() const noexcept { return tangent_at(psi_end); }

    [[nodiscard]] Point at(double u) const noexcept {
        if (straight()) return {start.x + u * (end.x - start.x), start.y + u * (end.y - start.y)};
        const double psi = psi_start + u * (psi_end - psi_start);
        return {center.x + r * std::cos(psi), center.y + r * std::sin(psi)};
    }

    /// Euclidean distance from q to the arc (not the full circle).
    [[nodiscard]] double distance_to(Point q) const noexcept {
        if (straight()) {
            const Vec2 d = sub(end, start);
            const double len2 = dot(d, d);
            const double u = len2 > 0 ? std::clamp(dot(sub(q, start), d) / len2, 0.0, 1.0) : 0.0;
            return distance(q, at(u));
        }
        const double lo = std::min(psi_start, psi_end);
        const double sweep = std::abs(psi_end - psi_start);
        double rel = std::atan2(q.y - center.y, q.x - center.x) - lo;
        rel -= 2 * kPi * std::floor(rel / (2 * kPi));
        if (rel <= sweep) return std::abs(distance(q, center) - r);
        return std::min(distance(q, start), distance(q, end));
    }
};

/// Chord-length parametrization. Consecutive duplicates are dropped and cusp
/// indices are remapped onto the remaining samples.
inline TargetCurve arclength_parametrize(std::span<const Point> pts, std::vector<std::size_t> cusps = {},
                                         bool closed = false) {
    if (pts.size() < 2) throw DuplicatePoints("curve needs at least two points");
    std::sort(cusps.begin(), cusps.end());
    for (auto c : cusps)
        if (c >= pts.size()) throw OutOfRange("cusp index " + std::to_string(c) + " out of range");

    TargetCurve curve;
    curve.closed = closed;
    std::vector<std::size_t> remap(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (curve.points.empty() || !(pts[i] == curve.points.back())) {
            const double ds = curve.points.empty() ? 0.0 : distance(curve.points.back(), pts[i]);
            curve.s.push_back(curve.s.empty() ? 0.0 : curve.s.back() + ds);
            curve.points.push_back(pts[i]);
        }
        remap[i] = curve.points.size() - 1;
    }
    if (curve.points.size() < 2) throw DuplicatePoints("all curve points coincide");
    if (closed && !(curve.points.back() == curve.points.front())) {
        curve.s.push_back(curve.s.back() + distance(curve.points.back(), curve.points.front()));
        curve.points.push_back(curve.points.front());
    }
    for (auto c : cusps) curve.cusp_indices.push_back(remap[c]);
    return curve;
}

/// Interior samples where consecutive chords turn by more than
/// threshold_deg; merged with the cusps already on the curve.
inline std::vector<std::size_t> detect_cusps(const TargetCurve& curve, double threshold_deg = 30.0) {
    std::vector<std::size_t> out = curve.cusp_indices;
    const double limit = threshold_deg * kPi / 180.0;
    for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
        const Vec2 a = sub(curve.points[i], curve.points[i - 1]);
        const Vec2 b = sub(curve.points[i + 1], curve.points[i]);
        if (std::abs(std::atan2(cross(a, b), dot(a, b))) > limit) out.push_back(i);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Smooth pieces between consecutive cusps. Neighbouring segments share the
/// cusp sample; each segment is re-parametrized from s = 0.
inline std::vector<TargetCurve> split_at_cusps(const TargetCurve& curve) {
    std::vector<std::size_t> cuts;
    cuts.push_back(0);
    for (auto c : curve.cusp_indices) {
        if (c == 0 || c + 1 >= curve.size()) continue;  // endpoints already delimit
        if (c <= cuts.back() + 1 && cuts.back() != 0) {
            throw EmptySegment("cusps at samples " + std::to_string(cuts.back()) + " and " +
                               std::to_string(c) + " leave no segment between them");
        }
        cuts.push_back(c);
    }
    cuts.push_back(curve.size() - 1);

    std::vector<TargetCurve> out;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const std::size_t i0 = cuts[k], i1 = cuts[k + 1];
        if (i1 <= i0) throw EmptySegment("empty segment at sample " + std::to_string(i0));
        TargetCurve seg;
        seg.points.assign(curve.points.begin() + static_cast<std::ptrdiff_t>(i0),
                          curve.points.begin() + static_cast<std::ptrdiff_t>(i1) + 1);
        for (std::size_t i = i0; i <= i1; ++i) seg.s.push_back(curve.s[i] - curve.s[i0]);
        out.push_back(std::move(seg));
    }
    return out;
}

/// Unit tangent at sample i from three-point differences in s.
inline Vec2 estimate_tangent(const TargetCurve& seg, std::size_t i) {
    const std::size_t n = seg.size();
    const auto& p = seg.points;
    const auto& s = seg.s;
    if (n == 2) return unit(sub(p[1], p[0]));
    auto combo = [&](std::size_t a, std::size_t b, std::size_t c, double wa, double wb, double wc) {
        return unit(Vec2{wa * p[a].x + wb * p[b].x + wc * p[c].x, wa * p[a].y + wb * p[b].y + wc * p[c].y});
    };
    if (i == 0 || i == n - 1) {
        if (seg.closed && n > 3) {
            // Periodic: last sample repeats the first.
            const double h1 = s[n - 1] - s[n - 2], h2 = s[1] - s[0];
            return combo(n - 2, 0, 1, -h2 / (h1 * (h1 + h2)), (h2 - h1) / (h1 * h2), h1 / (h2 * (h1 + h2)));
        }
        if (i == 0) {
            const double h1 = s[1] - s[0], h2 = s[2] - s[1];
            return combo(0, 1, 2, -(2 * h1 + h2) / (h1 * (h1 + h2)), (h1 + h2) / (h1 * h2), -h1 / (h2 * (h1 + h2)));
        }
        const double h1 = s[n - 2] - s[n - 3], h2 = s[n - 1] - s[n - 2];
        return combo(n - 3, n - 2, n - 1, h2 / (h1 * (h1 + h2)), -(h1 + h2) / (h1 * h2), (2 * h2 + h1) / (h2 * (h1 + h2)));
    }
    const double h1 = s[i] - s[i - 1], h2 = s[i + 1] - s[i];
    return combo(i - 1, i, i + 1, -h2 / (h1 * (h1 + h2)), (h2 - h1) / (h1 * h2), h1 / (h2 * (h1 + h2)));
}

/// Arc leaving a with unit tangent ta and ending at b.
inline CircularArcSpec arc_from_tangent(Point a, Vec2 ta, Point b) {
    const Vec2 c = sub(b, a);
    const double c2 = dot(c, c);
    const double kappa = c2 > 0 ? 2.0 * cross(ta, c) / c2 : 0.0;
    CircularArcSpec arc;
    arc.start = a;
    arc.end = b;
    if (std::abs(kappa) * kStraightRadius < 1.0) {
        arc.r = kStraightRadius;
        arc.orientation = 1;
        arc.center = {a.x - ta.y * arc.r, a.y + ta.x * arc.r};
        arc.psi_start = std::atan2(a.y - arc.center.y, a.x - arc.center.x);
        arc.psi_end = arc.psi_start + std::sqrt(c2) / arc.r;
        return arc;
    }
    arc.r = 1.0 / std::abs(kappa);
    arc.orientation = kappa > 0 ? 1 : -1;
    arc.center = {a.x - ta.y / kappa, a.y + ta.x / kappa};
    arc.psi_start = std::atan2(a.y - arc.center.y, a.x - arc.center.x);
    arc.psi_end = arc.psi_start + 2.0 * std::atan2(cross(ta, c), dot(ta, c));
    return arc;
}

/// Equal-distance biarc joining (p0, t0) to (p1, t1). Returns false when the
/// construction degenerates (no finite positive tangent length).
inline bool biarc(Point p0, Vec2 t0, Point p1, Vec2 t1, std::vector<CircularArcSpec>& out) {
    const Vec2 v = sub(p1, p0);
    const Vec2 t{t0.x + t1.x, t0.y + t1.y};
    const double vt = dot(v, t), vv = dot(v, v);
    const double a = dot(t, t) - 4.0;
    double d;
    if (std::abs(a) < 1e-12) {
        if (!(std::abs(vt) > 1e-14 * vv)) return false;
        d = vv / (2.0 * vt);
    } else {
        const double disc = vt * vt - a * vv;
        if (disc < 0) return false;
        d = (vt - std::sqrt(disc)) / a;
    }
    if (!(d > 0) || !std::isfinite(d)) return false;
    const Point q0{p0.x + d * t0.x, p0.y + d * t0.y};
    const Point q1{p1.x - d * t1.x, p1.y - d * t1.y};
    const Point j{0.5 * (q0.x + q1.x), 0.5 * (q0.y + q1.y)};
    out.push_back(arc_from_tangent(p0, t0, j));
    Vec2 tj = unit(sub(q1, q0));
    if (tj.x == 0 && tj.y == 0) tj = t0;
    out.push_back(arc_from_tangent(j, tj, p1));
    return true;
}

/// Max distance from the samples to the nearest arc of the spline.
inline double fit_error(std::span<const CircularArcSpec> arcs, std::span<const Point> samples) {
    double worst = 0.0;
    for (const auto& q : samples) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& a : arcs) best = std::min(best, a.distance_to(q));
        worst = std::max(worst, best);
    }
    return arcs.empty() ? std::numeric_limits<double>::infinity() : worst;
}

inline double fit_error(std::span<const CircularArcSpec> arcs, const TargetCurve& seg) {
    return fit_error(arcs, std::span<const Point>(seg.points));
}

struct BiarcFitOptions {
    std::size_t max_depth = 20;
    bool try_single_arc = true;  ///< accept one arc through ends and midpoint if within tol
};

namespace detail {

inline CircularArcSpec arc_through(Point a, Point m, Point b) {
    const double d = 2.0 * (a.x * (m.y - b.y) + m.x * (b.y - a.y) + b.x * (a.y - m.y));
    if (std::abs(d) < 1e-300) return arc_from_tangent(a, unit(sub(b, a)), b);
    const double a2 = a.x * a.x + a.y * a.y, m2 = m.x * m.x + m.y * m.y, b2 = b.x * b.x + b.y * b.y;
    const Point c{(a2 * (m.y - b.y) + m2 * (b.y - a.y) + b2 * (a.y - m.y)) / d,
                  (a2 * (b.x - m.x) + m2 * (a.x - b.x) + b2 * (m.x - a.x)) / d};
    const Vec2 ra = sub(a, c);
    // Tangent at a follows the turning sense a -> m -> b.
    const double sense = cross(sub(m, a), sub(b, m)) > 0 ? 1.0 : -1.0;
    return arc_from_tangent(a, unit(Vec2{-sense * ra.y, sense * ra.x}), b);
}

inline void fit_piece(const TargetCurve& seg, const std::vector<Vec2>& tangents, std::size_t i0, std::size_t i1,
                      double tol, std::size_t depth, const BiarcFitOptions& opt,
                      std::vector<CircularArcSpec>& out) {
    std::vector<CircularArcSpec> trial;
    const bool ok = biarc(seg.points[i0], tangents[i0], seg.points[i1], tangents[i1], trial);
    const std::span<const Point> samples(seg.points.data() + i0, i1 - i0 + 1);
    if (ok && (i1 - i0 < 2 || fit_error(trial, samples) <= tol)) {
        out.insert(out.end(), trial.begin(), trial.end());
        return;
    }
    if (i1 - i0 < 2) {
        // Two samples and a degenerate biarc: fall back to the chord.
        out.push_back(arc_from_tangent(seg.points[i0], unit(sub(seg.points[i1], seg.points[i0])), seg.points[i1]));
        return;
    }
    if (depth >= opt.max_depth) {
        throw FitFailed("biarc fit: tolerance " + std::to_string(tol) + " not reached at depth " +
                        std::to_string(depth));
    }
    const double s_mid = 0.5 * (seg.s[i0] + seg.s[i1]);
    auto it = std::lower_bound(seg.s.begin() + static_cast<std::ptrdiff_t>(i0),
                               seg.s.begin() + static_cast<std::ptrdiff_t>(i1), s_mid);
    std::size_t mid = static_cast<std::size_t>(it - seg.s.begin());
    mid = std::clamp(mid, i0 + 1, i1 - 1);
    fit_piece(seg, tangents, i0, mid, tol, depth + 1, opt, out);
    fit_piece(seg, tangents, mid, i1, tol, depth + 1, opt, out);
}

}  // namespace detail

/// Adaptive arc-spline fit of one smooth segment. Pieces are bisected in arc
/// length until the biarc on each is within tol of its samples. Consecutive
/// arcs share end tangents, so the result is G1.
inline std::vector<CircularArcSpec> biarc_fit(const TargetCurve& seg, double tol, const BiarcFitOptions& opt = {}) {
    if (!(tol > 0)) throw OutOfRange("biarc_fit: tolerance must be positive");
    if (seg.size() < 2) throw EmptySegment("biarc_fit: segment has fewer than two samples");
    const std::size_t n = seg.size();

    if (opt.try_single_arc && n >= 3) {
        const std::size_t mid = static_cast<std::size_t>(
            std::lower_bound(seg.s.begin(), seg.s.end(), 0.5 * seg.length()) - seg.s.begin());
        const std::vector<CircularArcSpec> one{
            detail::arc_through(seg.points.front(), seg.points[std::clamp<std::size_t>(mid, 1, n - 2)], seg.points.back())};
        if (fit_error(one, seg) <= tol) return one;
    }

    std::vector<Vec2> tangents(n);
    for (std::size_t i = 0; i < n; ++i) tangents[i] = estimate_tangent(seg, i);
    std::vector<CircularArcSpec> out;
    detail::fit_piece(seg, tangents, 0, n - 1, tol, 0, opt, out);
    return out;
}

/// Biarcs on `pieces` equal arc-length pieces with no adaptivity; used to
/// measure convergence in the piece length h.
inline std::vector<CircularArcSpec> biarc_fit_uniform(const TargetCurve& seg, std::size_t pieces) {
    const std::size_t n = seg.size();
    if (pieces == 0 || n < pieces + 1) throw OutOfRange("biarc_fit_uniform: not enough samples");
    std::vector<std::size_t> cuts{0};
    for (std::size_t k = 1; k < pieces; ++k) {
        const double target = seg.length() * static_cast<double>(k) / static_cast<double>(pieces);
        cuts.push_back(static_cast<std::size_t>(std::lower_bound(seg.s.begin(), seg.s.end(), target) - seg.s.begin()));
    }
    cuts.push_back(n - 1);
    std::vector<CircularArcSpec> out;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const std::size_t i0 = cuts[k], i1 = cuts[k + 1];
        if (!biarc(seg.points[i0], estimate_tangent(seg, i0), seg.points[i1], estimate_tangent(seg, i1), out)) {
            throw FitFailed("biarc_fit_uniform: degenerate biarc on piece " + std::to_string(k));
        }
    }
    return out;
}

/// Fits every smooth part of a curve (split at known and detected cusps).
inline std::vector<std::vector<CircularArcSpec>> fit_curve(const TargetCurve& curve, double tol,
                                                           double cusp_threshold_deg = 30.0,
                                                           const BiarcFitOptions& opt = {}) {
    TargetCurve marked = curve;
    marked.cusp_indices = detect_cusps(curve, cusp_threshold_deg);
    std::vector<std::vector<CircularArcSpec>> out;
    const auto segments = split_at_cusps(marked);
    for (std::size_t k = 0; k < segments.size(); ++k) {
        TargetCurve seg = segments[k];
        seg.closed = curve.closed && segments.size() == 1;
        out.push_back(biarc_fit(seg, tol, opt));
    }
    return out;
}

}  // namespace skate
