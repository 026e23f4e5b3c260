#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "skate/errors.hpp"
#include "skate/trajectory.hpp"

namespace skate {

inline constexpr double kPi = std::numbers::pi;

struct CircleFit {
    Point center;
    double radius = 0.0;
    double max_residual = 0.0;  ///< max | |p - c| - R |
    double rms_residual = 0.0;
};

/// Geometric least-squares circle fit: algebraic (Kasa) start refined by
/// Gauss-Newton on the radial residuals.
inline CircleFit fit_circle(std::span<const Point> pts) {
    if (pts.size() < 3) throw OutOfRange("fit_circle: need at least 3 points");
    const auto n = static_cast<Eigen::Index>(pts.size());

    // Shift to the centroid for conditioning.
    double mx = 0, my = 0;
    for (const auto& p : pts) {
        mx += p.x;
        my += p.y;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());

    Eigen::MatrixXd A(n, 3);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = pts[static_cast<std::size_t>(i)].x - mx;
        const double y = pts[static_cast<std::size_t>(i)].y - my;
        A(i, 0) = 2 * x;
        A(i, 1) = 2 * y;
        A(i, 2) = 1;
        rhs(i) = x * x + y * y;
    }
    const Eigen::Vector3d sol = A.colPivHouseholderQr().solve(rhs);
    double cx = sol(0), cy = sol(1);
    double R = std::sqrt(std::max(0.0, sol(2) + cx * cx + cy * cy));

    Eigen::MatrixXd J(n, 3);
    Eigen::VectorXd res(n);
    for (int iter = 0; iter < 50; ++iter) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double dx = pts[static_cast<std::size_t>(i)].x - mx - cx;
            const double dy = pts[static_cast<std::size_t>(i)].y - my - cy;
            const double d = std::max(std::hypot(dx, dy), 1e-300);
            res(i) = d - R;
            J(i, 0) = -dx / d;
            J(i, 1) = -dy / d;
            J(i, 2) = -1.0;
        }
        const Eigen::Vector3d delta = J.colPivHouseholderQr().solve(-res);
        cx += delta(0);
        cy += delta(1);
        R += delta(2);
        if (delta.norm() <= 1e-15 * std::max(1.0, std::abs(R))) break;
    }

    CircleFit fit{{cx + mx, cy + my}, std::abs(R), 0.0, 0.0};
    double acc = 0.0;
    for (const auto& p : pts) {
        const double r = std::abs(distance(p, fit.center) - fit.radius);
        fit.max_residual = std::max(fit.max_residual, r);
        acc += r * r;
    }
    fit.rms_residual = std::sqrt(acc / static_cast<double>(pts.size()));
    return fit;
}

inline std::vector<Point> points_of(const Trajectory& tr) {
    std::vector<Point> pts;
    pts.reserve(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) pts.push_back(tr.point(i));
    return pts;
}

/// Smallest signed angle difference b - a in (-pi, pi].
inline double angle_diff(double a, double b) noexcept {
    double d = std::remainder(b - a, 2 * kPi);
    if (d <= -kPi) d += 2 * kPi;
    return d;
}

}  // namespace skate
