#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the closed-form expressions of the library.

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "skate/model.hpp"

namespace oracle {

/// Body-frame rates from momenta. The kinetic energy
///   T = M v^2/2 + I w^2/2 + m/2 [(v + a' - w b)^2 + (b' + w a)^2]
/// gives p1 = dT/dw and p2 = dT/dv, linear in (w, v); solve that system.
/// The transverse quasivelocity is the body-frame transverse velocity of the
/// moving mass, b' + w a.
inline skate::Quasivelocities quasivelocities(const skate::SleighState& s, const skate::ControlSample& c,
                                              const skate::SleighParams& q) {
    const double M = q.M, m = q.m, I = q.I, a = c.a, b = c.b;
    Eigen::Matrix2d A;
    Eigen::Vector2d rhs;
    // p1 = I w + m[-b (v + a' - w b) + a (b' + w a)]
    A(0, 0) = I + m * (a * a + b * b);
    A(0, 1) = -m * b;
    rhs(0) = s.p1 + m * b * c.da - m * a * c.db;
    // p2 = M v + m (v + a' - w b)
    A(1, 0) = -m * b;
    A(1, 1) = M + m;
    rhs(1) = s.p2 - m * c.da;
    const Eigen::Vector2d x = A.fullPivLu().solve(rhs);
    return {x(0), x(1), c.db + x(0) * a};
}

/// (m/2)|v_mass|^2 from the body-frame velocity of the moving mass.
inline double mass_energy(const skate::Quasivelocities& w, const skate::ControlSample& c, double m) {
    const double vx = w.xi2 + c.da - w.xi1 * c.b;
    const double vy = c.db + w.xi1 * c.a;
    return 0.5 * m * (vx * vx + vy * vy);
}

struct Rng {
    std::mt19937_64 gen{20240611};
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
};

}  // namespace oracle
