#pragma once

// Chaplygin sleigh with a movable control mass.
//
// Body frame: e1 along the blade, e2 normal to it. The contact point is at
// (x, y) in the spatial frame and the blade makes angle theta with the x axis.
// The control mass m sits at (a, b) in the body frame.

#include <cmath>
#include <optional>
#include <utility>

namespace skate {

struct SleighParams {
    double M = 2.0;  ///< sleigh mass
    double m = 1.0;  ///< control mass
    double I = 3.0;  ///< moment of inertia about the contact point
    double l = 0.0;  ///< contact point to center of mass (classical sleigh only)

    [[nodiscard]] bool valid() const noexcept {
        return std::isfinite(M) && std::isfinite(m) && std::isfinite(I) && std::isfinite(l) &&
               M > 0.0 && m >= 0.0 && I > 0.0 && l >= 0.0;
    }
};

struct SleighState {
    double p1 = 0.0;     ///< angular momentum about the contact point
    double p2 = 0.0;     ///< linear momentum along the blade
    double theta = 0.0;  ///< blade orientation, unwrapped
    double x = 0.0;
    double y = 0.0;
    /// Integrated control coordinate for the constraint-driven control
    /// families (b for the general family, a for the arc-locked circular one).
    std::optional<double> control_coord;
};

struct ControlSample {
    double a = 0.0;
    double b = 0.0;
    double da = 0.0;
    double db = 0.0;
};

struct Quasivelocities {
    double xi1 = 0.0;  ///< angular velocity
    double xi2 = 0.0;  ///< speed along the blade
    double eta = 0.0;  ///< transverse quasivelocity
};

struct StateRate {
    double dp1 = 0.0;
    double dp2 = 0.0;
    double dtheta = 0.0;
    double dx = 0.0;
    double dy = 0.0;
};

struct ClassicalState {
    double v = 0.0;
    double omega = 0.0;
};

struct ClassicalRate {
    double dv = 0.0;
    double domega = 0.0;
};

/// Shared denominator of the quasivelocities; bounded below by (M+m)I.
inline double quasi_denominator(const ControlSample& c, const SleighParams& q) noexcept {
    return (q.M + q.m) * (q.I + q.m * c.a * c.a) + q.M * q.m * c.b * c.b;
}

inline Quasivelocities quasivelocities(const SleighState& s, const ControlSample& c,
                                       const SleighParams& q) noexcept {
    const double M = q.M, m = q.m, I = q.I;
    const double a = c.a, b = c.b, da = c.da, db = c.db;
    const double den = quasi_denominator(c, q);
    const double p1_eff = s.p1 - m * a * db;
    const double p2_eff = s.p2 + M * da;

    Quasivelocities out;
    out.xi1 = ((M + m) * p1_eff + m * b * p2_eff) / den;
    out.xi2 = (m * (b * p1_eff - (I + m * a * a) * da) + (I + m * (a * a + b * b)) * s.p2) / den;
    out.eta = ((M * m * b * b + I * (M + m)) * db + a * ((M + m) * s.p1 + m * b * p2_eff)) / den;
    return out;
}

inline StateRate controlled_rhs(const SleighState& s, const Quasivelocities& w,
                                const SleighParams& q) noexcept {
    return {-q.m * w.eta * w.xi2, q.m * w.eta * w.xi1, w.xi1, w.xi2 * std::cos(s.theta),
            w.xi2 * std::sin(s.theta)};
}

inline StateRate controlled_rhs(const SleighState& s, const ControlSample& c,
                                const SleighParams& q) noexcept {
    return controlled_rhs(s, quasivelocities(s, c, q), q);
}

/// Classical sleigh with fixed center-of-mass offset l.
inline ClassicalRate classical_rhs(const ClassicalState& s, const SleighParams& q) noexcept {
    const double inertia = q.I + q.M * q.l * q.l;
    return {q.l * s.omega * s.omega, -q.M * q.l * s.omega * s.v / inertia};
}

/// Conserved along classical_rhs solutions: v v' + (J/M) w w' = 0.
inline double classical_invariant(const ClassicalState& s, const SleighParams& q) noexcept {
    const double inertia = q.I + q.M * q.l * q.l;
    return 0.5 * s.v * s.v + 0.5 * (inertia / q.M) * s.omega * s.omega;
}

/// Speed of the contact point relative to the ice (signed, along e1).
inline double speed(const SleighState& s, const ControlSample& c, const SleighParams& q) noexcept {
    return quasivelocities(s, c, q).xi2;
}

/// Kinetic energy of the skate on an arc of radius r, using p1 = M v r.
inline double skate_energy(double xi2, double r, const SleighParams& q) noexcept {
    const double p1 = q.M * xi2 * r;
    return 0.5 * q.M * xi2 * xi2 + p1 * p1 / (2.0 * q.I);
}

/// Kinetic energy of the control mass.
inline double mass_energy(const Quasivelocities& w, const ControlSample& c,
                          const SleighParams& q) noexcept {
    const double a = c.a, b = c.b, da = c.da, db = c.db;
    return 0.5 * q.m *
           (da * da + db * db + w.xi1 * w.xi1 * (a * a + b * b) + w.xi2 * w.xi2 +
            2.0 * w.xi1 * (a * db - da * b) + 2.0 * w.xi2 * (da - b * w.xi1));
}

/// Zero iff the sleigh glides on a straight line at constant speed with the
/// control mass frozen.
inline double straight_line_residual(const SleighState& s, const ControlSample& c,
                                     const SleighParams& q) noexcept {
    return (q.M + q.m) * s.p1 + q.m * c.b * s.p2;
}

/// Spatial position of the control mass.
inline std::pair<double, double> mass_position(const SleighState& s, const ControlSample& c) noexcept {
    const double cs = std::cos(s.theta), sn = std::sin(s.theta);
    return {s.x + c.a * cs - c.b * sn, s.y + c.a * sn + c.b * cs};
}

}  // namespace skate
