#pragma once

// Control laws for the movable mass.
//
// Three families share one evaluation interface (ControlLaw):
//   circular      a = A cos wt, b = A sin wt, fully prescribed.
//   circular_arc  b = A sin wt prescribed, a(0) = A, and a' solved from the
//                 arc condition xi2 = r xi1 so the contact point stays on a
//                 circle of radius r.
//   general       a = a1 + a2 sin wt + a3 cos wt prescribed, b' solved from
//                 the arc condition.
// The two constraint-driven families integrate one control coordinate along
// with the sleigh state (SleighState::control_coord).

#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "skate/errors.hpp"
#include "skate/model.hpp"

namespace skate {

inline constexpr double kDefaultSingularEps = 1e-8;

struct CircularControl {
    double A = 1.0;
    double omega = 1.0;
};

struct ArcLockedCircularControl {
    double A = 1.0;
    double omega = 1.0;
};

struct GeneralControl {
    double a1 = 1.0;
    double a2 = 0.0;
    double a3 = 0.0;
    double omega = 1.0;
};

/// Arc of radius r traced with conserved momentum combination P = p1 + r p2.
struct ArcConstraint {
    double r = 1.0;
    double P = 0.0;

    static ArcConstraint from_state(double r, const SleighState& s) noexcept {
        return {r, s.p1 + r * s.p2};
    }
    [[nodiscard]] double residual(const SleighState& s) const noexcept { return s.p1 + r * s.p2 - P; }
};

enum class ControlFamily { circular, circular_arc, general };

inline std::string_view to_string(ControlFamily f) noexcept {
    switch (f) {
        case ControlFamily::circular: return "circular";
        case ControlFamily::circular_arc: return "circular_arc";
        case ControlFamily::general: return "general";
    }
    return "?";
}

inline ControlFamily family_from_string(std::string_view s) {
    if (s == "circular") return ControlFamily::circular;
    if (s == "circular_arc") return ControlFamily::circular_arc;
    if (s == "general") return ControlFamily::general;
    throw ParseError("unknown control family '" + std::string(s) + "'");
}

inline std::size_t parameter_count(ControlFamily f) noexcept {
    return f == ControlFamily::general ? 4 : 2;
}

inline ControlSample circular_eval(const CircularControl& c, double t) noexcept {
    const double cs = std::cos(c.omega * t), sn = std::sin(c.omega * t);
    return {c.A * cs, c.A * sn, -c.A * c.omega * sn, c.A * c.omega * cs};
}

/// Returns (a, a').
inline std::pair<double, double> general_eval_a(const GeneralControl& c, double t) noexcept {
    const double cs = std::cos(c.omega * t), sn = std::sin(c.omega * t);
    return {c.a1 + c.a2 * sn + c.a3 * cs, c.omega * (c.a2 * cs - c.a3 * sn)};
}

/// b' that keeps xi2 = r xi1 given (a, a') and the current b in s.control_coord.
inline double bdot(const SleighState& s, double b, double a, double da, double r,
                   const SleighParams& q, double eps = kDefaultSingularEps) {
    const double M = q.M, m = q.m, I = q.I, p1 = s.p1, p2 = s.p2;
    const double den = m * m * a * b - r * (M + m) * m * a;
    if (!(std::abs(den) > eps)) {
        std::ostringstream os;
        os << "b' is singular (denominator " << den << " at a=" << a << ", b=" << b << ")";
        throw SingularControl(os.str());
    }
    const double num = m * b * p1 - m * da * (I + m * a * a) + p2 * (I + m * (a * a + b * b)) -
                       r * (M + m) * p1 - r * m * b * (p2 + M * da);
    return num / den;
}

/// a' that keeps xi2 = r xi1 given (b, b') and the current a.
inline double adot(const SleighState& s, double a, double b, double db, double r,
                   const SleighParams& q, double eps = kDefaultSingularEps) {
    const double M = q.M, m = q.m, I = q.I, p1 = s.p1, p2 = s.p2;
    const double den = m * (I + m * a * a) + r * m * M * b;
    if (!(std::abs(den) > eps)) {
        std::ostringstream os;
        os << "a' is singular (denominator " << den << " at a=" << a << ", b=" << b << ")";
        throw SingularControl(os.str());
    }
    const double num = m * b * p1 - m * m * a * b * db + (I + m * (a * a + b * b)) * p2 -
                       r * (M + m) * p1 + r * (M + m) * m * a * db - r * m * b * p2;
    return num / den;
}

/// a(t) of the general family never vanishes.
inline bool regularity_check(const GeneralControl& c) noexcept {
    return c.a1 * c.a1 > c.a2 * c.a2 + c.a3 * c.a3;
}

/// Sufficient condition for a' of the arc-locked circular family to stay
/// finite: |A| < I / (r M).
inline bool regularity_check(const ArcLockedCircularControl& c, double r,
                             const SleighParams& q) noexcept {
    return std::abs(c.A) * r * q.M < q.I;
}

/// One control law bound to an arc radius. Evaluation needs the current state
/// because the constraint-driven families close the loop through p1, p2.
class ControlLaw {
public:
    using Params = std::variant<CircularControl, ArcLockedCircularControl, GeneralControl>;

    ControlLaw(Params p, double r, SleighParams sleigh, double eps = kDefaultSingularEps)
        : params_(p), r_(r), sleigh_(sleigh), eps_(eps) {}

    static ControlLaw from_vector(ControlFamily f, std::span<const double> v, double r,
                                  SleighParams sleigh, double eps = kDefaultSingularEps) {
        if (v.size() != parameter_count(f)) {
            throw ParseError("control family '" + std::string(to_string(f)) + "' expects " +
                             std::to_string(parameter_count(f)) + " parameters, got " +
                             std::to_string(v.size()));
        }
        switch (f) {
            case ControlFamily::circular: return {CircularControl{v[0], v[1]}, r, sleigh, eps};
            case ControlFamily::circular_arc:
                return {ArcLockedCircularControl{v[0], v[1]}, r, sleigh, eps};
            case ControlFamily::general:
                return {GeneralControl{v[0], v[1], v[2], v[3]}, r, sleigh, eps};
        }
        throw ParseError("unknown control family");
    }

    [[nodiscard]] ControlFamily family() const noexcept {
        return static_cast<ControlFamily>(params_.index());
    }
    [[nodiscard]] const Params& params() const noexcept { return params_; }
    [[nodiscard]] double radius() const noexcept { return r_; }

    [[nodiscard]] std::vector<double> to_vector() const {
        return std::visit(
            [](const auto& p) -> std::vector<double> {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, GeneralControl>) return {p.a1, p.a2, p.a3, p.omega};
                else return {p.A, p.omega};
            },
            params_);
    }

    /// Whether this law carries an integrated control coordinate.
    [[nodiscard]] bool has_coordinate() const noexcept { return family() != ControlFamily::circular; }

    /// Value of the integrated coordinate at t = 0 when the task does not
    /// specify one: a(0) = A for the arc-locked circular family.
    [[nodiscard]] std::optional<double> default_coordinate() const noexcept {
        if (const auto* c = std::get_if<ArcLockedCircularControl>(&params_)) return c->A;
        return std::nullopt;
    }

    /// Full control sample at time t. For constraint-driven families the
    /// integrated coordinate is read from s.control_coord.
    [[nodiscard]] ControlSample sample(double t, const SleighState& s) const {
        return std::visit(
            [&](const auto& p) -> ControlSample {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, CircularControl>) {
                    return circular_eval(p, t);
                } else if constexpr (std::is_same_v<T, ArcLockedCircularControl>) {
                    const double a = s.control_coord.value_or(p.A);
                    const double b = p.A * std::sin(p.omega * t);
                    const double db = p.A * p.omega * std::cos(p.omega * t);
                    return {a, b, adot(s, a, b, db, r_, sleigh_, eps_), db};
                } else {
                    const auto [a, da] = general_eval_a(p, t);
                    const double b = s.control_coord.value_or(0.0);
                    return {a, b, da, bdot(s, b, a, da, r_, sleigh_, eps_)};
                }
            },
            params_);
    }

    /// Rate of the integrated coordinate given a sample from this law.
    [[nodiscard]] double coordinate_rate(const ControlSample& c) const noexcept {
        switch (family()) {
            case ControlFamily::circular_arc: return c.da;
            case ControlFamily::general: return c.db;
            default: return 0.0;
        }
    }

private:
    Params params_;
    double r_;
    SleighParams sleigh_;
    double eps_;
};

}  // namespace skate
