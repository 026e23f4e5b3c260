#pragma once

// One circular-arc trace: integrate the controlled sleigh forward and backward
// from a shared interior state, stop each half where the blade speed
// vanishes, and tune the control parameters against a length or end-point
// target.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "skate/controls.hpp"
#include "skate/errors.hpp"
#include "skate/geometry.hpp"
#include "skate/model.hpp"
#include "skate/ode.hpp"
#include "skate/optimize.hpp"
#include "skate/trajectory.hpp"

namespace skate {

inline constexpr double kMinHalfLength = 1e-6;

struct LengthTarget {
    double length = 0.0;
};

struct PointTarget {
    double x = 0.0;
    double y = 0.0;
};

using ArcTarget = std::variant<LengthTarget, PointTarget>;

struct ArcOptimizerConfig {
    /// Cost above which optimize_arc reports failure. NaN selects the default
    /// for the target kind (1e-3 for length targets, no limit for points).
    double fail_threshold = std::numeric_limits<double>::quiet_NaN();
    /// Weight of the end-speed penalty applied while a half has not yet
    /// reached zero speed within the horizon.
    double speed_penalty = 1.0;
    NelderMeadOptions nelder_mead{.initial_rel_step = 0.5};
};

struct ArcTask {
    std::string name;
    double T = 1.0;  ///< horizon per direction (hard cap; zero speed expected earlier)
    double r = 1.0;
    ArcTarget target = LengthTarget{};
    SleighState init{};
    SleighParams params{};
    ControlFamily family = ControlFamily::circular_arc;
    std::vector<double> guess;
    double p_exp = 2.0;
    double singular_eps = kDefaultSingularEps;  ///< guard on the b' (or a') denominator
    IntegratorConfig integrator{};
    ArcOptimizerConfig optimizer{};

    [[nodiscard]] bool is_length() const noexcept { return std::holds_alternative<LengthTarget>(target); }

    void validate() const {
        if (!(T > 0) || !(r > 0) || !(p_exp > 1)) {
            throw ParseError("arc task '" + name + "': need T > 0, r > 0 and p > 1");
        }
        if (!params.valid()) throw ParseError("arc task '" + name + "': invalid sleigh parameters");
        if (guess.size() != parameter_count(family)) {
            throw ParseError("arc task '" + name + "': guess has " + std::to_string(guess.size()) +
                             " entries, family '" + std::string(to_string(family)) + "' needs " +
                             std::to_string(parameter_count(family)));
        }
    }
};

struct ArcSolution {
    Trajectory forward;
    Trajectory backward;  ///< time-ascending, ends at the shared initial state
    Trajectory combined;
    double length = 0.0;
    double cost = 0.0;
    std::vector<double> opt_params;
    double opt_error = 0.0;
    double initial_cost = 0.0;
    bool forward_stopped = false;   ///< zero-speed event reached before +T
    bool backward_stopped = false;  ///< zero-speed event reached before -T
    bool forward_singular = false;   ///< cut short at a control singularity
    bool backward_singular = false;
    std::size_t evaluations = 0;
};

namespace detail {

inline SleighState initial_state(const ArcTask& task, const ControlLaw& law) {
    SleighState s = task.init;
    if (!law.has_coordinate()) {
        s.control_coord.reset();
    } else if (!s.control_coord) {
        s.control_coord = law.default_coordinate().value_or(0.0);
    }
    return s;
}

struct Half {
    Trajectory traj;
    bool stopped = false;
    bool singular = false;
};

inline Half simulate_half(const ArcTask& task, const ControlLaw& law, const SleighState& s0, double t1) {
    const SleighParams& q = task.params;
    const bool coord = law.has_coordinate();
    auto rhs = [&](double t, const PackedState& y) {
        const SleighState s = unpack(y, coord);
        const ControlSample c = law.sample(t, s);
        const Quasivelocities w = quasivelocities(s, c, q);
        const StateRate d = controlled_rhs(s, w, q);
        return PackedState{d.dp1, d.dp2, d.dtheta, d.dx, d.dy, law.coordinate_rate(c), w.xi2};
    };
    std::function<double(double, const PackedState&)> event = [&](double t, const PackedState& y) {
        const SleighState s = unpack(y, coord);
        return quasivelocities(s, law.sample(t, s), q).xi2;
    };
    const OdeSolution<7> sol = integrate<7>(rhs, pack(s0), 0.0, t1, task.integrator, event);
    return {make_trajectory(sol, law, q), sol.event_hit, sol.singular_hit};
}

inline double end_speed(const Trajectory& tr) noexcept {
    return tr.empty() ? 0.0 : std::abs(tr.quasis.back().xi2);
}

}  // namespace detail

/// Arc length accumulated along a trajectory (integral of |xi2| dt).
inline double arc_length(const Trajectory& tr) noexcept { return tr.length(); }

inline double cost_length(double length, double target_length, double p) noexcept {
    return std::pow(std::abs(length - target_length), p);
}

inline double cost_length(const ArcSolution& sol, double target_length, double p) noexcept {
    return cost_length(sol.length, target_length, p);
}

/// End-point cost on the forward half only.
inline double cost_point(const ArcSolution& sol, double x_target, double y_target, double p) noexcept {
    if (sol.forward.empty()) return std::numeric_limits<double>::infinity();
    const Point end = sol.forward.point(sol.forward.size() - 1);
    const double d2 = (end.x - x_target) * (end.x - x_target) + (end.y - y_target) * (end.y - y_target);
    return std::pow(d2, p);
}

/// Integrates both halves with the given control parameters and concatenates
/// them. Halves that do not reach zero speed within the horizon are kept but
/// flagged (forward_stopped / backward_stopped).
inline ArcSolution simulate_arc(const ArcTask& task, std::span<const double> control_params,
                                bool with_backward = true) {
    const ControlLaw law = ControlLaw::from_vector(task.family, control_params, task.r, task.params, task.singular_eps);
    const SleighState s0 = detail::initial_state(task, law);

    ArcSolution sol;
    sol.opt_params.assign(control_params.begin(), control_params.end());

    const auto fwd = detail::simulate_half(task, law, s0, task.T);
    sol.forward = fwd.traj;
    sol.forward_stopped = fwd.stopped;
    sol.forward_singular = fwd.singular;
    if (sol.forward.length() < kMinHalfLength) {
        throw DegenerateArc("arc '" + task.name + "': forward half has zero length");
    }
    if (with_backward) {
        const auto bwd = detail::simulate_half(task, law, s0, -task.T);
        sol.backward = reverse_normalize(bwd.traj);
        sol.backward_stopped = bwd.stopped;
        sol.backward_singular = bwd.singular;
        if (sol.backward.length() < kMinHalfLength) {
            throw DegenerateArc("arc '" + task.name + "': backward half has zero length");
        }
        sol.combined = concatenate(sol.backward, sol.forward);
    } else {
        sol.combined = sol.forward;
    }
    sol.length = sol.combined.length();

    if (const auto* lt = std::get_if<LengthTarget>(&task.target)) {
        sol.cost = cost_length(sol, lt->length, task.p_exp);
    } else {
        const auto& pt = std::get<PointTarget>(task.target);
        sol.cost = cost_point(sol, pt.x, pt.y, task.p_exp);
    }
    sol.opt_error = sol.cost;
    return sol;
}

namespace detail {

/// Where a half comes closest to stopping: for a half that never reaches
/// zero speed, the sample of minimal speed (measured in the direction of the
/// initial motion) and that speed; for a stopped half, its end.
struct NearStop {
    double length = 0.0;  ///< arc length from the shared initial state
    Point point;
    double residual_speed = 0.0;
};

inline NearStop near_stop(const Trajectory& tr, bool stopped, bool backward) {
    const std::size_t n = tr.size();
    const std::size_t origin = backward ? n - 1 : 0;
    const std::size_t terminal = backward ? 0 : n - 1;
    auto from_origin = [&](std::size_t i) { return std::abs(tr.arclen[i] - tr.arclen[origin]); };
    if (stopped) return {from_origin(terminal), tr.point(terminal), 0.0};
    const double sign = tr.quasis[origin].xi2 >= 0 ? 1.0 : -1.0;
    const auto speed_at = [&](std::size_t k) { return sign * tr.quasis[k].xi2; };
    const auto step = [&](std::size_t k) { return backward ? k - 1 : k + 1; };
    // Skip the initial stretch where the skate is still speeding up.
    std::size_t i = origin;
    while (i != terminal && speed_at(step(i)) >= speed_at(i)) i = step(i);
    std::size_t best = terminal;
    for (; i != terminal; i = step(i))
        if (speed_at(i) < speed_at(best)) best = i;
    return {from_origin(best), tr.point(best), std::max(0.0, speed_at(best))};
}

/// Objective seen by the optimizer. Each half that has not stopped within the
/// horizon is cut at its slowest sample and charged the residual speed there;
/// as that speed tends to zero the cut converges to the zero-speed stop, so
/// the objective is continuous across the boundary of admissible arcs and
/// equals the task cost on them.
inline double arc_objective(const ArcTask& task, const std::vector<double>& x) {
    try {
        const bool both = task.is_length();
        const ArcSolution sol = simulate_arc(task, x, both);
        if (sol.forward.empty() || (both && sol.backward.empty())) return 1e6;
        const NearStop fwd = near_stop(sol.forward, sol.forward_stopped, false);
        double penalty = std::pow(fwd.residual_speed, task.p_exp);
        double cost;
        if (const auto* lt = std::get_if<LengthTarget>(&task.target)) {
            const NearStop bwd = near_stop(sol.backward, sol.backward_stopped, true);
            penalty += std::pow(bwd.residual_speed, task.p_exp);
            cost = cost_length(fwd.length + bwd.length, lt->length, task.p_exp);
        } else {
            const auto& pt = std::get<PointTarget>(task.target);
            const double d2 = (fwd.point.x - pt.x) * (fwd.point.x - pt.x) + (fwd.point.y - pt.y) * (fwd.point.y - pt.y);
            cost = std::pow(d2, task.p_exp);
        }
        return cost + task.optimizer.speed_penalty * penalty;
    } catch (const Error&) {
        return 1e6;
    }
}

}  // namespace detail

inline double default_fail_threshold(const ArcTask& task) noexcept {
    if (!std::isnan(task.optimizer.fail_threshold)) return task.optimizer.fail_threshold;
    return task.is_length() ? 1e-3 : std::numeric_limits<double>::infinity();
}

/// Optimizes the control parameters of one arc. Deterministic for a given
/// task. Throws OptimizationFailed if the best admissible arc misses the
/// failure threshold or never reaches zero speed at its ends.
inline ArcSolution optimize_arc(const ArcTask& task) {
    task.validate();
    // Trial solves end at control singularities rather than failing, so a
    // singular guess still has a finite cost to improve on.
    ArcTask probe = task;
    probe.integrator.stop_on_singular = true;
    auto objective = [&](const std::vector<double>& x) { return detail::arc_objective(probe, x); };

    const double f0 = objective(task.guess);
    double guess_cost = std::numeric_limits<double>::infinity();
    try {
        guess_cost = simulate_arc(probe, task.guess, task.is_length()).cost;
    } catch (const Error&) {
    }
    // The arc-locked family has a second basin with the mass turning the other
    // way, so the mirrored guess (A, -omega) is searched as well.
    std::vector<std::vector<double>> starts{task.guess};
    if (task.family == ControlFamily::circular_arc) starts.push_back({task.guess[0], -task.guess[1]});

    std::vector<double> best = task.guess;
    double best_f = f0;
    std::size_t evals = 0;
    for (const auto& x0 : starts) {
        const NelderMeadResult res = nelder_mead(objective, x0, task.optimizer.nelder_mead);
        evals += res.evals;
        if (res.f < best_f) {
            best_f = res.f;
            best = res.x;
        }
    }

    ArcSolution sol;
    try {
        sol = simulate_arc(probe, best, task.is_length());
    } catch (const Error& e) {
        throw OptimizationFailed("arc '" + task.name + "': " + e.what());
    }
    sol.initial_cost = guess_cost;
    sol.opt_params = best;
    sol.opt_error = sol.cost;
    sol.evaluations = evals;

    const bool need_backward = task.is_length();
    if (!sol.forward_stopped || (need_backward && !sol.backward_stopped)) {
        throw OptimizationFailed("arc '" + task.name + "': optimized arc does not reach zero speed at both ends");
    }
    const double threshold = default_fail_threshold(task);
    if (!(sol.cost <= threshold)) {
        throw OptimizationFailed("arc '" + task.name + "': cost " + std::to_string(sol.cost) +
                                 " above threshold " + std::to_string(threshold));
    }
    return sol;
}

/// p-th power L_p deviation between a traced trajectory and a target curve
/// given by arc length, over the shorter of the two lengths (composite
/// Simpson rule on `intervals` subintervals).
inline double deviation_Lp(const Trajectory& tr, const std::function<Point(double)>& target,
                           double target_length, double p, std::size_t intervals = 2000) {
    const double S = std::min(tr.length(), target_length);
    if (S <= 0.0) return 0.0;
    if (intervals % 2) ++intervals;
    std::vector<double> s(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i) s[i] = S * static_cast<double>(i) / static_cast<double>(intervals);
    const std::vector<Point> traced = resample(tr, s);
    const double h = S / static_cast<double>(intervals);
    double acc = 0.0;
    for (std::size_t i = 0; i <= intervals; ++i) {
        const Point d = target(s[i]);
        const double v = std::pow(std::abs(traced[i].x - d.x), p) + std::pow(std::abs(traced[i].y - d.y), p);
        const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * v;
    }
    return acc * h / 3.0;
}

/// Geometry checks on a traced arc.
struct ArcDiagnostics {
    CircleFit circle;
    double momentum_drift = 0.0;      ///< max |P(t) - P(0)| over both halves, P = p1 + r p2
    double momentum_reference = 0.0;  ///< |P(0)|
    double max_curvature_residual = 0.0;  ///< max |r xi1 - xi2| / max(1, |xi2|)
    double start_speed = 0.0;
    double end_speed = 0.0;
};

inline ArcDiagnostics diagnose_arc(const ArcSolution& sol, double r) {
    ArcDiagnostics d;
    const auto pts = points_of(sol.combined);
    if (pts.size() >= 3) d.circle = fit_circle(pts);
    if (sol.forward.empty()) return d;
    // Both halves start from the shared initial state.
    const SleighState& ref = sol.forward.states.front();
    const double P0 = ref.p1 + r * ref.p2;
    d.momentum_reference = std::abs(P0);
    auto scan = [&](const Trajectory& tr) {
        for (std::size_t i = 0; i < tr.size(); ++i) {
            d.momentum_drift = std::max(d.momentum_drift, std::abs(tr.states[i].p1 + r * tr.states[i].p2 - P0));
            const auto& w = tr.quasis[i];
            d.max_curvature_residual =
                std::max(d.max_curvature_residual, std::abs(r * w.xi1 - w.xi2) / std::max(1.0, std::abs(w.xi2)));
        }
    };
    scan(sol.forward);
    scan(sol.backward);
    if (!sol.combined.empty()) {
        d.start_speed = std::abs(sol.combined.quasis.front().xi2);
        d.end_speed = std::abs(sol.combined.quasis.back().xi2);
    }
    return d;
}

}  // namespace skate
