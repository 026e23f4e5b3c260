#pragma once

// Sleigh trajectories: time-ordered state samples with quasivelocities,
// control samples and cumulative arc length.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "skate/controls.hpp"
#include "skate/errors.hpp"
#include "skate/model.hpp"
#include "skate/ode.hpp"

namespace skate {

struct Point {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

/// Packed ODE state: p1, p2, theta, x, y, control coordinate, signed arc length.
using PackedState = std::array<double, 7>;

inline PackedState pack(const SleighState& s, double arclen = 0.0) noexcept {
    return {s.p1, s.p2, s.theta, s.x, s.y, s.control_coord.value_or(0.0), arclen};
}

inline SleighState unpack(const PackedState& y, bool has_coord) noexcept {
    SleighState s{y[0], y[1], y[2], y[3], y[4], std::nullopt};
    if (has_coord) s.control_coord = y[5];
    return s;
}

struct Trajectory {
    std::vector<double> times;
    std::vector<SleighState> states;
    std::vector<Quasivelocities> quasis;
    std::vector<ControlSample> controls;
    std::vector<double> arclen;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    [[nodiscard]] bool empty() const noexcept { return times.empty(); }
    [[nodiscard]] double length() const noexcept { return arclen.empty() ? 0.0 : arclen.back(); }
    [[nodiscard]] Point point(std::size_t i) const noexcept { return {states[i].x, states[i].y}; }
    [[nodiscard]] bool backward() const noexcept {
        return times.size() >= 2 && times.back() < times.front();
    }

    void push_back(double t, const SleighState& s, const Quasivelocities& q, const ControlSample& c,
                   double s_len) {
        times.push_back(t);
        states.push_back(s);
        quasis.push_back(q);
        controls.push_back(c);
        arclen.push_back(s_len);
    }
};

/// Builds a trajectory from a packed solution, re-evaluating the control law
/// at each sample.
inline Trajectory make_trajectory(const OdeSolution<7>& sol, const ControlLaw& law,
                                  const SleighParams& q) {
    Trajectory tr;
    const bool coord = law.has_coordinate();
    const double s0 = sol.states.empty() ? 0.0 : sol.states.front()[6];
    for (std::size_t i = 0; i < sol.times.size(); ++i) {
        const SleighState s = unpack(sol.states[i], coord);
        const ControlSample c = law.sample(sol.times[i], s);
        tr.push_back(sol.times[i], s, quasivelocities(s, c, q), c, std::abs(sol.states[i][6] - s0));
    }
    return tr;
}

/// Arc length recomputed from the first sample, as a running sum of |dS|.
inline void recompute_arclen_from_start(Trajectory& tr, std::span<const double> raw) {
    if (tr.empty()) return;
    tr.arclen.assign(tr.size(), 0.0);
    for (std::size_t i = 1; i < tr.size(); ++i)
        tr.arclen[i] = tr.arclen[i - 1] + std::abs(raw[i] - raw[i - 1]);
}

/// Reorders a backward-in-time trajectory so time ascends; arc length is
/// measured from the new first sample. Forward trajectories are returned
/// unchanged.
inline Trajectory reverse_normalize(const Trajectory& tr) {
    if (!tr.backward()) return tr;
    Trajectory out = tr;
    std::reverse(out.times.begin(), out.times.end());
    std::reverse(out.states.begin(), out.states.end());
    std::reverse(out.quasis.begin(), out.quasis.end());
    std::reverse(out.controls.begin(), out.controls.end());
    std::vector<double> raw = tr.arclen;
    std::reverse(raw.begin(), raw.end());
    recompute_arclen_from_start(out, raw);
    return out;
}

/// Points at the requested arc lengths, linearly interpolated between
/// samples along the cumulative arc length.
inline std::vector<Point> resample(const Trajectory& tr, std::span<const double> s_values) {
    std::vector<Point> out;
    out.reserve(s_values.size());
    if (tr.empty()) {
        if (!s_values.empty()) throw OutOfRange("resample: empty trajectory");
        return out;
    }
    const double total = tr.length();
    const double slack = 1e-12 * std::max(1.0, total);
    for (double s : s_values) {
        if (!(s >= -slack && s <= total + slack)) {
            throw OutOfRange("resample: arc length " + std::to_string(s) + " outside [0, " +
                             std::to_string(total) + "]");
        }
        s = std::clamp(s, 0.0, total);
        const auto it = std::lower_bound(tr.arclen.begin(), tr.arclen.end(), s);
        std::size_t j = static_cast<std::size_t>(it - tr.arclen.begin());
        if (j == 0) {
            out.push_back(tr.point(0));
            continue;
        }
        if (j >= tr.size()) j = tr.size() - 1;
        const double s0 = tr.arclen[j - 1], s1 = tr.arclen[j];
        const double w = s1 > s0 ? (s - s0) / (s1 - s0) : 1.0;
        const Point a = tr.point(j - 1), b = tr.point(j);
        if (w >= 1.0) out.push_back(b);
        else out.push_back({a.x + w * (b.x - a.x), a.y + w * (b.y - a.y)});
    }
    return out;
}

/// Joins a time-ascending backward half (ending at the shared initial state)
/// and a forward half (starting there) into one trajectory. The duplicate
/// junction sample is dropped; arc length continues across the junction.
inline Trajectory concatenate(const Trajectory& first, const Trajectory& second) {
    Trajectory out = first;
    const double offset = out.length();
    const std::size_t skip = (!first.empty() && !second.empty() && first.times.back() == second.times.front())
                                 ? 1
                                 : 0;
    for (std::size_t i = skip; i < second.size(); ++i) {
        out.push_back(second.times[i], second.states[i], second.quasis[i], second.controls[i],
                      offset + second.arclen[i]);
    }
    return out;
}

}  // namespace skate
