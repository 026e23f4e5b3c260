#pragma once

// Adaptive Dormand-Prince 5(4) integrator with dense output and a terminal
// zero-crossing event. Works in either time direction: t1 < t0 integrates
// backward with negative steps.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "skate/errors.hpp"

namespace skate {

struct IntegratorConfig {
    double rel_tol = 1e-9;
    double abs_tol = 1e-11;
    double max_step = std::numeric_limits<double>::infinity();
    double event_tol = 1e-8;
    /// If positive, dense-output samples are inserted so consecutive output
    /// times are at most this far apart.
    double output_interval = 0.0;
    std::size_t max_steps = 1'000'000;
    /// When the right-hand side raises SingularControl, or the step size
    /// collapses approaching such a point, end the solve at the last accepted
    /// step (flagged in the solution) instead of propagating.
    bool stop_on_singular = false;

    [[nodiscard]] bool valid() const noexcept {
        return rel_tol > 0 && abs_tol > 0 && max_step > 0 && event_tol > 0;
    }
};

template <std::size_t N>
struct OdeSolution {
    using State = std::array<double, N>;
    std::vector<double> times;
    std::vector<State> states;
    bool event_hit = false;
    bool singular_hit = false;  ///< ended early at a control singularity
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct Dopri {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // error = 5th - 4th order weights
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    // dense output (Hairer's continuous extension)
    static constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                            d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                            d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
};

template <std::size_t N>
bool all_finite(const std::array<double, N>& y) noexcept {
    return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

/// Continuous extension of one accepted step on [t, t + h].
template <std::size_t N>
struct DenseStep {
    double t = 0.0;
    double h = 0.0;
    std::array<std::array<double, N>, 5> r{};

    [[nodiscard]] std::array<double, N> operator()(double tt) const noexcept {
        const double th = (tt - t) / h;
        const double th1 = 1.0 - th;
        std::array<double, N> y{};
        for (std::size_t i = 0; i < N; ++i)
            y[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        return y;
    }
};

}  // namespace detail

/// Integrates y' = rhs(t, y) from t0 to t1. When `event` is given, the solve
/// stops at the first interior zero crossing of event(t, y); the crossing time
/// is refined on the dense output until |event| <= cfg.event_tol. If the event
/// is already within event_tol at t0, crossings during the first accepted step
/// are ignored (trajectories may start at the event surface).
template <std::size_t N, typename Rhs>
OdeSolution<N> integrate(Rhs&& rhs, const std::array<double, N>& y0, double t0, double t1,
                         const IntegratorConfig& cfg,
                         const std::function<double(double, const std::array<double, N>&)>& event = {}) {
    using State = std::array<double, N>;
    using D = detail::Dopri;

    if (t0 == t1) throw OutOfRange("integrate: empty time span");
    if (!cfg.valid()) throw OutOfRange("integrate: invalid integrator configuration");

    const double dir = t1 > t0 ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);

    auto eval = [&](double t, const State& y) {
        State f = rhs(t, y);
        if (!detail::all_finite(f)) {
            std::ostringstream os;
            os << "right-hand side is not finite at t=" << t;
            throw NonFiniteState(os.str());
        }
        return f;
    };

    auto norm = [&](const State& err, const State& ya, const State& yb) {
        double acc = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(ya[i]), std::abs(yb[i]));
            acc += (err[i] / sc) * (err[i] / sc);
        }
        return std::sqrt(acc / static_cast<double>(N));
    };

    OdeSolution<N> out;
    if (!detail::all_finite(y0)) throw NonFiniteState("integrate: initial state is not finite");
    out.times.push_back(t0);
    out.states.push_back(y0);

    double t = t0;
    State y = y0;
    State k1 = eval(t, y);

    // Initial step (Hairer & Wanner II.4).
    double h;
    {
        State sc{};
        for (std::size_t i = 0; i < N; ++i) sc[i] = cfg.abs_tol + cfg.rel_tol * std::abs(y[i]);
        double d0 = 0, d1 = 0;
        for (std::size_t i = 0; i < N; ++i) {
            d0 += (y[i] / sc[i]) * (y[i] / sc[i]);
            d1 += (k1[i] / sc[i]) * (k1[i] / sc[i]);
        }
        d0 = std::sqrt(d0 / N);
        d1 = std::sqrt(d1 / N);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min({h0, span, cfg.max_step});
        State y1{};
        for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + dir * h0 * k1[i];
        const State f1 = eval(t + dir * h0, y1);
        double d2 = 0;
        for (std::size_t i = 0; i < N; ++i) d2 += ((f1[i] - k1[i]) / sc[i]) * ((f1[i] - k1[i]) / sc[i]);
        d2 = std::sqrt(d2 / N) / h0;
        const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                    : std::pow(0.01 / std::max(d1, d2), 0.2);
        h = std::min({100 * h0, h1, span, cfg.max_step});
    }

    std::optional<double> g_prev;
    bool grace = false;
    if (event) {
        g_prev = event(t, y);
        grace = std::abs(*g_prev) <= cfg.event_tol;
    }

    auto emit_dense = [&](const detail::DenseStep<N>& dense, double t_end) {
        if (cfg.output_interval <= 0.0) return;
        const double t_last = out.times.back();
        const int n = static_cast<int>(std::floor(std::abs(t_end - t_last) / cfg.output_interval));
        for (int j = 1; j <= n; ++j) {
            const double tt = t_last + dir * j * cfg.output_interval;
            if (dir * (t_end - tt) <= 1e-12 * std::max(1.0, std::abs(tt))) break;
            out.times.push_back(tt);
            out.states.push_back(dense(tt));
        }
    };

    const double eps = std::numeric_limits<double>::epsilon();
    double err_prev = 1e-4;
    bool last_rejected = false;
    try {
        for (std::size_t step = 0; step < cfg.max_steps; ++step) {
            const double remaining = std::abs(t1 - t);
            if (remaining <= 0.0) break;
            if (h >= remaining) h = remaining;
            if (h < 16 * eps * std::max(1.0, std::abs(t))) {
                std::ostringstream os;
                os << "step size underflow at t=" << t << " (h=" << h << ")";
                throw StepSizeUnderflow(os.str());
            }
            const double hs = dir * h;

            State yt, k2, k3, k4, k5, k6, k7, ynew;
            for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * D::a21 * k1[i];
            k2 = eval(t + D::c2 * hs, yt);
            for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * (D::a31 * k1[i] + D::a32 * k2[i]);
            k3 = eval(t + D::c3 * hs, yt);
            for (std::size_t i = 0; i < N; ++i)
                yt[i] = y[i] + hs * (D::a41 * k1[i] + D::a42 * k2[i] + D::a43 * k3[i]);
            k4 = eval(t + D::c4 * hs, yt);
            for (std::size_t i = 0; i < N; ++i)
                yt[i] = y[i] + hs * (D::a51 * k1[i] + D::a52 * k2[i] + D::a53 * k3[i] + D::a54 * k4[i]);
            k5 = eval(t + D::c5 * hs, yt);
            for (std::size_t i = 0; i < N; ++i)
                yt[i] = y[i] + hs * (D::a61 * k1[i] + D::a62 * k2[i] + D::a63 * k3[i] + D::a64 * k4[i] +
                                     D::a65 * k5[i]);
            const double t_new = (h == remaining) ? t1 : t + hs;
            k6 = eval(t_new, yt);
            for (std::size_t i = 0; i < N; ++i)
                ynew[i] = y[i] + hs * (D::b1 * k1[i] + D::b3 * k3[i] + D::b4 * k4[i] + D::b5 * k5[i] +
                                       D::b6 * k6[i]);
            k7 = eval(t_new, ynew);

            State err{};
            for (std::size_t i = 0; i < N; ++i)
                err[i] = hs * (D::e1 * k1[i] + D::e3 * k3[i] + D::e4 * k4[i] + D::e5 * k5[i] +
                               D::e6 * k6[i] + D::e7 * k7[i]);
            const double en = norm(err, y, ynew);

            if (!(en <= 1.0)) {
                ++out.rejected_steps;
                const double fac = std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.2;
                h *= std::min(1.0, fac);
                last_rejected = true;
                continue;
            }
            ++out.accepted_steps;

            detail::DenseStep<N> dense;
            dense.t = t;
            dense.h = hs;
            for (std::size_t i = 0; i < N; ++i) {
                const double dy = ynew[i] - y[i];
                const double bspl = hs * k1[i] - dy;
                dense.r[0][i] = y[i];
                dense.r[1][i] = dy;
                dense.r[2][i] = bspl;
                dense.r[3][i] = dy - hs * k7[i] - bspl;
                dense.r[4][i] = hs * (D::d1 * k1[i] + D::d3 * k3[i] + D::d4 * k4[i] + D::d5 * k5[i] +
                                      D::d6 * k6[i] + D::d7 * k7[i]);
            }

            if (event) {
                const double g_new = event(t_new, ynew);
                const bool crossed = (*g_prev > 0 && g_new <= 0) || (*g_prev < 0 && g_new >= 0);
                if (crossed && !grace) {
                    // Illinois-modified regula falsi on the dense output.
                    double ta = t, tb = t_new, ga = *g_prev, gb = g_new;
                    double tr = tb;
                    State yr = ynew;
                    double gr = gb;
                    int side = 0;
                    for (int it = 0; it < 200; ++it) {
                        tr = (std::abs(gb - ga) > 0) ? (ta * gb - tb * ga) / (gb - ga) : 0.5 * (ta + tb);
                        if (!(dir * (tr - ta) > 0 && dir * (tb - tr) > 0)) tr = 0.5 * (ta + tb);
                        yr = dense(tr);
                        gr = event(tr, yr);
                        if (std::abs(gr) <= cfg.event_tol &&
                            std::abs(tb - ta) <= 1e3 * eps * std::max(1.0, std::abs(tr)) + 1e-10)
                            break;
                        if (std::abs(gr) <= 0.01 * cfg.event_tol) break;
                        if ((gr > 0) == (gb > 0)) {
                            tb = tr;
                            gb = gr;
                            if (side == 1) ga *= 0.5;
                            side = 1;
                        } else {
                            ta = tr;
                            ga = gr;
                            if (side == -1) gb *= 0.5;
                            side = -1;
                        }
                    }
                    emit_dense(dense, tr);
                    out.times.push_back(tr);
                    out.states.push_back(yr);
                    out.event_hit = true;
                    return out;
                }
                g_prev = g_new;
                grace = false;
            }

            emit_dense(dense, t_new);
            t = t_new;
            y = ynew;
            k1 = k7;
            out.times.push_back(t);
            out.states.push_back(y);
            if (t == t1) break;

            // PI step control.
            const double en_c = std::max(en, 1e-10);
            double fac = 0.9 * std::pow(en_c, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
            fac = std::clamp(fac, 0.2, 10.0);
            if (last_rejected) fac = std::min(fac, 1.0);
            err_prev = en_c;
            last_rejected = false;
            h = std::min(h * fac, cfg.max_step);
        }
    } catch (const SingularControl&) {
        if (!cfg.stop_on_singular) throw;
        out.singular_hit = true;
        return out;
    } catch (const StepSizeUnderflow&) {
        if (!cfg.stop_on_singular) throw;
        out.singular_hit = true;
        return out;
    }
    if (out.times.back() != t1 && !out.event_hit) {
        throw StepSizeUnderflow("integrate: exceeded maximum number of steps");
    }
    return out;
}

}  // namespace skate
