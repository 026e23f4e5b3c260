#pragma once

// Nelder-Mead simplex minimizer (adaptive coefficients of Gao & Han for
// dimensions above two), deterministic and derivative-free.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace skate {

struct NelderMeadOptions {
    double initial_rel_step = 0.1;   ///< vertex offset relative to |x_i|
    double initial_abs_step = 0.05;  ///< used when x_i == 0
    double x_tol = 1e-10;
    double f_tol = 1e-16;
    double f_target = -std::numeric_limits<double>::infinity();  ///< stop once f <= target
    std::size_t max_evals = 2000;
    std::size_t restarts = 2;  ///< re-seed the simplex around the best point on convergence
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = 0.0;
    std::size_t evals = 0;
    std::size_t iterations = 0;
    bool converged = false;
};

inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, const NelderMeadOptions& opt = {}) {
    const std::size_t n = x0.size();
    const double dn = static_cast<double>(std::max<std::size_t>(n, 1));
    const double alpha = 1.0;
    const double gamma = n > 2 ? 1.0 + 2.0 / dn : 2.0;
    const double rho = n > 2 ? 0.75 - 1.0 / (2.0 * dn) : 0.5;
    const double sigma = n > 2 ? 1.0 - 1.0 / dn : 0.5;

    NelderMeadResult res;
    auto feval = [&](const std::vector<double>& x) {
        ++res.evals;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::max();
    };

    res.x = x0;
    res.f = feval(x0);
    if (n == 0) {
        res.converged = true;
        return res;
    }

    for (std::size_t round = 0; round <= opt.restarts; ++round) {
        std::vector<std::vector<double>> simplex(n + 1, res.x);
        std::vector<double> fv(n + 1, res.f);
        for (std::size_t i = 0; i < n; ++i) {
            const double xi = simplex[i + 1][i];
            simplex[i + 1][i] = xi != 0.0 ? xi * (1.0 + opt.initial_rel_step) : opt.initial_abs_step;
            fv[i + 1] = feval(simplex[i + 1]);
        }

        std::vector<std::size_t> order(n + 1);
        bool converged = false;
        while (res.evals < opt.max_evals) {
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
            {
                std::vector<std::vector<double>> s2;
                std::vector<double> f2;
                for (auto k : order) {
                    s2.push_back(simplex[k]);
                    f2.push_back(fv[k]);
                }
                simplex.swap(s2);
                fv.swap(f2);
            }
            ++res.iterations;

            double xspread = 0.0;
            for (std::size_t k = 1; k <= n; ++k)
                for (std::size_t i = 0; i < n; ++i)
                    xspread = std::max(xspread, std::abs(simplex[k][i] - simplex[0][i]));
            const double fspread = fv[n] - fv[0];
            if (fv[0] <= opt.f_target || (xspread <= opt.x_tol && fspread <= opt.f_tol) || xspread <= opt.x_tol * 1e-3) {
                converged = true;
                break;
            }

            std::vector<double> centroid(n, 0.0);
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[k][i] / dn;

            auto along = [&](double coef) {
                std::vector<double> x(n);
                for (std::size_t i = 0; i < n; ++i) x[i] = centroid[i] + coef * (simplex[n][i] - centroid[i]);
                return x;
            };

            const auto xr = along(-alpha);
            const double fr = feval(xr);
            if (fr < fv[0]) {
                const auto xe = along(-alpha * gamma);
                const double fe = feval(xe);
                if (fe < fr) {
                    simplex[n] = xe;
                    fv[n] = fe;
                } else {
                    simplex[n] = xr;
                    fv[n] = fr;
                }
                continue;
            }
            if (fr < fv[n - 1]) {
                simplex[n] = xr;
                fv[n] = fr;
                continue;
            }
            const bool outside = fr < fv[n];
            const auto xc = along(outside ? -alpha * rho : rho);
            const double fc = feval(xc);
            if (fc < (outside ? fr : fv[n])) {
                simplex[n] = xc;
                fv[n] = fc;
                continue;
            }
            for (std::size_t k = 1; k <= n; ++k) {
                for (std::size_t i = 0; i < n; ++i)
                    simplex[k][i] = simplex[0][i] + sigma * (simplex[k][i] - simplex[0][i]);
                fv[k] = feval(simplex[k]);
            }
        }

        const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
        const bool improved = fv[best] < res.f;
        if (fv[best] <= res.f) {
            res.x = simplex[best];
            res.f = fv[best];
        }
        res.converged = converged;
        if (!converged || res.f <= opt.f_target || res.evals >= opt.max_evals) break;
        if (!improved && round > 0) break;
    }
    return res;
}

}  // namespace skate
