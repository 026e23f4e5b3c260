// Traces one circular arc from the first row of the main-text table and
// prints the optimized control and the checks that make it a circle.

#include <cstdio>

#include "skate/skate.hpp"

int main() {
    skate::ArcTask task;
    task.name = "arc1";
    task.T = 6.0;
    task.r = 1.2;
    task.target = skate::LengthTarget{1.1 * 1.2 * skate::kPi};
    task.init = {2.0, 3.0, 0.0, 0.0, -1.2, std::nullopt};
    task.guess = {1.0, 1.0};

    const skate::ArcSolution sol = skate::optimize_arc(task);
    const skate::ArcDiagnostics d = skate::diagnose_arc(sol, task.r);

    std::printf("A = %.6f  omega = %.6f  (%zu cost evaluations)\n", sol.opt_params[0], sol.opt_params[1],
                sol.evaluations);
    std::printf("length %.10f (target %.10f), cost %.3e\n", sol.length, 1.1 * 1.2 * skate::kPi, sol.cost);
    std::printf("fitted circle r = %.10f, max radial residual %.2e\n", d.circle.radius, d.circle.max_residual);
    std::printf("p1 + r p2 drift %.2e, end speeds %.1e / %.1e\n", d.momentum_drift, d.start_speed, d.end_speed);
    return 0;
}
