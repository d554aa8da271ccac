#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "cloudopt/problem.hpp"

namespace cloudopt {

struct UzawaConfig {
    double rho = 1e-3;            // stepsize, > 0
    long max_steps = 1'000'000;
    double fixed_point_tol = 0.0;  // terminate when iterate displacement <= tol
};

// Thrown when an iterate goes non-finite. `step` is the 0-based index of the
// offending step, or -1 when the step is not known to the thrower.
struct DivergenceError : std::runtime_error {
    explicit DivergenceError(const std::string& msg, long step_index = -1)
        : std::runtime_error(msg), step(step_index) {}
    long step;
};

// Componentwise max{0, v_j}: projection onto the nonnegative orthant.
std::vector<double> project_nonneg(std::vector<double> v);

// One simultaneous primal-dual step:
//   x'  = x - rho * grad_x(p, pt)
//   mu' = max{0, mu + rho * g(x)}
// Both updates read only the old point.
PrimalDualPoint uzawa_step(const Problem& p, const PrimalDualPoint& pt, double rho);

struct SolveResult {
    PrimalDualPoint point;
    long steps_taken = 0;
    bool converged = false;  // displacement reached fixed_point_tol before max_steps
};

// Iterates uzawa_step from `init` until the step displacement (Euclidean norm
// over the stacked (x, mu) delta) drops to cfg.fixed_point_tol or max_steps is
// reached. Serves as the reference saddle-point oracle.
SolveResult solve_saddle(const Problem& p, const PrimalDualPoint& init, const UzawaConfig& cfg);

}  // namespace cloudopt
