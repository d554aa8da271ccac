#pragma once

#include <optional>
#include <vector>

#include "cloudopt/problem.hpp"

namespace cloudopt {

// Two readings of "inside the epsilon-ball" coexist in the underlying
// analysis: the ball of radius epsilon (V <= epsilon^2, `Norm`) and the
// V-sublevel set of height epsilon (V <= epsilon, `VLevel`). Both are
// supported; reports state which one produced a given count.
enum class BallConvention { Norm, VLevel };

// The V-value at the ball boundary under the chosen convention.
double ball_threshold(double epsilon, BallConvention conv);

// V(z) = ||x - x_hat||^2 + ||mu - mu_hat||^2
double lyapunov(const PrimalDualPoint& pt, const PrimalDualPoint& saddle);

// Region thresholds follow the decrease analysis directly in V units:
// HalfBall is {V <= eps/2}, Annulus is {eps/2 <= V <= R}, Outside is {V > R}.
enum class Region { HalfBall, Annulus, Outside };

struct StepVerdict {
    Region region;
    bool pass;  // Annulus: dV < 0 required; HalfBall: dV <= eps/2; Outside: always a failure flag
};

StepVerdict classify_step(double V_k, double V_next, double epsilon, double R);

// One synchronized step (an Update-phase boundary, every 3rd timestep).
struct SyncRecord {
    long step = 0;
    long timestep = 0;
    double V = 0.0;
    double dV = 0.0;  // V[k+1] - V[k]; NaN on the last record
    bool in_eps_ball = false;
    bool in_half_ball = false;  // V <= eps/2
};

struct ConvergenceTrace {
    std::vector<SyncRecord> records;
    double epsilon = 0.0;
    double R = 0.0;  // max{epsilon, V(first record)}
    BallConvention convention = BallConvention::Norm;
    std::optional<long> entry_step;  // first record with in_eps_ball
};

ConvergenceTrace build_convergence_trace(const std::vector<PrimalDualPoint>& sync_points,
                                         const PrimalDualPoint& saddle, double epsilon,
                                         BallConvention conv);

struct EntryPoint {
    long step;
    long timestep;
};

// First synchronized step inside the epsilon-ball, measured against
// `epsilon` under the trace's convention.
std::optional<EntryPoint> detect_entry(const ConvergenceTrace& trace, double epsilon);

// One-step V change predicted from the gradient fields at `pt` alone:
//   dV = -rho * [ 2(-(x_hat-x)^T d_x + (mu_hat-mu)^T d_mu) - rho(||d_x||^2 + ||d_mu||^2) ]
// with d_x = grad_x(pt) and d_mu the effective (projected) dual step
// direction (max{0, mu + rho g(x)} - mu)/rho, which equals g(x) whenever the
// nonnegativity clamp is inactive. Using the projected direction makes the
// expansion an exact algebraic identity for the implemented update, so this
// cross-checks the simulator's arithmetic independently of the trace.
double delta_v_closed_form(const Problem& p, const PrimalDualPoint& pt,
                           const PrimalDualPoint& saddle, double rho);

}  // namespace cloudopt
