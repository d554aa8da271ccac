#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "cloudopt/problem.hpp"

namespace cloudopt {

// Geometry of the sampling regions.
//   VLevel (default): the sets are V-sublevel sets — the gamma1 ball is
//     {V <= eps/2} (radius sqrt(eps/2)) and the gamma2 annulus is
//     {eps/2 <= V <= R} (radii sqrt(eps/2)..sqrt(R)).
//   Radius: the same thresholds are read as Euclidean radii — ball radius
//     eps/2, annulus radii eps/2..max(eps, sqrt(R)). Exposed for calibration
//     experiments; see the bundled docs for measured differences.
enum class RegionGeometry { VLevel, Radius };

struct StepsizeOptions {
    double safety_factor = 0.85;
    bool clip_mu = true;  // restrict sampling to the mu >= 0 orthant slice
    RegionGeometry geometry = RegionGeometry::VLevel;
};

// Signals a nonpositive gamma2 ratio sample: the directional-decrease
// precondition failed, which indicates a non-convex problem or a wrong
// reference saddle rather than an estimator fault.
struct StepsizeError : std::runtime_error {
    explicit StepsizeError(const std::string& msg) : std::runtime_error(msg) {}
};

// min over sampled z in the ball around the saddle of
//   sqrt( (eps/2) / (||dL/dx||^2 + ||dL/dmu||^2) ).
// Sampling minima over-estimate the true infimum; apply the safety factor
// before using the result as a stepsize.
double estimate_gamma1(const Problem& p, const PrimalDualPoint& saddle, double epsilon,
                       long n_samples, std::uint64_t seed, const StepsizeOptions& opts = {});

// min over sampled z in the annulus of
//   ( -(x_hat-x)^T dL/dx + (mu_hat-mu)^T dL/dmu ) / (||dL/dx||^2 + ||dL/dmu||^2).
// R is the outer V-level, typically max{eps, V(z0)}. Every sampled ratio must
// be positive; a nonpositive sample throws StepsizeError.
double estimate_gamma2(const Problem& p, const PrimalDualPoint& saddle, double epsilon, double R,
                       long n_samples, std::uint64_t seed, const StepsizeOptions& opts = {});

struct StepsizeReport {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double rho_max = 0.0;          // min{gamma1, gamma2}
    double rho_recommended = 0.0;  // safety_factor * rho_max
    long samples_used = 0;
    double R = 0.0;
    double epsilon = 0.0;
};

// Assembles a report from already-computed estimates; validates positivity.
StepsizeReport recommend_rho(double gamma1, double gamma2, double safety_factor, long samples_used,
                             double R, double epsilon);

// Convenience pipeline: R = max{epsilon, V(z0)}, both estimates with the same
// seed, then recommend_rho.
StepsizeReport estimate_stepsize(const Problem& p, const PrimalDualPoint& saddle,
                                 const PrimalDualPoint& z0, double epsilon, long n_samples,
                                 std::uint64_t seed, const StepsizeOptions& opts = {});

}  // namespace cloudopt
