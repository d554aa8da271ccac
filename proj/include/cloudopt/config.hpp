#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cloudopt/analysis.hpp"
#include "cloudopt/problem.hpp"
#include "cloudopt/stepsize.hpp"

namespace cloudopt {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct StepsizeSettings {
    long n_samples = 1'000'000;
    double safety_factor = 0.85;
    bool clip_mu = true;
    RegionGeometry geometry = RegionGeometry::VLevel;
};

struct SolverSettings {
    std::optional<double> rho;  // defaults to the run stepsize when numeric
    long max_steps = 1'000'000;
    double fixed_point_tol = 1e-12;
};

struct OutputSettings {
    std::string trace;    // CSV trace path ("" = skip)
    std::string summary;  // run summary JSON path ("" = skip)
    std::string report;   // stepsize report JSON path ("" = skip)
};

struct RunConfig {
    int n_agents = 0;
    std::vector<std::string> objectives;   // expression texts, objective i over x{i+1} only
    std::vector<std::string> constraints;  // expression texts over any declared variable
    std::vector<double> x0;
    std::vector<double> mu0;
    double rho = 0.0;
    bool rho_auto = false;  // "rho": "auto" — derive rho from the stepsize estimator
    double epsilon = 0.0;
    long total_timesteps = 0;
    bool privacy = false;
    std::uint64_t seed = 0;
    BallConvention ball_convention = BallConvention::Norm;
    std::optional<PrimalDualPoint> reference_saddle;
    StepsizeSettings stepsize;
    SolverSettings solver;
    OutputSettings output;
};

// Loads and validates a JSON run configuration. Dimension mismatches,
// negative multipliers, malformed expressions, and objectives referencing a
// foreign variable are all reported as ConfigError with field context.
RunConfig load_config(const std::string& path);

// Same validation applied to an in-memory JSON text (context names the source
// in error messages).
RunConfig parse_config_text(const std::string& json_text, const std::string& context);

// Parses the configured expressions into a Problem (revalidates the
// per-objective variable restriction via the Problem constructor).
Problem build_problem(const RunConfig& cfg);

const char* ball_convention_name(BallConvention conv);
const char* region_geometry_name(RegionGeometry g);

}  // namespace cloudopt
