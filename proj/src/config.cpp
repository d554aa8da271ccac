#include "cloudopt/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cloudopt {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& context, const std::string& msg) {
    throw ConfigError(context + ": " + msg);
}

template <typename T>
T require(const json& j, const std::string& context, const std::string& key) {
    if (!j.contains(key)) fail(context, "missing required field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(context, "field '" + key + "': " + e.what());
    }
}

template <typename T>
T optional_field(const json& j, const std::string& context, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(context, "field '" + key + "': " + e.what());
    }
}

BallConvention parse_convention(const std::string& s, const std::string& context) {
    if (s == "norm") return BallConvention::Norm;
    if (s == "vlevel") return BallConvention::VLevel;
    fail(context, "ball_convention must be \"norm\" or \"vlevel\", got \"" + s + "\"");
}

RegionGeometry parse_geometry(const std::string& s, const std::string& context) {
    if (s == "vlevel") return RegionGeometry::VLevel;
    if (s == "radius") return RegionGeometry::Radius;
    fail(context, "stepsize.geometry must be \"vlevel\" or \"radius\", got \"" + s + "\"");
}

RunConfig parse_config(const json& j, const std::string& context) {
    if (!j.is_object()) fail(context, "top-level JSON value must be an object");
    RunConfig cfg;
    cfg.n_agents = require<int>(j, context, "n_agents");
    if (cfg.n_agents < 1) fail(context, "n_agents must be positive");
    cfg.objectives = require<std::vector<std::string>>(j, context, "objectives");
    cfg.constraints = optional_field<std::vector<std::string>>(j, context, "constraints", {});
    if (static_cast<int>(cfg.objectives.size()) != cfg.n_agents) {
        fail(context, "expected " + std::to_string(cfg.n_agents) + " objectives, got " +
                          std::to_string(cfg.objectives.size()));
    }

    cfg.x0 = require<std::vector<double>>(j, context, "x0");
    cfg.mu0 = require<std::vector<double>>(j, context, "mu0");
    if (static_cast<int>(cfg.x0.size()) != cfg.n_agents) {
        fail(context, "x0 has size " + std::to_string(cfg.x0.size()) + ", expected " +
                          std::to_string(cfg.n_agents));
    }
    if (cfg.mu0.size() != cfg.constraints.size()) {
        fail(context, "mu0 has size " + std::to_string(cfg.mu0.size()) + ", expected " +
                          std::to_string(cfg.constraints.size()));
    }
    for (double v : cfg.mu0) {
        if (v < 0.0) fail(context, "mu0 must be componentwise nonnegative");
    }

    if (!j.contains("rho")) fail(context, "missing required field 'rho'");
    const json& rho_field = j.at("rho");
    if (rho_field.is_string()) {
        if (rho_field.get<std::string>() != "auto") {
            fail(context, "rho must be a positive number or \"auto\"");
        }
        cfg.rho_auto = true;
    } else if (rho_field.is_number()) {
        cfg.rho = rho_field.get<double>();
        if (!(cfg.rho > 0.0)) fail(context, "rho must be positive");
    } else {
        fail(context, "rho must be a positive number or \"auto\"");
    }

    cfg.epsilon = require<double>(j, context, "epsilon");
    if (!(cfg.epsilon > 0.0)) fail(context, "epsilon must be positive");
    cfg.total_timesteps = require<long>(j, context, "total_timesteps");
    if (cfg.total_timesteps < 0) fail(context, "total_timesteps must be nonnegative");
    cfg.privacy = optional_field<bool>(j, context, "privacy", false);
    cfg.seed = optional_field<std::uint64_t>(j, context, "seed", 0);
    cfg.ball_convention =
        parse_convention(optional_field<std::string>(j, context, "ball_convention", "norm"), context);

    if (j.contains("reference_saddle")) {
        const json& rs = j.at("reference_saddle");
        PrimalDualPoint saddle;
        saddle.x = require<std::vector<double>>(rs, context + ".reference_saddle", "x");
        saddle.mu = require<std::vector<double>>(rs, context + ".reference_saddle", "mu");
        if (static_cast<int>(saddle.x.size()) != cfg.n_agents ||
            saddle.mu.size() != cfg.constraints.size()) {
            fail(context, "reference_saddle dimensions do not match the problem");
        }
        cfg.reference_saddle = std::move(saddle);
    }

    if (j.contains("stepsize")) {
        const json& s = j.at("stepsize");
        const std::string ctx = context + ".stepsize";
        cfg.stepsize.n_samples = optional_field<long>(s, ctx, "n_samples", cfg.stepsize.n_samples);
        if (cfg.stepsize.n_samples < 1) fail(ctx, "n_samples must be at least 1");
        cfg.stepsize.safety_factor =
            optional_field<double>(s, ctx, "safety_factor", cfg.stepsize.safety_factor);
        if (!(cfg.stepsize.safety_factor > 0.0) || cfg.stepsize.safety_factor > 1.0) {
            fail(ctx, "safety_factor must lie in (0, 1]");
        }
        cfg.stepsize.clip_mu = optional_field<bool>(s, ctx, "clip_mu", cfg.stepsize.clip_mu);
        cfg.stepsize.geometry =
            parse_geometry(optional_field<std::string>(s, ctx, "geometry", "vlevel"), ctx);
    }

    if (j.contains("solver")) {
        const json& s = j.at("solver");
        const std::string ctx = context + ".solver";
        if (s.contains("rho")) {
            cfg.solver.rho = require<double>(s, ctx, "rho");
            if (!(*cfg.solver.rho > 0.0)) fail(ctx, "rho must be positive");
        }
        cfg.solver.max_steps = optional_field<long>(s, ctx, "max_steps", cfg.solver.max_steps);
        if (cfg.solver.max_steps < 0) fail(ctx, "max_steps must be nonnegative");
        cfg.solver.fixed_point_tol =
            optional_field<double>(s, ctx, "fixed_point_tol", cfg.solver.fixed_point_tol);
        if (cfg.solver.fixed_point_tol < 0.0) fail(ctx, "fixed_point_tol must be nonnegative");
    }

    if (j.contains("output")) {
        const json& o = j.at("output");
        const std::string ctx = context + ".output";
        cfg.output.trace = optional_field<std::string>(o, ctx, "trace", "");
        cfg.output.summary = optional_field<std::string>(o, ctx, "summary", "");
        cfg.output.report = optional_field<std::string>(o, ctx, "report", "");
    }

    // Surface expression problems (syntax errors, foreign variables) at load
    // time with field context rather than at first use.
    try {
        build_problem(cfg);
    } catch (const ParseError& e) {
        fail(context, e.what());
    } catch (const ProblemError& e) {
        fail(context, e.what());
    }
    return cfg;
}

}  // namespace

RunConfig parse_config_text(const std::string& json_text, const std::string& context) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(context + ": " + e.what());
    }
    return parse_config(j, context);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

Problem build_problem(const RunConfig& cfg) {
    std::vector<std::string> names;
    names.reserve(cfg.n_agents);
    for (int i = 0; i < cfg.n_agents; ++i) names.push_back(Problem::var_name(i));

    std::vector<ExprPtr> objectives;
    objectives.reserve(cfg.objectives.size());
    for (std::size_t i = 0; i < cfg.objectives.size(); ++i) {
        try {
            objectives.push_back(parse_expr(cfg.objectives[i], names));
        } catch (const ParseError& e) {
            throw ConfigError("objectives[" + std::to_string(i) + "]: " + e.what());
        }
    }
    std::vector<ExprPtr> constraints;
    constraints.reserve(cfg.constraints.size());
    for (std::size_t i = 0; i < cfg.constraints.size(); ++i) {
        try {
            constraints.push_back(parse_expr(cfg.constraints[i], names));
        } catch (const ParseError& e) {
            throw ConfigError("constraints[" + std::to_string(i) + "]: " + e.what());
        }
    }
    return Problem(std::move(objectives), std::move(constraints));
}

const char* ball_convention_name(BallConvention conv) {
    return conv == BallConvention::Norm ? "norm" : "vlevel";
}

const char* region_geometry_name(RegionGeometry g) {
    return g == RegionGeometry::VLevel ? "vlevel" : "radius";
}

}  // namespace cloudopt
