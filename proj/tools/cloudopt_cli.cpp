// cloudopt — deterministic simulator/solver for cloud-coordinated multi-agent
// constrained optimization.
//
// Verbs:
//   run       simulate the 3-timestep agent/cloud protocol and emit a trace
//   stepsize  estimate the gamma1/gamma2 stepsize bounds and recommend rho
//   solve     run the centralized primal-dual iteration to a fixed point
//
// Exit codes: 0 ok, 2 config error, 3 divergence, 4 invariant violation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cloudopt/analysis.hpp"
#include "cloudopt/config.hpp"
#include "cloudopt/problem.hpp"
#include "cloudopt/protocol.hpp"
#include "cloudopt/stepsize.hpp"
#include "cloudopt/trace.hpp"
#include "cloudopt/uzawa.hpp"

namespace {

using nlohmann::json;
using namespace cloudopt;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitInvariant = 4;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> ball_convention;
    std::optional<std::string> privacy;  // "on"/"off"
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("-c,--config", args.config_path, "run configuration JSON")->required();
    cmd->add_option("-o,--out-dir", args.out_dir, "directory prefixed to relative output paths");
    cmd->add_option("--seed", args.seed, "override the configured seed");
    cmd->add_option("--ball-convention", args.ball_convention,
                    "ball membership convention: norm (V <= eps^2) or vlevel (V <= eps)")
        ->check(CLI::IsMember({"norm", "vlevel"}));
    cmd->add_option("--privacy", args.privacy, "override privacy relabeling: on or off")
        ->check(CLI::IsMember({"on", "off"}));
}

RunConfig load_with_overrides(const CommonArgs& args) {
    RunConfig cfg = load_config(args.config_path);
    if (args.seed) cfg.seed = *args.seed;
    if (args.ball_convention) {
        cfg.ball_convention =
            *args.ball_convention == "norm" ? BallConvention::Norm : BallConvention::VLevel;
    }
    if (args.privacy) cfg.privacy = *args.privacy == "on";
    return cfg;
}

std::string resolve_output(const std::string& out_dir, const std::string& path) {
    if (path.empty() || out_dir.empty()) return path;
    std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (std::filesystem::path(out_dir) / p).string();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError(path + ": cannot open for writing");
    out << content;
}

json point_to_json(const PrimalDualPoint& pt) {
    return json{{"x", pt.x}, {"mu", pt.mu}};
}

json stepsize_report_to_json(const StepsizeReport& rep) {
    return json{{"gamma1", rep.gamma1},
                {"gamma2", rep.gamma2},
                {"rho_max", rep.rho_max},
                {"rho_recommended", rep.rho_recommended},
                {"samples_used", rep.samples_used},
                {"R", rep.R},
                {"epsilon", rep.epsilon}};
}

StepsizeOptions stepsize_options(const RunConfig& cfg) {
    StepsizeOptions opts;
    opts.safety_factor = cfg.stepsize.safety_factor;
    opts.clip_mu = cfg.stepsize.clip_mu;
    opts.geometry = cfg.stepsize.geometry;
    return opts;
}

// Reference point for all V reporting: the configured reference saddle when
// present, otherwise a fresh centralized solve from the configured start.
std::pair<PrimalDualPoint, std::string> obtain_saddle(const Problem& problem, const RunConfig& cfg) {
    if (cfg.reference_saddle) return {*cfg.reference_saddle, "reference"};
    UzawaConfig ucfg;
    ucfg.rho = cfg.solver.rho.value_or(cfg.rho_auto ? 1e-3 : cfg.rho);
    ucfg.max_steps = cfg.solver.max_steps;
    ucfg.fixed_point_tol = cfg.solver.fixed_point_tol;
    const SolveResult res = solve_saddle(problem, PrimalDualPoint{cfg.x0, cfg.mu0}, ucfg);
    return {res.point, "computed"};
}

int cmd_solve(const CommonArgs& args, std::optional<double> rho_override,
              std::optional<long> max_steps_override, std::optional<double> tol_override,
              const std::string& out_path) {
    const RunConfig cfg = load_with_overrides(args);
    const Problem problem = build_problem(cfg);

    UzawaConfig ucfg;
    ucfg.rho = rho_override.value_or(cfg.solver.rho.value_or(cfg.rho_auto ? 1e-3 : cfg.rho));
    ucfg.max_steps = max_steps_override.value_or(cfg.solver.max_steps);
    ucfg.fixed_point_tol = tol_override.value_or(cfg.solver.fixed_point_tol);

    const SolveResult res = solve_saddle(problem, PrimalDualPoint{cfg.x0, cfg.mu0}, ucfg);

    const std::vector<double> gx = problem.grad_x(res.point);
    const std::vector<double> g = problem.grad_mu(res.point.x);
    double grad_inf = 0.0, max_comp_slack = 0.0;
    double max_constraint = -std::numeric_limits<double>::infinity();
    for (double v : gx) grad_inf = std::max(grad_inf, std::abs(v));
    for (std::size_t j = 0; j < g.size(); ++j) {
        max_constraint = std::max(max_constraint, g[j]);
        max_comp_slack = std::max(max_comp_slack, std::abs(res.point.mu[j] * g[j]));
    }
    if (g.empty()) max_constraint = 0.0;

    json out = {{"x", res.point.x},
                {"mu", res.point.mu},
                {"steps_taken", res.steps_taken},
                {"converged", res.converged},
                {"rho", ucfg.rho},
                {"kkt", {{"grad_x_inf_norm", grad_inf},
                         {"max_constraint_value", max_constraint},
                         {"max_complementary_slackness", max_comp_slack}}}};
    const std::string text = out.dump(2) + "\n";
    std::cout << text;
    const std::string resolved = resolve_output(args.out_dir, out_path);
    if (!resolved.empty()) write_text_file(resolved, text);
    return kExitOk;
}

int cmd_stepsize(const CommonArgs& args, std::optional<long> samples_override,
                 std::optional<std::string> geometry_override, std::string report_path) {
    RunConfig cfg = load_with_overrides(args);
    if (samples_override) cfg.stepsize.n_samples = *samples_override;
    if (geometry_override) {
        cfg.stepsize.geometry =
            *geometry_override == "radius" ? RegionGeometry::Radius : RegionGeometry::VLevel;
    }
    const Problem problem = build_problem(cfg);
    const auto [saddle, saddle_source] = obtain_saddle(problem, cfg);

    const StepsizeReport rep =
        estimate_stepsize(problem, saddle, PrimalDualPoint{cfg.x0, cfg.mu0}, cfg.epsilon,
                          cfg.stepsize.n_samples, cfg.seed, stepsize_options(cfg));

    json out = stepsize_report_to_json(rep);
    out["saddle_source"] = saddle_source;
    out["geometry"] = region_geometry_name(cfg.stepsize.geometry);
    out["clip_mu"] = cfg.stepsize.clip_mu;
    out["seed"] = cfg.seed;
    const std::string text = out.dump(2) + "\n";
    std::cout << text;
    if (report_path.empty()) report_path = cfg.output.report;
    const std::string resolved = resolve_output(args.out_dir, report_path);
    if (!resolved.empty()) write_text_file(resolved, text);
    return kExitOk;
}

int cmd_run(const CommonArgs& args, std::string trace_path, std::string summary_path) {
    const RunConfig cfg = load_with_overrides(args);
    const Problem problem = build_problem(cfg);
    const auto [saddle, saddle_source] = obtain_saddle(problem, cfg);

    double rho = cfg.rho;
    std::string rho_source = "config";
    std::optional<StepsizeReport> srep;
    if (cfg.rho_auto) {
        srep = estimate_stepsize(problem, saddle, PrimalDualPoint{cfg.x0, cfg.mu0}, cfg.epsilon,
                                 cfg.stepsize.n_samples, cfg.seed, stepsize_options(cfg));
        rho = srep->rho_recommended;
        rho_source = "auto";
    }

    NetworkState net = init_network(problem, cfg.x0, cfg.mu0, rho, cfg.privacy, cfg.seed);

    if (trace_path.empty()) trace_path = cfg.output.trace;
    const std::string trace_resolved = resolve_output(args.out_dir, trace_path);
    std::ofstream trace_file;
    std::optional<CsvTraceWriter> writer;
    if (!trace_resolved.empty()) {
        trace_file.open(trace_resolved, std::ios::binary);
        if (!trace_file) throw ConfigError(trace_resolved + ": cannot open for writing");
        writer.emplace(trace_file, problem.n_agents(), problem.n_constraints());
    }
    AnnotatingSink sink(writer ? &*writer : nullptr, saddle, cfg.epsilon, cfg.ball_convention);

    run(net, cfg.total_timesteps, &sink);

    // Convergence verdicts over the synchronized snapshots.
    const ConvergenceTrace conv =
        build_convergence_trace(sink.sync_points(), saddle, cfg.epsilon, cfg.ball_convention);
    long annulus_violations = 0, post_entry_exits = 0;
    for (std::size_t k = 0; k + 1 < conv.records.size(); ++k) {
        const StepVerdict verdict =
            classify_step(conv.records[k].V, conv.records[k + 1].V, cfg.epsilon, conv.R);
        if (verdict.region == Region::Annulus && !verdict.pass) ++annulus_violations;
    }
    if (conv.entry_step) {
        for (const SyncRecord& rec : conv.records) {
            if (rec.step > *conv.entry_step && !rec.in_eps_ball) ++post_entry_exits;
        }
    }

    json entries = json::object();
    for (BallConvention c : {BallConvention::Norm, BallConvention::VLevel}) {
        const ConvergenceTrace alt = build_convergence_trace(sink.sync_points(), saddle, cfg.epsilon, c);
        const auto entry = detect_entry(alt, cfg.epsilon);
        entries[ball_convention_name(c)] =
            entry ? json{{"step", entry->step}, {"timestep", entry->timestep}}
                  : json{{"step", nullptr}, {"timestep", nullptr}};
    }

    const PrimalDualPoint final_pt{net.cloud.x_c, net.cloud.mu_c};
    json summary = {
        {"config", args.config_path},
        {"n_agents", problem.n_agents()},
        {"n_constraints", problem.n_constraints()},
        {"rho", rho},
        {"rho_source", rho_source},
        {"epsilon", cfg.epsilon},
        {"ball_convention", ball_convention_name(cfg.ball_convention)},
        {"privacy", cfg.privacy},
        {"seed", cfg.seed},
        {"saddle", {{"source", saddle_source}, {"x", saddle.x}, {"mu", saddle.mu}}},
        {"entry", entries},
        {"final",
         {{"timestep", net.timestep},
          {"x_c", net.cloud.x_c},
          {"mu_c", net.cloud.mu_c},
          {"V", lyapunov(final_pt, saddle)}}},
        {"verdicts",
         {{"annulus_violations", annulus_violations}, {"post_entry_exits", post_entry_exits}}},
        {"synchronized_steps", static_cast<long>(conv.records.size())},
        {"R", conv.R},
    };
    if (srep) summary["stepsize"] = stepsize_report_to_json(*srep);

    const std::string text = summary.dump(2) + "\n";
    std::cout << text;
    if (summary_path.empty()) summary_path = cfg.output.summary;
    const std::string summary_resolved = resolve_output(args.out_dir, summary_path);
    if (!summary_resolved.empty()) write_text_file(summary_resolved, text);

    // The decrease/invariance guarantees are only in force when rho was
    // certified against the estimated ceiling, i.e. derived by rho="auto".
    if (rho_source == "auto" && (annulus_violations > 0 || post_entry_exits > 0)) {
        std::cerr << "error: invariant violation: annulus_violations=" << annulus_violations
                  << " post_entry_exits=" << post_entry_exits << "\n";
        return kExitInvariant;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic simulator/solver for cloud-coordinated multi-agent optimization"};
    app.require_subcommand(1);

    CommonArgs run_args, step_args, solve_args;
    std::string trace_path, summary_path, report_path, solve_out;
    std::optional<long> samples_override, max_steps_override;
    std::optional<std::string> geometry_override;
    std::optional<double> rho_override, tol_override;

    CLI::App* run_cmd = app.add_subcommand("run", "simulate the cloud protocol");
    add_common(run_cmd, run_args);
    run_cmd->add_option("--trace", trace_path, "trace CSV output path");
    run_cmd->add_option("--summary", summary_path, "summary JSON output path");

    CLI::App* step_cmd = app.add_subcommand("stepsize", "estimate stepsize bounds");
    add_common(step_cmd, step_args);
    step_cmd->add_option("--samples", samples_override, "Monte Carlo sample count");
    step_cmd->add_option("--geometry", geometry_override, "sampling region geometry")
        ->check(CLI::IsMember({"vlevel", "radius"}));
    step_cmd->add_option("--report", report_path, "report JSON output path");

    CLI::App* solve_cmd = app.add_subcommand("solve", "centralized fixed-point solve");
    add_common(solve_cmd, solve_args);
    solve_cmd->add_option("--rho", rho_override, "solver stepsize");
    solve_cmd->add_option("--max-steps", max_steps_override, "iteration cap");
    solve_cmd->add_option("--tol", tol_override, "fixed-point displacement tolerance");
    solve_cmd->add_option("--out", solve_out, "result JSON output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(run_args, trace_path, summary_path);
        if (step_cmd->parsed()) {
            return cmd_stepsize(step_args, samples_override, geometry_override, report_path);
        }
        return cmd_solve(solve_args, rho_override, max_steps_override, tol_override, solve_out);
    } catch (const ConfigError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ProblemError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return kExitConfig;
    } catch (const StepsizeError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DivergenceError& e) {
        std::cerr << "error: divergence: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const ProtocolError& e) {
        std::cerr << "error: invariant violation: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
