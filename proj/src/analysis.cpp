#include "cloudopt/analysis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cloudopt {

double ball_threshold(double epsilon, BallConvention conv) {
    return conv == BallConvention::Norm ? epsilon * epsilon : epsilon;
}

double lyapunov(const PrimalDualPoint& pt, const PrimalDualPoint& saddle) {
    if (pt.x.size() != saddle.x.size() || pt.mu.size() != saddle.mu.size()) {
        throw ProblemError("lyapunov: dimension mismatch");
    }
    double v = 0.0;
    for (std::size_t i = 0; i < pt.x.size(); ++i) {
        const double d = pt.x[i] - saddle.x[i];
        v += d * d;
    }
    for (std::size_t j = 0; j < pt.mu.size(); ++j) {
        const double d = pt.mu[j] - saddle.mu[j];
        v += d * d;
    }
    return v;
}

StepVerdict classify_step(double V_k, double V_next, double epsilon, double R) {
    const double dV = V_next - V_k;
    if (V_k > R) return {Region::Outside, false};
    if (V_k >= epsilon / 2.0) return {Region::Annulus, dV < 0.0};
    return {Region::HalfBall, dV <= epsilon / 2.0};
}

ConvergenceTrace build_convergence_trace(const std::vector<PrimalDualPoint>& sync_points,
                                         const PrimalDualPoint& saddle, double epsilon,
                                         BallConvention conv) {
    if (sync_points.empty()) throw std::invalid_argument("empty synchronized-point sequence");
    ConvergenceTrace trace;
    trace.epsilon = epsilon;
    trace.convention = conv;
    const double thr = ball_threshold(epsilon, conv);
    trace.records.reserve(sync_points.size());
    for (std::size_t k = 0; k < sync_points.size(); ++k) {
        SyncRecord rec;
        rec.step = static_cast<long>(k);
        rec.timestep = static_cast<long>(3 * k);
        rec.V = lyapunov(sync_points[k], saddle);
        rec.in_eps_ball = rec.V <= thr;
        rec.in_half_ball = rec.V <= epsilon / 2.0;
        if (rec.in_eps_ball && !trace.entry_step) trace.entry_step = rec.step;
        trace.records.push_back(rec);
    }
    for (std::size_t k = 0; k + 1 < trace.records.size(); ++k) {
        trace.records[k].dV = trace.records[k + 1].V - trace.records[k].V;
    }
    trace.records.back().dV = std::numeric_limits<double>::quiet_NaN();
    trace.R = std::max(epsilon, trace.records.front().V);
    return trace;
}

std::optional<EntryPoint> detect_entry(const ConvergenceTrace& trace, double epsilon) {
    const double thr = ball_threshold(epsilon, trace.convention);
    for (const SyncRecord& rec : trace.records) {
        if (rec.V <= thr) return EntryPoint{rec.step, rec.timestep};
    }
    return std::nullopt;
}

double delta_v_closed_form(const Problem& p, const PrimalDualPoint& pt,
                           const PrimalDualPoint& saddle, double rho) {
    const std::vector<double> dx = p.grad_x(pt);
    const std::vector<double> g = p.grad_mu(pt.x);

    double inner = 0.0;    // -(x_hat - x)^T d_x + (mu_hat - mu)^T d_mu
    double norm_sq = 0.0;  // ||d_x||^2 + ||d_mu||^2
    for (std::size_t i = 0; i < pt.x.size(); ++i) {
        inner += -(saddle.x[i] - pt.x[i]) * dx[i];
        norm_sq += dx[i] * dx[i];
    }
    for (std::size_t j = 0; j < pt.mu.size(); ++j) {
        double raw = pt.mu[j] + rho * g[j];
        if (raw < 0.0) raw = 0.0;
        const double dmu = (raw - pt.mu[j]) / rho;
        inner += (saddle.mu[j] - pt.mu[j]) * dmu;
        norm_sq += dmu * dmu;
    }
    return -rho * (2.0 * inner - rho * norm_sq);
}

}  // namespace cloudopt
