#include "cloudopt/uzawa.hpp"

#include <cmath>

namespace cloudopt {

namespace {

bool all_finite(const std::vector<double>& v) {
    for (double d : v) {
        if (!std::isfinite(d)) return false;
    }
    return true;
}

}  // namespace

std::vector<double> project_nonneg(std::vector<double> v) {
    for (double& d : v) {
        if (d < 0.0) d = 0.0;
    }
    return v;
}

PrimalDualPoint uzawa_step(const Problem& p, const PrimalDualPoint& pt, double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
    const std::vector<double> gx = p.grad_x(pt);
    const std::vector<double> gmu = p.grad_mu(pt.x);

    PrimalDualPoint next;
    next.x.resize(pt.x.size());
    for (std::size_t i = 0; i < pt.x.size(); ++i) next.x[i] = pt.x[i] - rho * gx[i];
    next.mu.resize(pt.mu.size());
    for (std::size_t j = 0; j < pt.mu.size(); ++j) next.mu[j] = pt.mu[j] + rho * gmu[j];
    next.mu = project_nonneg(std::move(next.mu));

    if (!all_finite(next.x) || !all_finite(next.mu)) {
        throw DivergenceError("uzawa step produced a non-finite value");
    }
    return next;
}

SolveResult solve_saddle(const Problem& p, const PrimalDualPoint& init, const UzawaConfig& cfg) {
    if (!(cfg.rho > 0.0)) throw std::invalid_argument("rho must be positive");
    if (cfg.max_steps < 0) throw std::invalid_argument("max_steps must be nonnegative");
    if (cfg.fixed_point_tol < 0.0) throw std::invalid_argument("fixed_point_tol must be nonnegative");

    SolveResult res;
    res.point = init;
    for (long k = 0; k < cfg.max_steps; ++k) {
        PrimalDualPoint next;
        try {
            next = uzawa_step(p, res.point, cfg.rho);
        } catch (const DivergenceError& e) {
            throw DivergenceError(std::string(e.what()) + " at step " + std::to_string(k), k);
        }
        double disp_sq = 0.0;
        for (std::size_t i = 0; i < next.x.size(); ++i) {
            const double d = next.x[i] - res.point.x[i];
            disp_sq += d * d;
        }
        for (std::size_t j = 0; j < next.mu.size(); ++j) {
            const double d = next.mu[j] - res.point.mu[j];
            disp_sq += d * d;
        }
        res.point = std::move(next);
        res.steps_taken = k + 1;
        if (std::sqrt(disp_sq) <= cfg.fixed_point_tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

}  // namespace cloudopt
