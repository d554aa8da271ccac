#include "cloudopt/stepsize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "cloudopt/analysis.hpp"

namespace cloudopt {

namespace {

class ShellSampler {
public:
    // Uniform sampling over {r_lo <= ||z - center|| <= r_hi}, optionally
    // rejecting points with any negative mu component.
    ShellSampler(const PrimalDualPoint& center, double r_lo, double r_hi, bool clip_mu,
                 std::uint64_t seed)
        : center_(center),
          dim_(center.x.size() + center.mu.size()),
          r_lo_(r_lo),
          r_hi_(r_hi),
          clip_mu_(clip_mu),
          rng_(seed) {}

    PrimalDualPoint next() {
        PrimalDualPoint z;
        z.x.resize(center_.x.size());
        z.mu.resize(center_.mu.size());
        while (true) {
            double norm_sq = 0.0;
            dir_.resize(dim_);
            for (double& d : dir_) {
                d = normal_(rng_);
                norm_sq += d * d;
            }
            if (norm_sq == 0.0) continue;
            const double u = uniform_(rng_);
            const double d = static_cast<double>(dim_);
            const double r = std::pow(std::pow(r_lo_, d) + u * (std::pow(r_hi_, d) - std::pow(r_lo_, d)),
                                      1.0 / d);
            const double scale = r / std::sqrt(norm_sq);
            bool ok = true;
            for (std::size_t i = 0; i < z.x.size(); ++i) z.x[i] = center_.x[i] + scale * dir_[i];
            for (std::size_t j = 0; j < z.mu.size(); ++j) {
                z.mu[j] = center_.mu[j] + scale * dir_[z.x.size() + j];
                if (clip_mu_ && z.mu[j] < 0.0) ok = false;
            }
            if (ok) return z;
        }
    }

private:
    const PrimalDualPoint& center_;
    std::size_t dim_;
    double r_lo_, r_hi_;
    bool clip_mu_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_;
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    std::vector<double> dir_;
};

double grad_norm_sq(const Problem& p, const PrimalDualPoint& z) {
    double s = 0.0;
    for (double v : p.grad_x(z)) s += v * v;
    for (double v : p.grad_mu(z.x)) s += v * v;
    return s;
}

}  // namespace

double estimate_gamma1(const Problem& p, const PrimalDualPoint& saddle, double epsilon,
                       long n_samples, std::uint64_t seed, const StepsizeOptions& opts) {
    if (n_samples < 1) throw std::invalid_argument("n_samples must be at least 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    const double r_hi =
        opts.geometry == RegionGeometry::VLevel ? std::sqrt(epsilon / 2.0) : epsilon / 2.0;
    ShellSampler sampler(saddle, 0.0, r_hi, opts.clip_mu, seed);
    double best = std::numeric_limits<double>::infinity();
    for (long k = 0; k < n_samples; ++k) {
        const PrimalDualPoint z = sampler.next();
        const double d = grad_norm_sq(p, z);
        const double v = std::sqrt((epsilon / 2.0) / d);
        if (!std::isfinite(v)) {
            throw StepsizeError("non-finite gamma1 sample at index " + std::to_string(k));
        }
        best = std::min(best, v);
    }
    return best;
}

double estimate_gamma2(const Problem& p, const PrimalDualPoint& saddle, double epsilon, double R,
                       long n_samples, std::uint64_t seed, const StepsizeOptions& opts) {
    if (n_samples < 1) throw std::invalid_argument("n_samples must be at least 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (!(R >= epsilon)) throw std::invalid_argument("R must be at least epsilon");
    double r_lo, r_hi;
    if (opts.geometry == RegionGeometry::VLevel) {
        r_lo = std::sqrt(epsilon / 2.0);
        r_hi = std::sqrt(R);
    } else {
        r_lo = epsilon / 2.0;
        r_hi = std::max(epsilon, std::sqrt(R));
    }
    ShellSampler sampler(saddle, r_lo, r_hi, opts.clip_mu, seed);
    double best = std::numeric_limits<double>::infinity();
    for (long k = 0; k < n_samples; ++k) {
        const PrimalDualPoint z = sampler.next();
        const std::vector<double> dx = p.grad_x(z);
        const std::vector<double> dmu = p.grad_mu(z.x);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < z.x.size(); ++i) {
            num += -(saddle.x[i] - z.x[i]) * dx[i];
            den += dx[i] * dx[i];
        }
        for (std::size_t j = 0; j < z.mu.size(); ++j) {
            num += (saddle.mu[j] - z.mu[j]) * dmu[j];
            den += dmu[j] * dmu[j];
        }
        const double ratio = num / den;
        if (!std::isfinite(ratio) || ratio <= 0.0) {
            throw StepsizeError(
                "nonpositive directional-decrease ratio " + std::to_string(ratio) +
                " at sample index " + std::to_string(k) +
                "; the problem appears non-convex or the reference saddle is wrong");
        }
        best = std::min(best, ratio);
    }
    return best;
}

StepsizeReport recommend_rho(double gamma1, double gamma2, double safety_factor, long samples_used,
                             double R, double epsilon) {
    if (!(gamma1 > 0.0) || !(gamma2 > 0.0)) {
        throw std::invalid_argument("gamma estimates must be positive");
    }
    if (!(safety_factor > 0.0) || safety_factor > 1.0) {
        throw std::invalid_argument("safety_factor must lie in (0, 1]");
    }
    StepsizeReport rep;
    rep.gamma1 = gamma1;
    rep.gamma2 = gamma2;
    rep.rho_max = std::min(gamma1, gamma2);
    rep.rho_recommended = safety_factor * rep.rho_max;
    rep.samples_used = samples_used;
    rep.R = R;
    rep.epsilon = epsilon;
    return rep;
}

StepsizeReport estimate_stepsize(const Problem& p, const PrimalDualPoint& saddle,
                                 const PrimalDualPoint& z0, double epsilon, long n_samples,
                                 std::uint64_t seed, const StepsizeOptions& opts) {
    const double R = std::max(epsilon, lyapunov(z0, saddle));
    const double g1 = estimate_gamma1(p, saddle, epsilon, n_samples, seed, opts);
    const double g2 = estimate_gamma2(p, saddle, epsilon, R, n_samples, seed, opts);
    return recommend_rho(g1, g2, opts.safety_factor, n_samples, R, epsilon);
}

}  // namespace cloudopt
