#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "cloudopt/expr.hpp"

namespace cloudopt {

// Stacked primal-dual iterate z = (x, mu). mu is expected componentwise
// nonnegative wherever it enters an update rule.
struct PrimalDualPoint {
    std::vector<double> x;
    std::vector<double> mu;
};

struct ProblemError : std::runtime_error {
    explicit ProblemError(const std::string& msg) : std::runtime_error(msg) {}
};

// A separable objective F(x) = sum_i f_i(x_i) under global inequality
// constraints g_j(x) <= 0, with the Lagrangian L(x, mu) = F(x) + mu^T g(x).
// Objective i may reference only variable x{i+1}; constraints may reference
// any declared variable. All first-order partials are differentiated
// symbolically at construction and cached.
//
// Convexity of the supplied expressions (each f_i strictly convex, each g_j
// convex) and regularity of the optimum are documented preconditions; they
// are not verified here.
class Problem {
public:
    Problem(std::vector<ExprPtr> objectives, std::vector<ExprPtr> constraints);

    // Canonical 1-based variable names: var_name(0) == "x1".
    static std::string var_name(int i);

    int n_agents() const { return static_cast<int>(objectives_.size()); }
    int n_constraints() const { return static_cast<int>(constraints_.size()); }
    const std::vector<std::string>& var_names() const { return var_names_; }

    const ExprPtr& objective(int i) const { return objectives_.at(i); }
    const ExprPtr& constraint(int j) const { return constraints_.at(j); }
    const ExprPtr& objective_grad(int i) const { return objective_grads_.at(i); }
    // d g_j / d x_{i+1}
    const ExprPtr& constraint_partial(int j, int i) const;

    // L(x, mu) = sum_i f_i(x_i) + sum_j mu_j g_j(x)
    double lagrangian(const PrimalDualPoint& pt) const;

    // Component i: df_i/dx_i(x_i) + sum_j mu_j * dg_j/dx_i(x)
    std::vector<double> grad_x(const PrimalDualPoint& pt) const;

    // dL/dmu = g(x)
    std::vector<double> grad_mu(const std::vector<double>& x) const;

    Assignment make_assignment(const std::vector<double>& x) const;

private:
    void check_dims(const PrimalDualPoint& pt) const;

    std::vector<ExprPtr> objectives_;
    std::vector<ExprPtr> constraints_;
    std::vector<std::string> var_names_;
    std::vector<ExprPtr> objective_grads_;
    std::vector<std::vector<ExprPtr>> constraint_partials_;  // [j][i]
};

}  // namespace cloudopt
