#include "cloudopt/problem.hpp"

namespace cloudopt {

std::string Problem::var_name(int i) { return "x" + std::to_string(i + 1); }

Problem::Problem(std::vector<ExprPtr> objectives, std::vector<ExprPtr> constraints)
    : objectives_(std::move(objectives)), constraints_(std::move(constraints)) {
    if (objectives_.empty()) throw ProblemError("at least one agent objective is required");
    const int n = n_agents();
    var_names_.reserve(n);
    for (int i = 0; i < n; ++i) var_names_.push_back(var_name(i));

    for (int i = 0; i < n; ++i) {
        for (const auto& v : free_vars(objectives_[i])) {
            if (v != var_names_[i]) {
                throw ProblemError("objective " + std::to_string(i + 1) + " references '" + v +
                                   "' but may only reference " + var_names_[i]);
            }
        }
    }
    for (std::size_t j = 0; j < constraints_.size(); ++j) {
        for (const auto& v : free_vars(constraints_[j])) {
            bool declared = false;
            for (const auto& name : var_names_) declared = declared || name == v;
            if (!declared) {
                throw ProblemError("constraint " + std::to_string(j + 1) + " references undeclared '" +
                                   v + "'");
            }
        }
    }

    objective_grads_.reserve(n);
    for (int i = 0; i < n; ++i) objective_grads_.push_back(differentiate(objectives_[i], var_names_[i]));
    constraint_partials_.reserve(constraints_.size());
    for (const auto& g : constraints_) {
        std::vector<ExprPtr> row;
        row.reserve(n);
        for (int i = 0; i < n; ++i) row.push_back(differentiate(g, var_names_[i]));
        constraint_partials_.push_back(std::move(row));
    }
}

const ExprPtr& Problem::constraint_partial(int j, int i) const {
    return constraint_partials_.at(j).at(i);
}

Assignment Problem::make_assignment(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != n_agents()) {
        throw ProblemError("state vector has size " + std::to_string(x.size()) + ", expected " +
                           std::to_string(n_agents()));
    }
    Assignment a;
    a.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) a.emplace(var_names_[i], x[i]);
    return a;
}

void Problem::check_dims(const PrimalDualPoint& pt) const {
    if (static_cast<int>(pt.x.size()) != n_agents() ||
        static_cast<int>(pt.mu.size()) != n_constraints()) {
        throw ProblemError("point dimensions (" + std::to_string(pt.x.size()) + ", " +
                           std::to_string(pt.mu.size()) + ") do not match problem (" +
                           std::to_string(n_agents()) + ", " + std::to_string(n_constraints()) + ")");
    }
}

double Problem::lagrangian(const PrimalDualPoint& pt) const {
    check_dims(pt);
    const Assignment a = make_assignment(pt.x);
    double v = 0.0;
    for (const auto& f : objectives_) v += eval(f, a);
    for (std::size_t j = 0; j < constraints_.size(); ++j) v += pt.mu[j] * eval(constraints_[j], a);
    return v;
}

std::vector<double> Problem::grad_x(const PrimalDualPoint& pt) const {
    check_dims(pt);
    const Assignment a = make_assignment(pt.x);
    std::vector<double> out(pt.x.size());
    for (std::size_t i = 0; i < pt.x.size(); ++i) {
        double s = eval(objective_grads_[i], a);
        for (std::size_t j = 0; j < constraints_.size(); ++j) {
            s += pt.mu[j] * eval(constraint_partials_[j][i], a);
        }
        out[i] = s;
    }
    return out;
}

std::vector<double> Problem::grad_mu(const std::vector<double>& x) const {
    const Assignment a = make_assignment(x);
    std::vector<double> out(constraints_.size());
    for (std::size_t j = 0; j < constraints_.size(); ++j) out[j] = eval(constraints_[j], a);
    return out;
}

}  // namespace cloudopt
