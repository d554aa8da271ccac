#pragma once

#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace cloudopt {

// Variable bindings for evaluation.
using Assignment = std::unordered_map<std::string, double>;

enum class ExprKind { Constant, Variable, Sum, Product, Power, Negate };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Immutable polynomial expression tree. Sum/Product are n-ary; Power has an
// integer exponent (nonnegative as produced by the parser, so evaluation is
// total over the reals).
struct Expr {
    ExprKind kind;
    double value = 0.0;             // Constant
    std::string name;               // Variable
    std::vector<ExprPtr> children;  // Sum/Product operands; [0] for Power/Negate
    int exponent = 0;               // Power
};

// Smart constructors. Sum/Product flatten nested nodes of the same kind and
// fold constants; Power/Negate simplify the trivial cases. They never change
// the value of the expression.
ExprPtr make_constant(double v);
ExprPtr make_variable(std::string name);
ExprPtr make_sum(std::vector<ExprPtr> terms);
ExprPtr make_product(std::vector<ExprPtr> factors);
ExprPtr make_power(ExprPtr base, int exponent);
ExprPtr make_negate(ExprPtr inner);

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::size_t pos);
    std::size_t position;  // 0-based character offset into the input text
};

struct EvalError : std::runtime_error {
    explicit EvalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Parses infix text over `allowed_vars`. Grammar: `+ - * ^`, unary minus,
// parentheses, decimal constants. `^` binds tighter than `*`, which binds
// tighter than `+`/`-`; `^` is right-associative and its exponent must be a
// nonnegative integer literal (chains like x^2^3 fold to x^8).
ExprPtr parse_expr(const std::string& text, const std::vector<std::string>& allowed_vars);

double eval(const Expr& e, const Assignment& a);
inline double eval(const ExprPtr& e, const Assignment& a) { return eval(*e, a); }

// Partial derivative with respect to `var`; other variables are constants.
ExprPtr differentiate(const Expr& e, const std::string& var);
inline ExprPtr differentiate(const ExprPtr& e, const std::string& var) { return differentiate(*e, var); }

// Prints in the parse_expr grammar; parse(print(e)) is structurally equal to e.
std::string to_string(const Expr& e);
inline std::string to_string(const ExprPtr& e) { return to_string(*e); }

std::set<std::string> free_vars(const Expr& e);
inline std::set<std::string> free_vars(const ExprPtr& e) { return free_vars(*e); }

bool structurally_equal(const Expr& a, const Expr& b);
inline bool structurally_equal(const ExprPtr& a, const ExprPtr& b) { return structurally_equal(*a, *b); }

// Renames variables per `mapping`; names absent from the map are kept.
ExprPtr substitute_names(const Expr& e, const std::unordered_map<std::string, std::string>& mapping);
inline ExprPtr substitute_names(const ExprPtr& e, const std::unordered_map<std::string, std::string>& mapping) {
    return substitute_names(*e, mapping);
}

}  // namespace cloudopt
