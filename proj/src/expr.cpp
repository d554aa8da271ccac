#include "cloudopt/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace cloudopt {

namespace {

ExprPtr node(Expr e) { return std::make_shared<Expr>(std::move(e)); }

bool is_const(const ExprPtr& e, double v) {
    return e->kind == ExprKind::Constant && e->value == v;
}

}  // namespace

ParseError::ParseError(const std::string& msg, std::size_t pos)
    : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"), position(pos) {}

ExprPtr make_constant(double v) {
    Expr e;
    e.kind = ExprKind::Constant;
    e.value = v;
    return node(std::move(e));
}

ExprPtr make_variable(std::string name) {
    Expr e;
    e.kind = ExprKind::Variable;
    e.name = std::move(name);
    return node(std::move(e));
}

ExprPtr make_sum(std::vector<ExprPtr> terms) {
    std::vector<ExprPtr> flat;
    double constant = 0.0;
    bool saw_constant = false;
    for (auto& t : terms) {
        if (t->kind == ExprKind::Sum) {
            for (const auto& c : t->children) {
                if (c->kind == ExprKind::Constant) {
                    constant += c->value;
                    saw_constant = true;
                } else {
                    flat.push_back(c);
                }
            }
        } else if (t->kind == ExprKind::Constant) {
            constant += t->value;
            saw_constant = true;
        } else {
            flat.push_back(std::move(t));
        }
    }
    if (saw_constant && constant != 0.0) flat.push_back(make_constant(constant));
    if (flat.empty()) return make_constant(constant);
    if (flat.size() == 1) return flat.front();
    Expr e;
    e.kind = ExprKind::Sum;
    e.children = std::move(flat);
    return node(std::move(e));
}

ExprPtr make_product(std::vector<ExprPtr> factors) {
    std::vector<ExprPtr> flat;
    double constant = 1.0;
    bool saw_constant = false;
    for (auto& f : factors) {
        if (f->kind == ExprKind::Product) {
            for (const auto& c : f->children) {
                if (c->kind == ExprKind::Constant) {
                    constant *= c->value;
                    saw_constant = true;
                } else {
                    flat.push_back(c);
                }
            }
        } else if (f->kind == ExprKind::Constant) {
            constant *= f->value;
            saw_constant = true;
        } else {
            flat.push_back(std::move(f));
        }
    }
    if (constant == 0.0) return make_constant(0.0);
    if (saw_constant && constant != 1.0) flat.insert(flat.begin(), make_constant(constant));
    if (flat.empty()) return make_constant(constant);
    if (flat.size() == 1) return flat.front();
    Expr e;
    e.kind = ExprKind::Product;
    e.children = std::move(flat);
    return node(std::move(e));
}

ExprPtr make_power(ExprPtr base, int exponent) {
    if (exponent == 0) return make_constant(1.0);
    if (exponent == 1) return base;
    if (base->kind == ExprKind::Constant) {
        return make_constant(std::pow(base->value, exponent));
    }
    Expr e;
    e.kind = ExprKind::Power;
    e.children.push_back(std::move(base));
    e.exponent = exponent;
    return node(std::move(e));
}

ExprPtr make_negate(ExprPtr inner) {
    if (inner->kind == ExprKind::Constant) return make_constant(-inner->value);
    if (inner->kind == ExprKind::Negate) return inner->children[0];
    Expr e;
    e.kind = ExprKind::Negate;
    e.children.push_back(std::move(inner));
    return node(std::move(e));
}

namespace {

class Parser {
public:
    Parser(const std::string& text, const std::vector<std::string>& allowed_vars)
        : text_(text), allowed_(allowed_vars) {}

    ExprPtr parse() {
        auto e = parse_sum();
        skip_ws();
        if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    const std::string& text_;
    const std::vector<std::string>& allowed_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    ExprPtr parse_sum() {
        std::vector<ExprPtr> terms;
        terms.push_back(parse_term());
        while (true) {
            if (accept('+')) {
                terms.push_back(parse_term());
            } else if (accept('-')) {
                terms.push_back(make_negate(parse_term()));
            } else {
                break;
            }
        }
        return make_sum(std::move(terms));
    }

    ExprPtr parse_term() {
        std::vector<ExprPtr> factors;
        factors.push_back(parse_factor());
        while (accept('*')) factors.push_back(parse_factor());
        return make_product(std::move(factors));
    }

    // factor := '-' factor | power
    ExprPtr parse_factor() {
        if (accept('-')) return make_negate(parse_factor());
        return parse_power();
    }

    // power := atom ('^' exponent)* with right-associative literal exponents:
    // a^2^3 folds to a^(2^3) = a^8.
    ExprPtr parse_power() {
        auto base = parse_atom();
        std::vector<long long> exps;
        std::vector<std::size_t> exp_pos;
        while (accept('^')) {
            skip_ws();
            exp_pos.push_back(pos_);
            exps.push_back(parse_int_literal());
        }
        if (exps.empty()) return base;
        long long folded = exps.back();
        for (std::size_t i = exps.size() - 1; i-- > 0;) {
            long long b = exps[i];
            long long r = 1;
            for (long long k = 0; k < folded; ++k) {
                r *= b;
                if (r > 1'000'000'000LL) throw ParseError("exponent too large", exp_pos[i]);
            }
            folded = r;
        }
        if (folded > 1'000'000'000LL) throw ParseError("exponent too large", exp_pos.front());
        return make_power(std::move(base), static_cast<int>(folded));
    }

    long long parse_int_literal() {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
            if (text_[pos_] == '-') throw ParseError("exponent must be a nonnegative integer", pos_);
            ++pos_;
        }
        std::size_t digits_start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ == digits_start) throw ParseError("expected integer exponent", start);
        if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E')) {
            throw ParseError("exponent must be an integer", start);
        }
        return std::stoll(text_.substr(digits_start, pos_ - digits_start));
    }

    ExprPtr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            auto e = parse_sum();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    ExprPtr parse_number() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            } else {
                pos_ = mark;  // 'e' belongs to a following identifier, not this number
            }
        }
        const std::string token = text_.substr(start, pos_ - start);
        if (token == ".") throw ParseError("malformed number", start);
        char* end = nullptr;
        double v = std::strtod(token.c_str(), &end);
        if (end != token.c_str() + token.size()) throw ParseError("malformed number '" + token + "'", start);
        return make_constant(v);
    }

    ExprPtr parse_identifier() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        std::string name = text_.substr(start, pos_ - start);
        for (const auto& v : allowed_) {
            if (v == name) return make_variable(std::move(name));
        }
        throw ParseError("unknown variable '" + name + "'", start);
    }
};

}  // namespace

ExprPtr parse_expr(const std::string& text, const std::vector<std::string>& allowed_vars) {
    return Parser(text, allowed_vars).parse();
}

double eval(const Expr& e, const Assignment& a) {
    switch (e.kind) {
        case ExprKind::Constant:
            return e.value;
        case ExprKind::Variable: {
            auto it = a.find(e.name);
            if (it == a.end()) throw EvalError("unbound variable '" + e.name + "'");
            return it->second;
        }
        case ExprKind::Sum: {
            double s = 0.0;
            for (const auto& c : e.children) s += eval(*c, a);
            return s;
        }
        case ExprKind::Product: {
            double p = 1.0;
            for (const auto& c : e.children) p *= eval(*c, a);
            return p;
        }
        case ExprKind::Power: {
            double b = eval(*e.children[0], a);
            double r = 1.0;
            for (int k = 0; k < e.exponent; ++k) r *= b;
            return r;
        }
        case ExprKind::Negate:
            return -eval(*e.children[0], a);
    }
    throw EvalError("corrupt expression node");
}

ExprPtr differentiate(const Expr& e, const std::string& var) {
    switch (e.kind) {
        case ExprKind::Constant:
            return make_constant(0.0);
        case ExprKind::Variable:
            return make_constant(e.name == var ? 1.0 : 0.0);
        case ExprKind::Sum: {
            std::vector<ExprPtr> terms;
            for (const auto& c : e.children) {
                auto d = differentiate(*c, var);
                if (!is_const(d, 0.0)) terms.push_back(std::move(d));
            }
            return make_sum(std::move(terms));
        }
        case ExprKind::Product: {
            // n-ary product rule: sum over i of (d child_i) * prod of the rest
            std::vector<ExprPtr> terms;
            for (std::size_t i = 0; i < e.children.size(); ++i) {
                auto d = differentiate(*e.children[i], var);
                if (is_const(d, 0.0)) continue;
                std::vector<ExprPtr> factors;
                factors.push_back(std::move(d));
                for (std::size_t j = 0; j < e.children.size(); ++j) {
                    if (j != i) factors.push_back(e.children[j]);
                }
                terms.push_back(make_product(std::move(factors)));
            }
            return make_sum(std::move(terms));
        }
        case ExprKind::Power: {
            auto db = differentiate(*e.children[0], var);
            if (is_const(db, 0.0)) return make_constant(0.0);
            std::vector<ExprPtr> factors;
            factors.push_back(make_constant(static_cast<double>(e.exponent)));
            factors.push_back(make_power(e.children[0], e.exponent - 1));
            factors.push_back(std::move(db));
            return make_product(std::move(factors));
        }
        case ExprKind::Negate:
            return make_negate(differentiate(*e.children[0], var));
    }
    throw EvalError("corrupt expression node");
}

namespace {

std::string format_constant(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Wraps a printed child in parentheses when required by the parent context.
std::string print_node(const Expr& e);

std::string print_wrapped(const Expr& e, bool wrap) {
    std::string s = print_node(e);
    return wrap ? "(" + s + ")" : s;
}

bool needs_parens_in_product(const Expr& e) {
    return e.kind == ExprKind::Sum || e.kind == ExprKind::Negate ||
           (e.kind == ExprKind::Constant && e.value < 0);
}

bool needs_parens_as_power_base(const Expr& e) {
    return e.kind != ExprKind::Variable && !(e.kind == ExprKind::Constant && e.value >= 0);
}

std::string print_node(const Expr& e) {
    switch (e.kind) {
        case ExprKind::Constant:
            return format_constant(e.value);
        case ExprKind::Variable:
            return e.name;
        case ExprKind::Sum: {
            std::string out;
            for (std::size_t i = 0; i < e.children.size(); ++i) {
                const Expr& c = *e.children[i];
                if (i == 0) {
                    out += print_node(c);
                } else if (c.kind == ExprKind::Negate) {
                    out += " - " + print_wrapped(*c.children[0], c.children[0]->kind == ExprKind::Sum ||
                                                                     c.children[0]->kind == ExprKind::Product);
                } else if (c.kind == ExprKind::Constant && c.value < 0) {
                    out += " - " + format_constant(-c.value);
                } else {
                    out += " + " + print_node(c);
                }
            }
            return out;
        }
        case ExprKind::Product: {
            std::string out;
            for (std::size_t i = 0; i < e.children.size(); ++i) {
                if (i) out += "*";
                out += print_wrapped(*e.children[i], needs_parens_in_product(*e.children[i]));
            }
            return out;
        }
        case ExprKind::Power:
            return print_wrapped(*e.children[0], needs_parens_as_power_base(*e.children[0])) + "^" +
                   std::to_string(e.exponent);
        case ExprKind::Negate: {
            const Expr& c = *e.children[0];
            bool wrap = c.kind == ExprKind::Sum || c.kind == ExprKind::Product;
            return "-" + print_wrapped(c, wrap);
        }
    }
    return "";
}

}  // namespace

std::string to_string(const Expr& e) { return print_node(e); }

namespace {

void collect_vars(const Expr& e, std::set<std::string>& out) {
    if (e.kind == ExprKind::Variable) {
        out.insert(e.name);
        return;
    }
    for (const auto& c : e.children) collect_vars(*c, out);
}

}  // namespace

std::set<std::string> free_vars(const Expr& e) {
    std::set<std::string> out;
    collect_vars(e, out);
    return out;
}

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case ExprKind::Constant:
            return a.value == b.value;
        case ExprKind::Variable:
            return a.name == b.name;
        case ExprKind::Power:
            if (a.exponent != b.exponent) return false;
            [[fallthrough]];
        case ExprKind::Sum:
        case ExprKind::Product:
        case ExprKind::Negate:
            if (a.children.size() != b.children.size()) return false;
            for (std::size_t i = 0; i < a.children.size(); ++i) {
                if (!structurally_equal(*a.children[i], *b.children[i])) return false;
            }
            return true;
    }
    return false;
}

ExprPtr substitute_names(const Expr& e, const std::unordered_map<std::string, std::string>& mapping) {
    switch (e.kind) {
        case ExprKind::Constant:
            return make_constant(e.value);
        case ExprKind::Variable: {
            auto it = mapping.find(e.name);
            return make_variable(it == mapping.end() ? e.name : it->second);
        }
        case ExprKind::Sum:
        case ExprKind::Product: {
            std::vector<ExprPtr> children;
            children.reserve(e.children.size());
            for (const auto& c : e.children) children.push_back(substitute_names(*c, mapping));
            return e.kind == ExprKind::Sum ? make_sum(std::move(children))
                                           : make_product(std::move(children));
        }
        case ExprKind::Power:
            return make_power(substitute_names(*e.children[0], mapping), e.exponent);
        case ExprKind::Negate:
            return make_negate(substitute_names(*e.children[0], mapping));
    }
    throw EvalError("corrupt expression node");
}

}  // namespace cloudopt
