#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cloudopt/expr.hpp"
#include "fixtures.hpp"

using namespace cloudopt;

namespace {
const std::vector<std::string> xy = {"x", "y"};
const std::vector<std::string> x6 = fixtures::var_names(6);

double ev(const std::string& text, const Assignment& a,
          const std::vector<std::string>& vars = xy) {
    return eval(parse_expr(text, vars), a);
}
}  // namespace

TEST_CASE("constants and literals") {
    CHECK(ev("42", {}) == 42.0);
    CHECK(ev("3.25", {}) == 3.25);
    CHECK(ev("1e3", {}) == 1000.0);
    CHECK(ev("2.5e-2", {}) == 0.025);
    CHECK(ev("1E+2", {}) == 100.0);
    CHECK(ev("  7  ", {}) == 7.0);
}

TEST_CASE("precedence and associativity") {
    CHECK(ev("1 + 2*3", {}) == 7.0);
    CHECK(ev("2*3^2", {}) == 18.0);
    CHECK(ev("(2*3)^2", {}) == 36.0);
    CHECK(ev("2 - 3 - 4", {}) == -5.0);       // left-assoc subtraction
    CHECK(ev("-3^2", {}) == -9.0);            // unary minus below ^
    CHECK(ev("(-3)^2", {}) == 9.0);
    CHECK(ev("2^2^3", {}) == 256.0);          // right-assoc exponent chain
    CHECK(ev("x^2^3", {{"x", 2.0}}) == 256.0);
}

TEST_CASE("variables and unary minus") {
    Assignment a{{"x", 2.0}, {"y", -3.0}};
    CHECK(ev("x", a) == 2.0);
    CHECK(ev("-x", a) == -2.0);
    CHECK(ev("--x", a) == 2.0);
    CHECK(ev("x - -y", a) == -1.0);
    CHECK(ev("3*x*y", a) == -18.0);
    CHECK(ev("x^3 + y^2", a) == 17.0);
    CHECK(ev("2*(x + y)^2", a) == 2.0);
}

TEST_CASE("identifier starting with e is not an exponent marker") {
    std::vector<std::string> vars = {"e1"};
    CHECK(eval(parse_expr("2*e1", vars), {{"e1", 5.0}}) == 10.0);
    CHECK(eval(parse_expr("e1 + 1", vars), {{"e1", 5.0}}) == 6.0);
}

TEST_CASE("parse errors carry positions") {
    auto pos = [](const std::string& text, const std::vector<std::string>& vars = xy) {
        try {
            parse_expr(text, vars);
        } catch (const ParseError& e) {
            return e.position;
        }
        FAIL("expected ParseError for: ", text);
        return std::size_t(0);
    };
    CHECK(pos("") == 0);
    CHECK(pos("x +") == 3);
    CHECK(pos("(x + 1") == 6);
    CHECK(pos("x ) y") == 2);
    CHECK(pos("x $ y") == 2);
    CHECK(pos("z", xy) == 0);       // unknown variable
    CHECK(pos("x1", xy) == 0);      // not declared in this instance
    CHECK(pos("x^y") == 2);         // exponent must be a literal
    CHECK(pos("x^-2") == 2);        // negative exponent rejected
    CHECK(pos("x^2.5") == 2);       // fractional exponent rejected
    CHECK_THROWS_AS(parse_expr("x*", xy), ParseError);
    CHECK_THROWS_AS(parse_expr("1 2", xy), ParseError);
    CHECK_THROWS_AS(parse_expr("()", xy), ParseError);
}

TEST_CASE("eval requires bindings for every free variable") {
    ExprPtr e = parse_expr("x + y", xy);
    CHECK_THROWS_AS(eval(e, {{"x", 1.0}}), EvalError);
}

TEST_CASE("smart constructors simplify") {
    ExprPtr c = make_sum({make_constant(1), make_constant(2)});
    REQUIRE(c->kind == ExprKind::Constant);
    CHECK(c->value == 3.0);

    ExprPtr x = make_variable("x");
    CHECK(make_power(x, 0)->kind == ExprKind::Constant);
    CHECK(make_power(x, 0)->value == 1.0);
    CHECK(make_power(x, 1).get() == x.get());
    CHECK(make_negate(make_negate(x)).get() == x.get());
    CHECK(make_negate(make_constant(4))->value == -4.0);

    // nested sums flatten
    ExprPtr s = make_sum({x, make_sum({x, x})});
    REQUIRE(s->kind == ExprKind::Sum);
    CHECK(s->children.size() == 3);

    ExprPtr p = make_product({make_constant(2), make_product({x, make_constant(3)})});
    REQUIRE(p->kind == ExprKind::Product);
    CHECK(eval(p, {{"x", 1.0}}) == 6.0);
}

TEST_CASE("differentiate: polynomial rules") {
    Assignment a{{"x", 1.3}, {"y", -0.7}};
    auto d = [&](const std::string& text, const std::string& var) {
        return eval(differentiate(parse_expr(text, xy), var), a);
    };
    CHECK(d("7", "x") == 0.0);
    CHECK(d("y", "x") == 0.0);
    CHECK(d("x", "x") == 1.0);
    CHECK(d("x^4", "x") == doctest::Approx(4 * std::pow(1.3, 3)));
    CHECK(d("3*x^2*y", "x") == doctest::Approx(6 * 1.3 * -0.7));
    CHECK(d("3*x^2*y", "y") == doctest::Approx(3 * 1.3 * 1.3));
    CHECK(d("(x + y)^3", "x") == doctest::Approx(3 * std::pow(0.6, 2)));
    CHECK(d("x*y + x^2 - y^6", "y") == doctest::Approx(1.3 - 6 * std::pow(-0.7, 5)));
}

TEST_CASE("differentiate agrees with central differences on random polynomials") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> pt(-1.5, 1.5);
    for (std::uint64_t s = 0; s < 12; ++s) {
        fixtures::RandomInstance inst = fixtures::random_instance(1000 + s, 4, 2, s % 2 == 0);
        const auto vars = fixtures::var_names(4);
        for (const std::string& text : inst.constraints) {
            ExprPtr e = parse_expr(text, vars);
            Assignment a;
            for (const auto& v : vars) a[v] = pt(rng);
            for (const auto& v : vars) {
                ExprPtr de = differentiate(e, v);
                auto f = [&](double t) {
                    Assignment b = a;
                    b[v] = t;
                    return eval(e, b);
                };
                const double fd = fixtures::central_diff(f, a[v]);
                CHECK(eval(de, a) == doctest::Approx(fd).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("to_string round-trips structurally") {
    const std::vector<std::string> corpus = {
        "x",
        "-x",
        "x + y",
        "x - y",
        "3*x^2*y",
        "(x + y)^3",
        "x^2^3",
        "2*(x + 3*y)^2 - 7",
        "-(x + y)*x",
    };
    for (const std::string& text : corpus) {
        ExprPtr e = parse_expr(text, xy);
        ExprPtr round = parse_expr(to_string(e), xy);
        CHECK_MESSAGE(structurally_equal(e, round), "text=", text, " printed=", to_string(e));
    }
    // generated instances round-trip too
    for (std::uint64_t s = 0; s < 6; ++s) {
        fixtures::RandomInstance inst = fixtures::random_instance(55 + s, 3, 2, false);
        const auto vars = fixtures::var_names(3);
        for (const auto& text : inst.objectives) {
            ExprPtr e = parse_expr(text, vars);
            CHECK(structurally_equal(e, parse_expr(to_string(e), vars)));
        }
    }
}

TEST_CASE("to_string preserves value") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pt(-2.0, 2.0);
    fixtures::RandomInstance inst = fixtures::random_instance(99, 5, 3, true);
    const auto vars = fixtures::var_names(5);
    for (const auto& text : inst.constraints) {
        ExprPtr e = parse_expr(text, vars);
        ExprPtr round = parse_expr(to_string(e), vars);
        Assignment a;
        for (const auto& v : vars) a[v] = pt(rng);
        CHECK(eval(e, a) == eval(round, a));  // same tree, same arithmetic
    }
}

TEST_CASE("free_vars") {
    CHECK(free_vars(parse_expr("x^2 + 1", xy)) == std::set<std::string>{"x"});
    CHECK(free_vars(parse_expr("3*x*y - y", xy)) == std::set<std::string>({"x", "y"}));
    CHECK(free_vars(parse_expr("4", xy)).empty());
}

TEST_CASE("substitute_names relabels and round-trips") {
    ExprPtr e = parse_expr("3*x1^2 + x4^4 - 50", x6);
    std::unordered_map<std::string, std::string> fwd{{"x1", "eta0"}, {"x4", "eta1"}};
    std::unordered_map<std::string, std::string> back{{"eta0", "x1"}, {"eta1", "x4"}};
    ExprPtr relabeled = substitute_names(e, fwd);
    CHECK(free_vars(relabeled) == std::set<std::string>({"eta0", "eta1"}));
    CHECK(structurally_equal(substitute_names(relabeled, back), e));
    CHECK(eval(relabeled, {{"eta0", 2.0}, {"eta1", 1.0}}) ==
          eval(e, {{"x1", 2.0}, {"x4", 1.0}}));
}

TEST_CASE("quartic instance expressions evaluate as expected") {
    Assignment a;
    for (int i = 1; i <= 6; ++i) a["x" + std::to_string(i)] = 0.0;
    CHECK(ev("3*x1^2 + x4^4 - 50", a, x6) == -50.0);
    CHECK(ev("x3^6 + x6^4 - 100", a, x6) == -100.0);
    CHECK(ev("9*x2 + x5^6 - 100", a, x6) == -100.0);
    CHECK(ev("(x1 + 3)^4", a, x6) == 81.0);
    CHECK(ev("(x2 - 6)^4", a, x6) == 1296.0);
}
