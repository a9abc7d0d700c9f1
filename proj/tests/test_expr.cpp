#include <cmath>
#include <random>
#include <string>

#include "doctest.h"
#include "dynbc/errors.hpp"
#include "dynbc/expr.hpp"

using namespace dynbc;

namespace {

Env at(double t, double x, double z, double p) { return Env{t, x, z, p}; }

// Random trees built from operations that stay finite for arguments in
// [-1, 1]: logs and roots are shifted away from their singularities and
// divisions are by 2 + sin(.).
std::string random_text(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, 12);
    std::uniform_real_distribution<double> val(0.1, 3.0);
    static const char* vars[] = {"t", "x", "z", "p"};
    if (depth == 0) {
        const int k = pick(rng) % 5;
        if (k == 4) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.3f", val(rng));
            return buf;
        }
        return vars[k];
    }
    const auto sub = [&] { return random_text(rng, depth - 1); };
    switch (pick(rng)) {
        case 0: return "(" + sub() + ")+(" + sub() + ")";
        case 1: return "(" + sub() + ")-(" + sub() + ")";
        case 2: return "(" + sub() + ")*(" + sub() + ")";
        case 3: return "(" + sub() + ")/(2+sin(" + sub() + "))";
        case 4: return "sin(" + sub() + ")";
        case 5: return "cos(" + sub() + ")";
        case 6: return "exp(tanh(" + sub() + "))";
        case 7: return "log(1+(" + sub() + ")^2)";
        case 8: return "sqrt(1+(" + sub() + ")^2)";
        case 9: return "tanh(" + sub() + ")";
        case 10: return "-(" + sub() + ")";
        case 11: return "(tanh(" + sub() + "))^3";
        default: return "abs(" + sub() + ")+1";
    }
}

double central_difference(const Expr& e, Var v, Env env, double h) {
    Env lo = env;
    Env hi = env;
    switch (v) {
        case Var::t: lo.t -= h; hi.t += h; break;
        case Var::x: lo.x -= h; hi.x += h; break;
        case Var::z: lo.z -= h; hi.z += h; break;
        case Var::p: lo.p -= h; hi.p += h; break;
    }
    return (eval(e, hi) - eval(e, lo)) / (2.0 * h);
}

}  // namespace

TEST_CASE("parse builds the expected tree") {
    const Expr e = parse("z*p^2 + sin(x)");
    const auto& top = std::get<Binary>(e.node().v);
    CHECK(top.op == BinaryOp::add);
    const auto& prod = std::get<Binary>(top.lhs.node().v);
    CHECK(prod.op == BinaryOp::mul);
    CHECK(std::get<Variable>(prod.lhs.node().v).var == Var::z);
    const auto& pw = std::get<Binary>(prod.rhs.node().v);
    CHECK(pw.op == BinaryOp::pow);
    CHECK(std::get<Variable>(pw.lhs.node().v).var == Var::p);
    CHECK(pw.rhs.constant_value() == 2.0);
    const auto& s = std::get<Unary>(top.rhs.node().v);
    CHECK(s.op == UnaryOp::sin);
    CHECK(std::get<Variable>(s.arg.node().v).var == Var::x);

    const Expr one = parse("1");
    CHECK(one.is_constant());
    CHECK(one.constant_value() == 1.0);
}

TEST_CASE("precedence and associativity") {
    CHECK(eval(parse("2+3*4"), {}) == 14.0);
    CHECK(eval(parse("-2^2"), {}) == -4.0);
    CHECK(eval(parse("2^3^2"), {}) == 512.0);
    CHECK(eval(parse("8/4/2"), {}) == 1.0);
    CHECK(eval(parse("1-2-3"), {}) == -4.0);
    CHECK(eval(parse("(1+p)^(3/2)"), at(0, 0, 0, 3)) == doctest::Approx(8.0));
    CHECK(eval(parse("2e-1*x"), at(0, 5, 0, 0)) == doctest::Approx(1.0));
    CHECK(eval(parse("2*e"), {}) == doctest::Approx(2.0 * std::exp(1.0)));
    CHECK(eval(parse("pi"), {}) == doctest::Approx(M_PI));
}

TEST_CASE("syntax errors carry offsets") {
    try {
        parse("q*(x)");
        FAIL("expected UnknownIdentifier");
    } catch (const UnknownIdentifier& e) {
        CHECK(e.offset() == 0);
        CHECK(e.name() == "q");
    }
    try {
        parse("x + foo");
        FAIL("expected UnknownIdentifier");
    } catch (const UnknownIdentifier& e) {
        CHECK(e.offset() == 4);
    }
    try {
        parse("1 + * 2");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.offset() == 4);
    }
    CHECK_THROWS_AS(parse("sin x"), SyntaxError);
    CHECK_THROWS_AS(parse("(1+x"), SyntaxError);
    CHECK_THROWS_AS(parse("x^p"), SyntaxError);
    CHECK_THROWS_AS(parse(""), SyntaxError);
    CHECK_THROWS_AS(parse("1 2"), SyntaxError);
}

TEST_CASE("evaluation") {
    CHECK(eval(parse("1+p^2"), at(0, 0, 0, 2)) == 5.0);
    CHECK(eval(parse("exp(0)*x"), at(0, 3, 0, 0)) == 3.0);
    CHECK_THROWS_AS(eval(parse("log(z)"), at(0, 0, -1, 0)), DomainError);
    CHECK_THROWS_AS(eval(parse("sqrt(z)"), at(0, 0, -1, 0)), DomainError);
    CHECK_THROWS_AS(eval(parse("1/x"), at(0, 0, 0, 0)), DomainError);
    CHECK_THROWS_AS(eval(parse("z^0.5"), at(0, 0, -4, 0)), DomainError);
    CHECK(eval(parse("z^3"), at(0, 0, -2, 0)) == -8.0);
    CHECK(eval(parse("abs(p)"), at(0, 0, 0, -1.5)) == 1.5);
}

TEST_CASE("compiled programs agree with the tree walker") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const Expr e = parse(random_text(rng, 5));
        const Program prog(e);
        const Env env = at(u(rng), u(rng), u(rng), u(rng));
        CHECK(prog(env) == eval(e, env));
    }
    CHECK_THROWS_AS(Program(parse("log(z)"))(at(0, 0, -1, 0)), DomainError);
}

TEST_CASE("symbolic derivatives: worked examples") {
    const Expr b0 = parse("3.5");
    const Expr lin = Expr::binary(BinaryOp::mul, b0, Expr::variable(Var::p));
    CHECK(diff(lin, Var::p) == b0);
    const Expr d = diff(parse("sin(x)*p^2"), Var::p);
    CHECK(eval(d, at(0, 0.3, 0, 1.7)) == doctest::Approx(std::sin(0.3) * 2 * 1.7));
    CHECK(d.str() == "sin(x)*(2*p)");
    const double v = eval(diff(parse("exp(p*z)"), Var::p), at(0, 0, 2, 1));
    CHECK(v == doctest::Approx(14.7781121978613).epsilon(1e-13));
    CHECK(eval(diff(parse("abs(p)"), Var::p), at(0, 0, 0, 0)) == 0.0);
    CHECK(eval(diff(parse("abs(p)"), Var::p), at(0, 0, 0, -2)) == -1.0);
    CHECK(diff(parse("t*x"), Var::z).is_constant());
}

TEST_CASE("derivatives match central differences on random trees") {
    std::mt19937_64 rng(20240917);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> depth(1, 6);
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
        const Expr e = parse(random_text(rng, depth(rng)));
        const Env env = at(u(rng), u(rng), u(rng), u(rng));
        for (Var v : {Var::t, Var::x, Var::z, Var::p}) {
            const double exact = eval(diff(e, v), env);
            const double fd = central_difference(e, v, env, 1e-5);
            // abs() is not differentiable at 0; skip samples straddling a kink.
            const double fd2 = central_difference(e, v, env, 5e-6);
            if (std::abs(fd - fd2) > 1e-4 * (1.0 + std::abs(fd))) continue;
            CHECK(std::abs(exact - fd) <= 1e-6 * (1.0 + std::abs(exact)));
            ++checked;
        }
    }
    CHECK(checked > 1000);
}

TEST_CASE("diff is linear") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const Expr a = parse(random_text(rng, 4));
        const Expr b = parse(random_text(rng, 4));
        const Env env = at(u(rng), u(rng), u(rng), u(rng));
        for (Var v : {Var::x, Var::p}) {
            const double lhs = eval(diff(Expr::binary(BinaryOp::add, a, b), v), env);
            const double rhs = eval(diff(a, v), env) + eval(diff(b, v), env);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
    }
}

TEST_CASE("printing round-trips through the parser") {
    for (const char* s : {"z*p^2 + sin(x)", "-(x-1)", "x-(z-1)", "1-(2-3)", "2/(3*x)", "(-p)^2",
                          "-p^2", "(x^2)^3", "p^-1*x", "exp(-t)*cos(x)", "--x", "pi*e", "x/(-2)",
                          "1e-7*p", "(1+p^2)^1.5", "abs(z)*sign(p)"}) {
        const std::string text = s;
        const Expr e = parse(text);
        const Expr back = parse(e.str());
        CHECK_MESSAGE(back == e, text << " printed as " << e.str());
    }
    std::mt19937_64 rng(3);
    for (int i = 0; i < 300; ++i) {
        const Expr e = parse(random_text(rng, 6));
        CHECK(parse(e.str()) == e);
    }
}

TEST_CASE("derivative output re-parses to an equal value") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const Expr d = diff(parse(random_text(rng, 4)), Var::x);
        const Env env = at(u(rng), u(rng), u(rng), u(rng));
        CHECK(eval(parse(d.str()), env) == doctest::Approx(eval(d, env)).epsilon(1e-12));
    }
}

TEST_CASE("dependency queries") {
    const Expr e = parse("sin(x)*p");
    CHECK(e.depends_on(Var::x));
    CHECK(e.depends_on(Var::p));
    CHECK_FALSE(e.depends_on(Var::t));
    CHECK_FALSE(e.depends_on(Var::z));
    CHECK(e.size() == 4);
    CHECK_THROWS_AS(Expr::binary(BinaryOp::pow, Expr::variable(Var::x), Expr::variable(Var::p)),
                    DomainError);
}
