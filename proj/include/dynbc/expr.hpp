#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dynbc {

// The four symbols a coefficient expression may reference: time, space,
// solution value and gradient value.
enum class Var : std::uint8_t { t, x, z, p };

// `sign` is not part of the input grammar's documented function set but is
// accepted by the parser: it is what abs differentiates into.
enum class UnaryOp : std::uint8_t { neg, sin, cos, exp, log, sqrt, abs, tanh, sign };

enum class BinaryOp : std::uint8_t { add, sub, mul, div, pow };

struct Env {
    double t = 0.0;
    double x = 0.0;
    double z = 0.0;
    double p = 0.0;

    double operator[](Var v) const {
        switch (v) {
            case Var::t: return t;
            case Var::x: return x;
            case Var::z: return z;
            case Var::p: return p;
        }
        return 0.0;
    }
};

std::string_view to_string(Var v);
std::string_view to_string(UnaryOp op);

struct ExprNode;

// Immutable expression tree with shared subtrees. Copies are cheap.
class Expr {
public:
    Expr();  // the constant 0

    static Expr constant(double value);
    static Expr named_constant(std::string_view name);  // "pi" or "e"
    static Expr variable(Var v);
    static Expr unary(UnaryOp op, Expr arg);
    // Throws DomainError if op is pow and rhs is not a Constant.
    static Expr binary(BinaryOp op, Expr lhs, Expr rhs);

    const ExprNode& node() const { return *node_; }

    bool is_constant() const;
    // Value of a Constant node; throws DomainError for any other node.
    double constant_value() const;
    bool depends_on(Var v) const;
    std::size_t size() const;  // node count

    std::string str() const;

    friend bool operator==(const Expr& a, const Expr& b);

private:
    explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}
    std::shared_ptr<const ExprNode> node_;
};

struct Constant {
    double value;
    std::string symbol;  // "pi", "e" or empty
};

struct Variable {
    Var var;
};

struct Unary {
    UnaryOp op;
    Expr arg;
};

struct Binary {
    BinaryOp op;
    Expr lhs;
    Expr rhs;
};

struct ExprNode {
    std::variant<Constant, Variable, Unary, Binary> v;
};

// Grammar (precedence high to low): ^ (right assoc, constant exponent),
// unary -, * /, + -. Functions: sin cos exp log sqrt abs tanh sign.
// Identifiers: t x z p pi e.
Expr parse(std::string_view text);

double eval(const Expr& e, const Env& env);

// Exact symbolic derivative. Constants are folded and the identities
// 0+u, u*1, u*0, u^1 are applied; nothing else is simplified.
Expr diff(const Expr& e, Var v);

// Flattened postfix form of an Expr for hot loops. Same semantics and
// domain checks as eval().
class Program {
public:
    Program() = default;
    explicit Program(const Expr& e);

    double operator()(const Env& env) const;
    double operator()(double t, double x, double z, double p) const {
        return (*this)(Env{t, x, z, p});
    }

    bool empty() const { return code_.empty(); }

private:
    enum class Code : std::uint8_t { constant, variable, unary, binary };
    struct Instr {
        Code code;
        std::uint8_t op;  // Var, UnaryOp or BinaryOp depending on code
        double value;
    };
    void emit(const Expr& e, int depth);

    std::vector<Instr> code_;
    int max_depth_ = 0;
};

}  // namespace dynbc
