#include "dynbc/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>

#include "dynbc/errors.hpp"

namespace dynbc {

namespace {

constexpr std::array<std::pair<std::string_view, UnaryOp>, 8> kFunctions{{
    {"sin", UnaryOp::sin},
    {"cos", UnaryOp::cos},
    {"exp", UnaryOp::exp},
    {"log", UnaryOp::log},
    {"sqrt", UnaryOp::sqrt},
    {"abs", UnaryOp::abs},
    {"tanh", UnaryOp::tanh},
    {"sign", UnaryOp::sign},
}};

std::optional<UnaryOp> function_named(std::string_view name) {
    for (const auto& [n, op] : kFunctions) {
        if (n == name) return op;
    }
    return std::nullopt;
}

std::optional<Var> variable_named(std::string_view name) {
    if (name == "t") return Var::t;
    if (name == "x") return Var::x;
    if (name == "z") return Var::z;
    if (name == "p") return Var::p;
    return std::nullopt;
}

double apply_unary(UnaryOp op, double v) {
    switch (op) {
        case UnaryOp::neg: return -v;
        case UnaryOp::sin: return std::sin(v);
        case UnaryOp::cos: return std::cos(v);
        case UnaryOp::exp: return std::exp(v);
        case UnaryOp::log:
            if (!(v > 0.0)) {
                throw DomainError("log of non-positive argument " + std::to_string(v));
            }
            return std::log(v);
        case UnaryOp::sqrt:
            if (v < 0.0) throw DomainError("sqrt of negative argument " + std::to_string(v));
            return std::sqrt(v);
        case UnaryOp::abs: return std::abs(v);
        case UnaryOp::tanh: return std::tanh(v);
        case UnaryOp::sign: return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    }
    return v;
}

double apply_binary(BinaryOp op, double a, double b) {
    switch (op) {
        case BinaryOp::add: return a + b;
        case BinaryOp::sub: return a - b;
        case BinaryOp::mul: return a * b;
        case BinaryOp::div:
            if (b == 0.0) throw DomainError("division by zero");
            return a / b;
        case BinaryOp::pow:
            if (b == 2.0) return a * a;
            if (a < 0.0 && b != std::trunc(b)) {
                throw DomainError("negative base " + std::to_string(a) +
                                  " raised to non-integer power");
            }
            if (a == 0.0 && b < 0.0) throw DomainError("zero raised to negative power");
            return std::pow(a, b);
    }
    return 0.0;
}

// ---------------------------------------------------------------- lexer

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen, rparen, end };

struct Token {
    Tok kind;
    std::size_t offset;
    std::string_view text;
    double number = 0.0;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return current_; }
    Token take() {
        Token t = current_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ >= src_.size()) {
            current_ = {Tok::end, pos_, {}};
            return;
        }
        const std::size_t start = pos_;
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            lex_number(start);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                          src_[pos_] == '_')) {
                ++pos_;
            }
            current_ = {Tok::ident, start, src_.substr(start, pos_ - start)};
            return;
        }
        Tok kind{};
        switch (c) {
            case '+': kind = Tok::plus; break;
            case '-': kind = Tok::minus; break;
            case '*': kind = Tok::star; break;
            case '/': kind = Tok::slash; break;
            case '^': kind = Tok::caret; break;
            case '(': kind = Tok::lparen; break;
            case ')': kind = Tok::rparen; break;
            default:
                throw SyntaxError(std::string("unexpected character '") + c + "'", start);
        }
        ++pos_;
        current_ = {kind, start, src_.substr(start, 1)};
    }

    void lex_number(std::size_t start) {
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                ++pos_;
                ++n;
            }
            return n;
        };
        std::size_t n = digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            n += digits();
        }
        if (n == 0) throw SyntaxError("malformed number", start);
        // An exponent is only consumed when it is complete; "2e" leaves the
        // 'e' for the identifier rule.
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
            if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
                pos_ = look;
                digits();
            }
        }
        const std::string_view text = src_.substr(start, pos_ - start);
        double value = 0.0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
        if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
            throw SyntaxError("malformed number", start);
        }
        current_ = {Tok::number, start, text, value};
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    Token current_{Tok::end, 0, {}};
};

// --------------------------------------------------------------- parser

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) {}

    Expr parse_all() {
        Expr e = expression();
        if (lex_.peek().kind != Tok::end) {
            throw SyntaxError("unexpected '" + std::string(lex_.peek().text) + "'",
                              lex_.peek().offset);
        }
        return e;
    }

private:
    Expr expression() {
        Expr lhs = term();
        while (lex_.peek().kind == Tok::plus || lex_.peek().kind == Tok::minus) {
            const auto op = lex_.take().kind == Tok::plus ? BinaryOp::add : BinaryOp::sub;
            lhs = Expr::binary(op, lhs, term());
        }
        return lhs;
    }

    Expr term() {
        Expr lhs = unary();
        while (lex_.peek().kind == Tok::star || lex_.peek().kind == Tok::slash) {
            const auto op = lex_.take().kind == Tok::star ? BinaryOp::mul : BinaryOp::div;
            lhs = Expr::binary(op, lhs, unary());
        }
        return lhs;
    }

    Expr unary() {
        if (lex_.peek().kind == Tok::minus) {
            lex_.take();
            return Expr::unary(UnaryOp::neg, unary());
        }
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (lex_.peek().kind != Tok::caret) return base;
        lex_.take();
        const std::size_t at = lex_.peek().offset;
        const Expr exponent = unary();
        if (exponent.depends_on(Var::t) || exponent.depends_on(Var::x) ||
            exponent.depends_on(Var::z) || exponent.depends_on(Var::p)) {
            throw SyntaxError("exponent must be a constant", at);
        }
        double value = 0.0;
        try {
            value = eval(exponent, Env{});
        } catch (const DomainError&) {
            throw SyntaxError("exponent does not evaluate to a number", at);
        }
        if (!std::isfinite(value)) throw SyntaxError("exponent is not finite", at);
        // A parsed literal exponent stays as written; composite constant
        // exponents such as (3/2) are folded.
        const Expr folded = exponent.is_constant() ? exponent : Expr::constant(value);
        return Expr::binary(BinaryOp::pow, base, folded);
    }

    Expr primary() {
        const Token tok = lex_.take();
        switch (tok.kind) {
            case Tok::number: return Expr::constant(tok.number);
            case Tok::lparen: {
                Expr inner = expression();
                expect(Tok::rparen, "')'");
                return inner;
            }
            case Tok::ident: return identifier(tok);
            case Tok::end: throw SyntaxError("unexpected end of input", tok.offset);
            default:
                throw SyntaxError("unexpected '" + std::string(tok.text) + "'", tok.offset);
        }
    }

    Expr identifier(const Token& tok) {
        if (auto fn = function_named(tok.text)) {
            expect(Tok::lparen, "'(' after function name");
            Expr arg = expression();
            expect(Tok::rparen, "')'");
            return Expr::unary(*fn, arg);
        }
        if (auto v = variable_named(tok.text)) return Expr::variable(*v);
        if (tok.text == "pi" || tok.text == "e") return Expr::named_constant(tok.text);
        throw UnknownIdentifier(std::string(tok.text), tok.offset);
    }

    void expect(Tok kind, const char* what) {
        if (lex_.peek().kind != kind) {
            throw SyntaxError(std::string("expected ") + what, lex_.peek().offset);
        }
        lex_.take();
    }

    Lexer lex_;
};

// -------------------------------------------------------------- printer

int precedence(const Expr& e) {
    const auto& v = e.node().v;
    if (const auto* b = std::get_if<Binary>(&v)) {
        switch (b->op) {
            case BinaryOp::add:
            case BinaryOp::sub: return 1;
            case BinaryOp::mul:
            case BinaryOp::div: return 2;
            case BinaryOp::pow: return 4;
        }
    }
    if (const auto* u = std::get_if<Unary>(&v); u && u->op == UnaryOp::neg) return 3;
    return 5;
}

std::string format_number(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

std::string print(const Expr& e);

std::string parens(const Expr& e) { return "(" + print(e) + ")"; }

std::string print(const Expr& e) {
    return std::visit(
        [&](const auto& n) -> std::string {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, Constant>) {
                if (!n.symbol.empty()) return n.symbol;
                if (n.value < 0.0) return "(-" + format_number(-n.value) + ")";
                return format_number(n.value);
            } else if constexpr (std::is_same_v<N, Variable>) {
                return std::string(to_string(n.var));
            } else if constexpr (std::is_same_v<N, Unary>) {
                if (n.op == UnaryOp::neg) {
                    const bool wrap = precedence(n.arg) <= 3;
                    return "-" + (wrap ? parens(n.arg) : print(n.arg));
                }
                return std::string(to_string(n.op)) + "(" + print(n.arg) + ")";
            } else {
                const int prec = precedence(e);
                if (n.op == BinaryOp::pow) {
                    const std::string base = precedence(n.lhs) == 5 ? print(n.lhs) : parens(n.lhs);
                    const double ex = n.rhs.constant_value();
                    const auto* c = std::get_if<Constant>(&n.rhs.node().v);
                    const std::string exp_text =
                        (c && !c->symbol.empty()) ? c->symbol : format_number(ex);
                    return base + "^" + exp_text;
                }
                const std::string lhs = precedence(n.lhs) < prec ? parens(n.lhs) : print(n.lhs);
                const int rp = precedence(n.rhs);
                const std::string rhs = (rp <= prec || rp == 3) ? parens(n.rhs) : print(n.rhs);
                const char* sym = n.op == BinaryOp::add   ? "+"
                                  : n.op == BinaryOp::sub ? "-"
                                  : n.op == BinaryOp::mul ? "*"
                                                          : "/";
                return lhs + sym + rhs;
            }
        },
        e.node().v);
}

// ------------------------------------------------- folding constructors

bool is_value(const Expr& e, double v) {
    const auto* c = std::get_if<Constant>(&e.node().v);
    return c && c->symbol.empty() && c->value == v;
}

Expr fold_unary(UnaryOp op, const Expr& a) {
    if (op == UnaryOp::neg) {
        if (const auto* u = std::get_if<Unary>(&a.node().v); u && u->op == UnaryOp::neg) {
            return u->arg;
        }
    }
    if (a.is_constant()) {
        try {
            return Expr::constant(apply_unary(op, a.constant_value()));
        } catch (const DomainError&) {
        }
    }
    return Expr::unary(op, a);
}

Expr fold_binary(BinaryOp op, const Expr& a, const Expr& b) {
    switch (op) {
        case BinaryOp::add:
            if (is_value(a, 0.0)) return b;
            if (is_value(b, 0.0)) return a;
            break;
        case BinaryOp::sub:
            if (is_value(b, 0.0)) return a;
            if (is_value(a, 0.0)) return fold_unary(UnaryOp::neg, b);
            break;
        case BinaryOp::mul:
            if (is_value(a, 0.0) || is_value(b, 0.0)) return Expr::constant(0.0);
            if (is_value(a, 1.0)) return b;
            if (is_value(b, 1.0)) return a;
            break;
        case BinaryOp::div:
            if (is_value(a, 0.0)) return Expr::constant(0.0);
            if (is_value(b, 1.0)) return a;
            break;
        case BinaryOp::pow:
            if (is_value(b, 1.0)) return a;
            if (is_value(b, 0.0)) return Expr::constant(1.0);
            break;
    }
    if (a.is_constant() && b.is_constant()) {
        try {
            return Expr::constant(apply_binary(op, a.constant_value(), b.constant_value()));
        } catch (const DomainError&) {
        }
    }
    return Expr::binary(op, a, b);
}

Expr add(const Expr& a, const Expr& b) { return fold_binary(BinaryOp::add, a, b); }
Expr sub(const Expr& a, const Expr& b) { return fold_binary(BinaryOp::sub, a, b); }
Expr mul(const Expr& a, const Expr& b) { return fold_binary(BinaryOp::mul, a, b); }
Expr div(const Expr& a, const Expr& b) { return fold_binary(BinaryOp::div, a, b); }
Expr pow(const Expr& a, double c) { return fold_binary(BinaryOp::pow, a, Expr::constant(c)); }
Expr neg(const Expr& a) { return fold_unary(UnaryOp::neg, a); }
Expr call(UnaryOp op, const Expr& a) { return fold_unary(op, a); }
Expr num(double v) { return Expr::constant(v); }

}  // namespace

// ------------------------------------------------------------------ Expr

std::string_view to_string(Var v) {
    switch (v) {
        case Var::t: return "t";
        case Var::x: return "x";
        case Var::z: return "z";
        case Var::p: return "p";
    }
    return "?";
}

std::string_view to_string(UnaryOp op) {
    if (op == UnaryOp::neg) return "-";
    for (const auto& [name, o] : kFunctions) {
        if (o == op) return name;
    }
    return "?";
}

Expr::Expr() : node_(std::make_shared<const ExprNode>(ExprNode{Constant{0.0, {}}})) {}

Expr Expr::constant(double value) {
    return Expr(std::make_shared<const ExprNode>(ExprNode{Constant{value, {}}}));
}

Expr Expr::named_constant(std::string_view name) {
    double value = 0.0;
    if (name == "pi") {
        value = std::numbers::pi;
    } else if (name == "e") {
        value = std::numbers::e;
    } else {
        throw UnknownIdentifier(std::string(name), 0);
    }
    return Expr(std::make_shared<const ExprNode>(ExprNode{Constant{value, std::string(name)}}));
}

Expr Expr::variable(Var v) { return Expr(std::make_shared<const ExprNode>(ExprNode{Variable{v}})); }

Expr Expr::unary(UnaryOp op, Expr arg) {
    return Expr(std::make_shared<const ExprNode>(ExprNode{Unary{op, std::move(arg)}}));
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
    if (op == BinaryOp::pow && !rhs.is_constant()) {
        throw DomainError("exponent must be a constant");
    }
    return Expr(std::make_shared<const ExprNode>(
        ExprNode{Binary{op, std::move(lhs), std::move(rhs)}}));
}

bool Expr::is_constant() const { return std::holds_alternative<Constant>(node_->v); }

double Expr::constant_value() const {
    if (const auto* c = std::get_if<Constant>(&node_->v)) return c->value;
    throw DomainError("expression is not a constant: " + str());
}

bool Expr::depends_on(Var v) const {
    return std::visit(
        [&](const auto& n) -> bool {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, Constant>) {
                return false;
            } else if constexpr (std::is_same_v<N, Variable>) {
                return n.var == v;
            } else if constexpr (std::is_same_v<N, Unary>) {
                return n.arg.depends_on(v);
            } else {
                return n.lhs.depends_on(v) || n.rhs.depends_on(v);
            }
        },
        node_->v);
}

std::size_t Expr::size() const {
    return std::visit(
        [](const auto& n) -> std::size_t {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, Unary>) {
                return 1 + n.arg.size();
            } else if constexpr (std::is_same_v<N, Binary>) {
                return 1 + n.lhs.size() + n.rhs.size();
            } else {
                return 1;
            }
        },
        node_->v);
}

std::string Expr::str() const { return print(*this); }

bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    const auto& va = a.node_->v;
    const auto& vb = b.node_->v;
    if (va.index() != vb.index()) return false;
    if (const auto* c = std::get_if<Constant>(&va)) {
        const auto& d = std::get<Constant>(vb);
        return c->value == d.value && c->symbol == d.symbol;
    }
    if (const auto* v = std::get_if<Variable>(&va)) return v->var == std::get<Variable>(vb).var;
    if (const auto* u = std::get_if<Unary>(&va)) {
        const auto& w = std::get<Unary>(vb);
        return u->op == w.op && u->arg == w.arg;
    }
    const auto& x = std::get<Binary>(va);
    const auto& y = std::get<Binary>(vb);
    return x.op == y.op && x.lhs == y.lhs && x.rhs == y.rhs;
}

Expr parse(std::string_view text) { return Parser(text).parse_all(); }

double eval(const Expr& e, const Env& env) {
    return std::visit(
        [&](const auto& n) -> double {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, Constant>) {
                return n.value;
            } else if constexpr (std::is_same_v<N, Variable>) {
                return env[n.var];
            } else if constexpr (std::is_same_v<N, Unary>) {
                try {
                    return apply_unary(n.op, eval(n.arg, env));
                } catch (const DomainError& err) {
                    if (n.op == UnaryOp::log || n.op == UnaryOp::sqrt) {
                        throw DomainError(std::string(err.what()) + " in '" + e.str() + "'");
                    }
                    throw;
                }
            } else {
                const double a = eval(n.lhs, env);
                const double b = eval(n.rhs, env);
                try {
                    return apply_binary(n.op, a, b);
                } catch (const DomainError& err) {
                    throw DomainError(std::string(err.what()) + " in '" + e.str() + "'");
                }
            }
        },
        e.node().v);
}

Expr diff(const Expr& e, Var v) {
    return std::visit(
        [&](const auto& n) -> Expr {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, Constant>) {
                return num(0.0);
            } else if constexpr (std::is_same_v<N, Variable>) {
                return num(n.var == v ? 1.0 : 0.0);
            } else if constexpr (std::is_same_v<N, Unary>) {
                const Expr& u = n.arg;
                const Expr du = diff(u, v);
                if (is_value(du, 0.0)) return num(0.0);
                switch (n.op) {
                    case UnaryOp::neg: return neg(du);
                    case UnaryOp::sin: return mul(call(UnaryOp::cos, u), du);
                    case UnaryOp::cos: return mul(neg(call(UnaryOp::sin, u)), du);
                    case UnaryOp::exp: return mul(e, du);
                    case UnaryOp::log: return div(du, u);
                    case UnaryOp::sqrt: return div(du, mul(num(2.0), e));
                    // abs'(0) := 0 through sign(0) = 0.
                    case UnaryOp::abs: return mul(call(UnaryOp::sign, u), du);
                    case UnaryOp::tanh: return mul(sub(num(1.0), pow(e, 2.0)), du);
                    case UnaryOp::sign: return num(0.0);
                }
                return num(0.0);
            } else {
                const Expr& l = n.lhs;
                const Expr& r = n.rhs;
                const Expr dl = diff(l, v);
                switch (n.op) {
                    case BinaryOp::add: return add(dl, diff(r, v));
                    case BinaryOp::sub: return sub(dl, diff(r, v));
                    case BinaryOp::mul: return add(mul(dl, r), mul(l, diff(r, v)));
                    case BinaryOp::div:
                        return div(sub(mul(dl, r), mul(l, diff(r, v))), pow(r, 2.0));
                    case BinaryOp::pow: {
                        const double c = r.constant_value();
                        return mul(mul(num(c), pow(l, c - 1.0)), dl);
                    }
                }
                return num(0.0);
            }
        },
        e.node().v);
}

// --------------------------------------------------------------- Program

Program::Program(const Expr& e) { emit(e, 1); }

void Program::emit(const Expr& e, int depth) {
    max_depth_ = std::max(max_depth_, depth);
    std::visit(
        [&](const auto& n) {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, Constant>) {
                code_.push_back({Code::constant, 0, n.value});
            } else if constexpr (std::is_same_v<N, Variable>) {
                code_.push_back({Code::variable, static_cast<std::uint8_t>(n.var), 0.0});
            } else if constexpr (std::is_same_v<N, Unary>) {
                emit(n.arg, depth);
                code_.push_back({Code::unary, static_cast<std::uint8_t>(n.op), 0.0});
            } else {
                emit(n.lhs, depth);
                emit(n.rhs, depth + 1);
                code_.push_back({Code::binary, static_cast<std::uint8_t>(n.op), 0.0});
            }
        },
        e.node().v);
}

double Program::operator()(const Env& env) const {
    constexpr int kInline = 64;
    std::array<double, kInline> small{};
    std::vector<double> large;
    double* stack = small.data();
    if (max_depth_ > kInline) {
        large.resize(static_cast<std::size_t>(max_depth_));
        stack = large.data();
    }
    int top = -1;
    for (const Instr& in : code_) {
        switch (in.code) {
            case Code::constant: stack[++top] = in.value; break;
            case Code::variable: stack[++top] = env[static_cast<Var>(in.op)]; break;
            case Code::unary:
                stack[top] = apply_unary(static_cast<UnaryOp>(in.op), stack[top]);
                break;
            case Code::binary: {
                const double b = stack[top--];
                stack[top] = apply_binary(static_cast<BinaryOp>(in.op), stack[top], b);
                break;
            }
        }
    }
    return top >= 0 ? stack[top] : 0.0;
}

}  // namespace dynbc
