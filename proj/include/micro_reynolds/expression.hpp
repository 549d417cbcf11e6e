#pragma once

// Analytic descriptors f(x, y) for configs.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?          right associative
//   primary := number | 'x' | 'y' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//   func    := sin | cos | sinh | cosh | exp
//
// -x^2 parses as -(x^2).

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace micro_reynolds {

class ExpressionError : public Error {
public:
    ExpressionError(const std::string& what, std::size_t position)
        : Error("ExpressionError", what + " at position " + std::to_string(position)), position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Compiled expression; cheap to copy and safe to evaluate concurrently.
class Expression {
public:
    static Expression parse(std::string_view text);

    double operator()(double x, double y) const { return eval(*root_, x, y); }
    const std::string& text() const noexcept { return text_; }
    /// true if the expression does not reference x or y
    bool is_constant() const noexcept { return constant_; }

private:
    enum class Op { Num, X, Y, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Sinh, Cosh, Exp };
    struct Node {
        Op op;
        double value = 0;
        std::unique_ptr<Node> a, b;
    };
    class Parser;

    static double eval(const Node& n, double x, double y) {
        switch (n.op) {
        case Op::Num: return n.value;
        case Op::X: return x;
        case Op::Y: return y;
        case Op::Add: return eval(*n.a, x, y) + eval(*n.b, x, y);
        case Op::Sub: return eval(*n.a, x, y) - eval(*n.b, x, y);
        case Op::Mul: return eval(*n.a, x, y) * eval(*n.b, x, y);
        case Op::Div: return eval(*n.a, x, y) / eval(*n.b, x, y);
        case Op::Pow: return std::pow(eval(*n.a, x, y), eval(*n.b, x, y));
        case Op::Neg: return -eval(*n.a, x, y);
        case Op::Sin: return std::sin(eval(*n.a, x, y));
        case Op::Cos: return std::cos(eval(*n.a, x, y));
        case Op::Sinh: return std::sinh(eval(*n.a, x, y));
        case Op::Cosh: return std::cosh(eval(*n.a, x, y));
        case Op::Exp: return std::exp(eval(*n.a, x, y));
        }
        return 0.0;
    }

    std::string text_;
    std::shared_ptr<const Node> root_;
    bool constant_ = true;
};

class Expression::Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    std::unique_ptr<Node> run() {
        auto n = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return n;
    }

    bool uses_xy = false;

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ExpressionError(msg, pos_); }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    static std::unique_ptr<Node> make(Op op, std::unique_ptr<Node> a = {}, std::unique_ptr<Node> b = {}) {
        auto n = std::make_unique<Node>();
        n->op = op;
        n->a = std::move(a);
        n->b = std::move(b);
        return n;
    }
    static std::unique_ptr<Node> number(double v) {
        auto n = make(Op::Num);
        n->value = v;
        return n;
    }

    std::unique_ptr<Node> expr() {
        auto lhs = term();
        for (;;) {
            if (accept('+')) lhs = make(Op::Add, std::move(lhs), term());
            else if (accept('-')) lhs = make(Op::Sub, std::move(lhs), term());
            else return lhs;
        }
    }

    std::unique_ptr<Node> term() {
        auto lhs = unary();
        for (;;) {
            if (accept('*')) lhs = make(Op::Mul, std::move(lhs), unary());
            else if (accept('/')) lhs = make(Op::Div, std::move(lhs), unary());
            else return lhs;
        }
    }

    std::unique_ptr<Node> unary() {
        if (accept('-')) return make(Op::Neg, unary());
        if (accept('+')) return unary();
        return power();
    }

    std::unique_ptr<Node> power() {
        auto base = primary();
        if (accept('^')) return make(Op::Pow, std::move(base), unary());
        return base;
    }

    std::unique_ptr<Node> primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of expression");
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const std::string tail(s_.substr(pos_));
            char* end = nullptr;
            const double v = std::strtod(tail.c_str(), &end);
            if (end == tail.c_str()) fail("malformed number");
            pos_ += static_cast<std::size_t>(end - tail.c_str());
            return number(v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            const std::string_view id = s_.substr(start, pos_ - start);
            if (id == "x" || id == "y") {
                uses_xy = true;
                return make(id == "x" ? Op::X : Op::Y);
            }
            if (id == "pi") return number(3.14159265358979323846);
            if (id == "e") return number(2.71828182845904523536);
            Op op;
            if (id == "sin") op = Op::Sin;
            else if (id == "cos") op = Op::Cos;
            else if (id == "sinh") op = Op::Sinh;
            else if (id == "cosh") op = Op::Cosh;
            else if (id == "exp") op = Op::Exp;
            else {
                pos_ = start;
                fail("unknown identifier '" + std::string(id) + "'");
            }
            if (!accept('(')) fail("expected '(' after " + std::string(id));
            auto arg = expr();
            if (!accept(')')) fail("expected ')'");
            return make(op, std::move(arg));
        }
        if (accept('(')) {
            auto inner = expr();
            if (!accept(')')) fail("expected ')'");
            return inner;
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

inline Expression Expression::parse(std::string_view text) {
    Parser p(text);
    Expression e;
    e.text_ = std::string(text);
    e.root_ = p.run();
    e.constant_ = !p.uses_xy;
    return e;
}

} // namespace micro_reynolds
