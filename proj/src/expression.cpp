#include "chapgas/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <vector>

namespace chapgas {
namespace detail {

enum class Op { constant, variable, add, sub, mul, div, pow, neg, call };

enum class Fn { tanh_, sech_, exp_, cosh_, sinh_, log_, sqrt_, sin_, cos_ };

struct ExprNode {
    Op op;
    double value = 0.0;                    // constant
    Fn fn = Fn::tanh_;                     // call
    std::shared_ptr<const ExprNode> a, b;  // operands
};

using NodePtr = std::shared_ptr<const ExprNode>;

namespace {

NodePtr make_const(double v) {
    auto n = std::make_shared<ExprNode>();
    n->op = Op::constant;
    n->value = v;
    return n;
}

NodePtr make_var() {
    auto n = std::make_shared<ExprNode>();
    n->op = Op::variable;
    return n;
}

bool is_const(const NodePtr& n, double v) {
    return n->op == Op::constant && n->value == v;
}

NodePtr make_bin(Op op, NodePtr a, NodePtr b) {
    // Constant folding and neutral-element elimination keep symbolic
    // derivatives from ballooning.
    if (a->op == Op::constant && b->op == Op::constant) {
        switch (op) {
            case Op::add: return make_const(a->value + b->value);
            case Op::sub: return make_const(a->value - b->value);
            case Op::mul: return make_const(a->value * b->value);
            case Op::div: return make_const(a->value / b->value);
            case Op::pow: return make_const(std::pow(a->value, b->value));
            default: break;
        }
    }
    if (op == Op::add) {
        if (is_const(a, 0.0)) return b;
        if (is_const(b, 0.0)) return a;
    }
    if (op == Op::sub && is_const(b, 0.0)) return a;
    if (op == Op::mul) {
        if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
        if (is_const(a, 1.0)) return b;
        if (is_const(b, 1.0)) return a;
    }
    if (op == Op::div && is_const(a, 0.0)) return make_const(0.0);
    if (op == Op::div && is_const(b, 1.0)) return a;
    if (op == Op::pow && is_const(b, 1.0)) return a;
    if (op == Op::pow && is_const(b, 0.0)) return make_const(1.0);
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

NodePtr make_neg(NodePtr a) {
    if (a->op == Op::constant) return make_const(-a->value);
    auto n = std::make_shared<ExprNode>();
    n->op = Op::neg;
    n->a = std::move(a);
    return n;
}

NodePtr make_call(Fn fn, NodePtr a) {
    auto n = std::make_shared<ExprNode>();
    n->op = Op::call;
    n->fn = fn;
    n->a = std::move(a);
    return n;
}

double eval(const ExprNode& n, double x) {
    switch (n.op) {
        case Op::constant: return n.value;
        case Op::variable: return x;
        case Op::add: return eval(*n.a, x) + eval(*n.b, x);
        case Op::sub: return eval(*n.a, x) - eval(*n.b, x);
        case Op::mul: return eval(*n.a, x) * eval(*n.b, x);
        case Op::div: return eval(*n.a, x) / eval(*n.b, x);
        case Op::pow: return std::pow(eval(*n.a, x), eval(*n.b, x));
        case Op::neg: return -eval(*n.a, x);
        case Op::call: {
            const double v = eval(*n.a, x);
            switch (n.fn) {
                case Fn::tanh_: return std::tanh(v);
                case Fn::sech_: return 1.0 / std::cosh(v);
                case Fn::exp_: return std::exp(v);
                case Fn::cosh_: return std::cosh(v);
                case Fn::sinh_: return std::sinh(v);
                case Fn::log_: return std::log(v);
                case Fn::sqrt_: return std::sqrt(v);
                case Fn::sin_: return std::sin(v);
                case Fn::cos_: return std::cos(v);
            }
        }
    }
    return 0.0;  // unreachable
}

NodePtr diff(const NodePtr& n);

NodePtr diff_call(const ExprNode& n) {
    const NodePtr& u = n.a;
    NodePtr du = diff(u);
    NodePtr outer;
    switch (n.fn) {
        case Fn::tanh_: {  // 1 - tanh^2 = sech^2
            NodePtr s = make_call(Fn::sech_, u);
            outer = make_bin(Op::mul, s, s);
            break;
        }
        case Fn::sech_:  // -sech*tanh
            outer = make_neg(make_bin(Op::mul, make_call(Fn::sech_, u), make_call(Fn::tanh_, u)));
            break;
        case Fn::exp_: outer = make_call(Fn::exp_, u); break;
        case Fn::cosh_: outer = make_call(Fn::sinh_, u); break;
        case Fn::sinh_: outer = make_call(Fn::cosh_, u); break;
        case Fn::log_: outer = make_bin(Op::div, make_const(1.0), u); break;
        case Fn::sqrt_:
            outer = make_bin(Op::div, make_const(0.5), make_call(Fn::sqrt_, u));
            break;
        case Fn::sin_: outer = make_call(Fn::cos_, u); break;
        case Fn::cos_: outer = make_neg(make_call(Fn::sin_, u)); break;
    }
    return make_bin(Op::mul, outer, du);
}

NodePtr diff(const NodePtr& n) {
    switch (n->op) {
        case Op::constant: return make_const(0.0);
        case Op::variable: return make_const(1.0);
        case Op::add: return make_bin(Op::add, diff(n->a), diff(n->b));
        case Op::sub: return make_bin(Op::sub, diff(n->a), diff(n->b));
        case Op::mul:
            return make_bin(Op::add, make_bin(Op::mul, diff(n->a), n->b),
                            make_bin(Op::mul, n->a, diff(n->b)));
        case Op::div:
            // (u/v)' = u'/v - u v'/v^2
            return make_bin(Op::sub, make_bin(Op::div, diff(n->a), n->b),
                            make_bin(Op::div, make_bin(Op::mul, n->a, diff(n->b)),
                                     make_bin(Op::mul, n->b, n->b)));
        case Op::pow: {
            if (n->b->op == Op::constant) {
                // (u^c)' = c u^(c-1) u'
                const double c = n->b->value;
                return make_bin(Op::mul, make_const(c),
                                make_bin(Op::mul, make_bin(Op::pow, n->a, make_const(c - 1.0)),
                                         diff(n->a)));
            }
            // u^v = exp(v log u): (u^v)' = u^v (v' log u + v u'/u)
            NodePtr self = make_bin(Op::pow, n->a, n->b);
            NodePtr term1 = make_bin(Op::mul, diff(n->b), make_call(Fn::log_, n->a));
            NodePtr term2 = make_bin(Op::div, make_bin(Op::mul, n->b, diff(n->a)), n->a);
            return make_bin(Op::mul, self, make_bin(Op::add, term1, term2));
        }
        case Op::neg: return make_neg(diff(n->a));
        case Op::call: return diff_call(*n);
    }
    return make_const(0.0);  // unreachable
}

std::string fn_name(Fn f) {
    switch (f) {
        case Fn::tanh_: return "tanh";
        case Fn::sech_: return "sech";
        case Fn::exp_: return "exp";
        case Fn::cosh_: return "cosh";
        case Fn::sinh_: return "sinh";
        case Fn::log_: return "log";
        case Fn::sqrt_: return "sqrt";
        case Fn::sin_: return "sin";
        case Fn::cos_: return "cos";
    }
    return "?";
}

void print(const ExprNode& n, std::string& out) {
    switch (n.op) {
        case Op::constant: {
            char buf[32];
            // Full precision so parse(to_string(e)) reproduces e exactly.
            std::snprintf(buf, sizeof buf, "%.17g", n.value);
            out += buf;
            break;
        }
        case Op::variable: out += "x"; break;
        case Op::add: out += "("; print(*n.a, out); out += " + "; print(*n.b, out); out += ")"; break;
        case Op::sub: out += "("; print(*n.a, out); out += " - "; print(*n.b, out); out += ")"; break;
        case Op::mul: out += "("; print(*n.a, out); out += "*"; print(*n.b, out); out += ")"; break;
        case Op::div: out += "("; print(*n.a, out); out += "/"; print(*n.b, out); out += ")"; break;
        case Op::pow: out += "("; print(*n.a, out); out += "^"; print(*n.b, out); out += ")"; break;
        case Op::neg: out += "(-"; print(*n.a, out); out += ")"; break;
        case Op::call:
            out += fn_name(n.fn);
            out += "(";
            print(*n.a, out);
            out += ")";
            break;
    }
}

// Recursive-descent parser.
//   expr    := term (('+'|'-') term)*
//   term    := factor (('*'|'/') factor)*
//   factor  := '-' factor | '+' factor | power
//   power   := primary ('^' factor)?        (right-associative; -x^2 = -(x^2))
//   primary := number | 'pi' | 'x' | name '(' expr ')' | '(' expr ')'
class Parser {
public:
    explicit Parser(const std::string& text) : s_(text) {}

    NodePtr run() {
        NodePtr e = expr();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) { throw ExprParseError(msg, pos_); }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) { ++pos_; return true; }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    NodePtr expr() {
        NodePtr e = term();
        for (;;) {
            if (eat('+')) e = make_bin(Op::add, e, term());
            else if (eat('-')) e = make_bin(Op::sub, e, term());
            else return e;
        }
    }

    NodePtr term() {
        NodePtr e = factor();
        for (;;) {
            if (eat('*')) e = make_bin(Op::mul, e, factor());
            else if (eat('/')) e = make_bin(Op::div, e, factor());
            else return e;
        }
    }

    NodePtr factor() {
        if (eat('-')) return make_neg(factor());
        if (eat('+')) return factor();
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (eat('^')) return make_bin(Op::pow, base, factor());
        return base;
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
        if (eat('(')) {
            NodePtr e = expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr number() {
        const char* begin = s_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - begin);
        return make_const(v);
    }

    NodePtr name() {
        std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        const std::string id = s_.substr(start, pos_ - start);
        if (id == "x") return make_var();
        if (id == "pi") return make_const(3.14159265358979323846);
        static const std::map<std::string, Fn> fns = {
            {"tanh", Fn::tanh_}, {"sech", Fn::sech_}, {"exp", Fn::exp_},
            {"cosh", Fn::cosh_}, {"sinh", Fn::sinh_}, {"log", Fn::log_},
            {"sqrt", Fn::sqrt_}, {"sin", Fn::sin_},   {"cos", Fn::cos_}};
        auto it = fns.find(id);
        if (it == fns.end()) {
            pos_ = start;
            fail("unknown identifier '" + id + "'");
        }
        if (!eat('(')) fail("expected '(' after function name");
        NodePtr arg = expr();
        if (!eat(')')) fail("expected ')'");
        return make_call(it->second, arg);
    }
};

}  // namespace
}  // namespace detail

Expr Expr::parse(const std::string& text) {
    return Expr(detail::Parser(text).run());
}

Expr Expr::constant(double v) { return Expr(detail::make_const(v)); }

Expr Expr::variable() { return Expr(detail::make_var()); }

double Expr::operator()(double x) const { return detail::eval(*root_, x); }

Expr Expr::derivative() const { return Expr(detail::diff(root_)); }

std::string Expr::to_string() const {
    std::string out;
    detail::print(*root_, out);
    return out;
}

Expr operator+(const Expr& a, const Expr& b) {
    return Expr(detail::make_bin(detail::Op::add, a.root_, b.root_));
}
Expr operator-(const Expr& a, const Expr& b) {
    return Expr(detail::make_bin(detail::Op::sub, a.root_, b.root_));
}
Expr operator*(const Expr& a, const Expr& b) {
    return Expr(detail::make_bin(detail::Op::mul, a.root_, b.root_));
}
Expr operator/(const Expr& a, const Expr& b) {
    return Expr(detail::make_bin(detail::Op::div, a.root_, b.root_));
}

}  // namespace chapgas
