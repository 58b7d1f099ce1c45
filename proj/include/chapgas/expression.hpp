#pragma once

// Small arithmetic expressions in one variable `x`: +, -, *, /, ^, a few
// analytic functions (tanh, sech, exp, cosh, sinh, log, sqrt, sin, cos),
// numeric literals and `pi`. Derivatives are formed symbolically so that
// monotonicity checks and curvature formulas stay exact.

#include <memory>
#include <string>

#include "chapgas/errors.hpp"

namespace chapgas {

namespace detail { struct ExprNode; }

class Expr {
public:
    Expr() = default;

    static Expr parse(const std::string& text);   // throws ExprParseError
    static Expr constant(double v);
    static Expr variable();                        // the identity, x -> x

    double operator()(double x) const;
    Expr derivative() const;
    std::string to_string() const;
    bool valid() const { return root_ != nullptr; }

    friend Expr operator+(const Expr&, const Expr&);
    friend Expr operator-(const Expr&, const Expr&);
    friend Expr operator*(const Expr&, const Expr&);
    friend Expr operator/(const Expr&, const Expr&);

private:
    explicit Expr(std::shared_ptr<const detail::ExprNode> r) : root_(std::move(r)) {}
    std::shared_ptr<const detail::ExprNode> root_;
};

}  // namespace chapgas
