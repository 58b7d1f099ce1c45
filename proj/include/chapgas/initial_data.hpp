#pragma once

// Initial data for the characteristic machinery: the two invariant profiles
// Lambda_minus, Lambda_plus as analytically differentiable functions on a
// closed interval. Data is always supplied analytically (expressions or
// closures with exact derivatives); sampled input is out of scope so that
// monotonicity and curvature checks stay exact.

#include <cmath>
#include <functional>
#include <string>

#include "chapgas/errors.hpp"
#include "chapgas/expression.hpp"
#include "chapgas/gas_model.hpp"

namespace chapgas {

// A scalar function with two derivatives available.
struct ScalarFunction {
    std::function<double(double)> f, df, d2f;

    static ScalarFunction from_expr(const Expr& e) {
        Expr d1 = e.derivative();
        Expr d2 = d1.derivative();
        return {[e](double x) { return e(x); },
                [d1](double x) { return d1(x); },
                [d2](double x) { return d2(x); }};
    }
};

struct InitialData {
    ScalarFunction lam_minus_0;  // Lambda_minus = u0 - mu/rho0
    ScalarFunction lam_plus_0;   // Lambda_plus  = u0 + mu/rho0
    double x_lo = 0.0;
    double x_hi = 0.0;

    bool contains(double x) const { return x >= x_lo && x <= x_hi; }
    double span() const { return x_hi - x_lo; }

    void require_inside(double x, const char* what) const {
        if (!contains(x))
            throw DomainError(std::string(what) + " = " + std::to_string(x) +
                              " outside data domain [" + std::to_string(x_lo) + ", " +
                              std::to_string(x_hi) + "]");
    }

    // Initial physical state at x (inverts Lambda_pm).
    PhysState state_at(double x, const ChaplyginParams& p) const {
        return from_invariants({lam_minus_0.f(x), lam_plus_0.f(x)}, p);
    }
};

InitialData data_from_invariant_exprs(const Expr& lam_minus, const Expr& lam_plus,
                                      double x_lo, double x_hi);

// Builds Lambda_pm = u0 pm mu/rho0 by expression composition.
InitialData data_from_state_exprs(const Expr& rho0, const Expr& u0, double mu,
                                  double x_lo, double x_hi);

}  // namespace chapgas
