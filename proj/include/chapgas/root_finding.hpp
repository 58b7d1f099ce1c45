#pragma once

// Root-finding kernels: bracketed scalar solves (TOMS 748 underneath) and a
// damped Newton iteration for 2x2 systems with analytic Jacobian.

#include <array>
#include <functional>

namespace chapgas {

// Refines a root of f in [a, b]; requires f(a) and f(b) of opposite sign
// (or zero). Throws Error if the bracket is invalid.
double solve_bracketed(const std::function<double(double)>& f, double a, double b);

struct Newton2Options {
    int max_iters = 50;
    double residual_tol = 1e-13;  // absolute on max-norm of F
    // Optional box constraint; iterates are clamped inside.
    double lo0 = -1e300, hi0 = 1e300, lo1 = -1e300, hi1 = 1e300;
    bool enforce_order = false;  // keep p[0] <= p[1]
};

struct Newton2Result {
    std::array<double, 2> p{0.0, 0.0};
    double residual = 1e300;
    int iters = 0;
    bool converged = false;
};

// Solves F(p) = 0 for p in R^2. fn fills F, jac fills the row-major Jacobian
// [dF0/dp0, dF0/dp1; dF1/dp0, dF1/dp1]. Step halving (up to 12 times) enforces
// monotone residual decrease.
Newton2Result newton2(const std::function<void(const std::array<double, 2>&, std::array<double, 2>&)>& fn,
                      const std::function<void(const std::array<double, 2>&, std::array<double, 4>&)>& jac,
                      std::array<double, 2> seed, const Newton2Options& opts);

}  // namespace chapgas
