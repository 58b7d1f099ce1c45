#pragma once

// Test-side reference numerics, kept deliberately independent of the library:
// adaptive Simpson instead of Gauss-Kronrod/Chebyshev panels, bisection
// instead of TOMS 748, plus the frozen closed-form constants of the canonical
// family (mu = 1, Lp = 1/2 - tanh x, Lm = -1/2 - tanh x).

#include <cmath>
#include <cstdint>
#include <functional>

namespace oracle {

// Closed forms for the canonical family: the cusp foot is alpha0 = -artanh(1/2)
// (where tanh(-alpha0) - tanh(alpha0) = 1), beta0 = -alpha0, the first blowup
// is at (t, x) = (ln 3, 0), and the cusp slope is f'(alpha0) = -3/2.
inline constexpr double kAlpha0 = -0.54930614433405489;
inline constexpr double kBeta0 = 0.54930614433405489;
inline constexpr double kT0 = 1.0986122886681098;  // ln 3
inline constexpr double kX0 = 0.0;
inline constexpr double kFprimeAlpha0 = -1.5;

// Canonical parameter map in closed form: the invariant gap is identically 1,
// so t = beta - alpha and x = (alpha + beta)/2 - ln cosh(beta) + ln cosh(alpha).
inline double canon_t(double alpha, double beta) { return beta - alpha; }
inline double canon_x(double alpha, double beta) {
    return 0.5 * (alpha + beta) - std::log(std::cosh(beta)) + std::log(std::cosh(alpha));
}

// Density at the centerline x = 0 for the canonical family (symmetric feet
// alpha = -t/2, beta = t/2): rho = 2 / (1 - 2 tanh(t/2)).
inline double canon_center_density(double t) { return 2.0 / (1.0 - 2.0 * std::tanh(0.5 * t)); }

// Adaptive Simpson quadrature (Lyness-style error control).
inline double simpson_rec(const std::function<double(double)>& f, double a, double b,
                          double fa, double fm, double fb, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double flm = f(0.5 * (a + m));
    const double frm = f(0.5 * (m + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, 0.5 * eps, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, 0.5 * eps, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double eps = 1e-13) {
    if (a == b) return 0.0;
    return simpson_rec(f, a, b, f(a), f(0.5 * (a + b)), f(b), eps, 48);
}

// Fourth-order central difference for f'(x).
inline double dcentral(const std::function<double(double)>& f, double x, double h) {
    return (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
}

// Plain bisection; assumes f changes sign on [lo, hi].
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     int iters = 200) {
    double flo = f(lo);
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((flo <= 0.0) == (fm <= 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Small deterministic RNG (splitmix64) so "random" test points are
// reproducible across platforms without <random> distribution variance.
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    double next() {  // uniform in [0, 1)
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * next(); }
};

}  // namespace oracle
