#include "chapgas/root_finding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <boost/math/tools/roots.hpp>

#include "chapgas/errors.hpp"

namespace chapgas {

double solve_bracketed(const std::function<double(double)>& f, double a, double b) {
    if (a > b) std::swap(a, b);
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0))
        throw Error("solve_bracketed: endpoints do not bracket a sign change");
    std::uintmax_t max_iter = 128;
    auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb,
                                               boost::math::tools::eps_tolerance<double>(52),
                                               max_iter);
    return 0.5 * (r.first + r.second);
}

Newton2Result newton2(const std::function<void(const std::array<double, 2>&, std::array<double, 2>&)>& fn,
                      const std::function<void(const std::array<double, 2>&, std::array<double, 4>&)>& jac,
                      std::array<double, 2> seed, const Newton2Options& opts) {
    Newton2Result out;
    auto clampp = [&](std::array<double, 2>& p) {
        p[0] = std::clamp(p[0], opts.lo0, opts.hi0);
        p[1] = std::clamp(p[1], opts.lo1, opts.hi1);
        if (opts.enforce_order && p[0] > p[1]) {
            const double m = 0.5 * (p[0] + p[1]);
            p[0] = p[1] = m;
        }
    };
    std::array<double, 2> p = seed;
    clampp(p);
    std::array<double, 2> F;
    fn(p, F);
    double res = std::max(std::abs(F[0]), std::abs(F[1]));
    std::array<double, 4> J;
    for (int it = 0; it < opts.max_iters; ++it) {
        out.iters = it;
        if (res <= opts.residual_tol) break;
        jac(p, J);
        const double det = J[0] * J[3] - J[1] * J[2];
        if (det == 0.0 || !std::isfinite(det)) break;
        const double dx0 = (-F[0] * J[3] + F[1] * J[1]) / det;
        const double dx1 = (-F[1] * J[0] + F[0] * J[2]) / det;
        double lambda = 1.0;
        bool improved = false;
        std::array<double, 2> q, Fq;
        for (int h = 0; h < 12; ++h) {
            q = {p[0] + lambda * dx0, p[1] + lambda * dx1};
            clampp(q);
            fn(q, Fq);
            const double rq = std::max(std::abs(Fq[0]), std::abs(Fq[1]));
            if (std::isfinite(rq) && rq < res) {
                p = q;
                F = Fq;
                res = rq;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!improved) break;
    }
    out.p = p;
    out.residual = res;
    out.converged = res <= opts.residual_tol;
    return out;
}

}  // namespace chapgas
