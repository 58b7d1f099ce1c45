#include "chapgas/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "chapgas/errors.hpp"

namespace chapgas {

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol) {
    if (a == b) return 0.0;
    const double sign = a < b ? 1.0 : -1.0;
    if (sign < 0) std::swap(a, b);
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, 15, rel_tol);
    return sign * v;
}

namespace {

constexpr int kPanelOrder = 32;  // Chebyshev-Lobatto nodes per panel: order + 1

// Chebyshev interpolation coefficients on [-1,1] from Lobatto samples
// v_j = f(cos(pi j / N)), j = 0..N.
std::vector<double> cheb_coefficients(const std::vector<double>& v) {
    const int n = static_cast<int>(v.size()) - 1;
    std::vector<double> c(n + 1);
    const double pi = 3.14159265358979323846;
    for (int k = 0; k <= n; ++k) {
        double s = 0.5 * (v[0] + (k % 2 == 0 ? v[n] : -v[n]));
        for (int j = 1; j < n; ++j) s += v[j] * std::cos(pi * j * k / n);
        c[k] = (k == 0 || k == n ? 1.0 : 2.0) * s / n;
    }
    return c;
}

// Coefficients of the antiderivative of sum c_k T_k, normalized to vanish at
// xi = -1; the half-width factor rescales d(xi) to dx.
std::vector<double> cheb_integrate(const std::vector<double>& c, double half_width) {
    const int n = static_cast<int>(c.size()) - 1;
    std::vector<double> ic(n + 2, 0.0);
    auto coef = [&](int k) { return k <= n ? c[k] : 0.0; };
    for (int m = 1; m <= n + 1; ++m) {
        const double lo = (m == 1) ? 2.0 * coef(0) : coef(m - 1);
        ic[m] = half_width * (lo - coef(m + 1)) / (2.0 * m);
    }
    double at_minus_one = 0.0;
    for (int m = 1; m <= n + 1; ++m) at_minus_one += (m % 2 == 0 ? ic[m] : -ic[m]);
    ic[0] = -at_minus_one;
    return ic;
}

double clenshaw(const std::vector<double>& a, double xi) {
    double b1 = 0.0, b2 = 0.0;
    for (int k = static_cast<int>(a.size()) - 1; k >= 1; --k) {
        const double bk = 2.0 * xi * b1 - b2 + a[k];
        b2 = b1;
        b1 = bk;
    }
    return a[0] + xi * b1 - b2;
}

}  // namespace

Antiderivative::Antiderivative(std::function<double(double)> f, double x_lo, double x_hi,
                               double tol) {
    if (!(x_lo < x_hi)) throw DomainError("antiderivative domain must satisfy x_lo < x_hi");
    f_ = std::move(f);
    x_lo_ = x_lo;
    x_hi_ = x_hi;
    build_panel(f_, x_lo, x_hi, tol, 0);
    // Accumulate offsets so each panel's series continues the running integral.
    double run = 0.0;
    for (auto& p : panels_) {
        p.offset = run;
        run += clenshaw(p.icoef, 1.0);
    }
}

void Antiderivative::build_panel(const std::function<double(double)>& f, double a, double b,
                                 double tol, int depth) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    const int n = kPanelOrder;
    std::vector<double> v(n + 1);
    const double pi = 3.14159265358979323846;
    for (int j = 0; j <= n; ++j) v[j] = f(mid + half * std::cos(pi * j / n));
    std::vector<double> c = cheb_coefficients(v);
    double scale = 0.0;
    for (double ck : c) scale = std::max(scale, std::abs(ck));
    const double tail = std::max({std::abs(c[n]), std::abs(c[n - 1]), std::abs(c[n - 2])});
    const double cutoff = std::max(1e-15, 0.01 * tol) * std::max(scale, 1e-300);
    if (tail > cutoff && depth < 40) {
        if (panels_.size() > 8192)
            throw Error("antiderivative: panel budget exhausted (integrand not smooth?)");
        build_panel(f, a, mid, tol, depth + 1);
        build_panel(f, mid, b, tol, depth + 1);
        return;
    }
    Panel p;
    p.a = a;
    p.b = b;
    p.icoef = cheb_integrate(c, half);
    p.offset = 0.0;
    panels_.push_back(std::move(p));
}

const Antiderivative::Panel& Antiderivative::panel_at(double x) const {
    // First panel whose right edge is >= x.
    auto it = std::lower_bound(panels_.begin(), panels_.end(), x,
                               [](const Panel& p, double v) { return p.b < v; });
    if (it == panels_.end()) it = std::prev(panels_.end());
    return *it;
}

double Antiderivative::operator()(double x) const {
    const double slack = 1e-12 * (1.0 + std::abs(x_lo_) + std::abs(x_hi_));
    if (x < x_lo_ - slack || x > x_hi_ + slack)
        throw DomainError("antiderivative evaluated outside its domain");
    x = std::clamp(x, x_lo_, x_hi_);
    const Panel& p = panel_at(x);
    const double xi = (2.0 * x - (p.a + p.b)) / (p.b - p.a);
    return p.offset + clenshaw(p.icoef, std::clamp(xi, -1.0, 1.0));
}

double Antiderivative::total() const {
    const Panel& p = panels_.back();
    return p.offset + clenshaw(p.icoef, 1.0);
}

double Antiderivative::inverse(double y) const {
    const double hi = total();
    const double slack = 1e-11 * std::max(1.0, std::abs(hi));
    if (y < -slack || y > hi + slack)
        throw DomainError("antiderivative inverse: value outside range");
    y = std::clamp(y, 0.0, hi);
    // Locate the panel by its starting offset (offsets increase since f > 0).
    auto it = std::upper_bound(panels_.begin(), panels_.end(), y,
                               [](double v, const Panel& p) { return v < p.offset; });
    const Panel& p = (it == panels_.begin()) ? *it : *std::prev(it);

    double lo = p.a, up = p.b;
    double flo = operator()(lo) - y, fup = operator()(up) - y;
    if (flo > 0.0) return lo;
    if (fup < 0.0) return up;
    double x = lo + (up - lo) * (-flo) / std::max(fup - flo, 1e-300);
    for (int i = 0; i < 80; ++i) {
        const double r = operator()(x) - y;
        if (r > 0.0) up = x; else lo = x;
        const double d = derivative(x);
        double step = d > 0.0 ? r / d : 0.0;
        double xn = x - step;
        if (!(xn > lo && xn < up)) xn = 0.5 * (lo + up);  // bisect when Newton leaves bracket
        const double dx = std::abs(xn - x);
        x = xn;
        if (std::abs(r) <= 1e-14 * std::max(1.0, std::abs(y)) &&
            dx <= 1e-13 * std::max(1.0, std::abs(x)))
            break;
        if (up - lo <= 4e-16 * std::max(1.0, std::abs(x))) break;
    }
    return x;
}

}  // namespace chapgas
