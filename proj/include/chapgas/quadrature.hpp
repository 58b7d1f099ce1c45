#pragma once

// Integration utilities: a thin adaptive Gauss-Kronrod wrapper for one-off
// integrals, and a Chebyshev-panel antiderivative cache for integrands that
// get evaluated at many upper limits (the characteristic-map integrals).

#include <functional>
#include <vector>

namespace chapgas {

// Definite integral of a smooth f over [a, b] to relative tolerance rel_tol.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol);

// F(x) = integral of f from x_lo to x, precomputed once as piecewise Chebyshev
// series (panels split adaptively until the coefficient tail is negligible).
// Evaluation is a panel lookup plus one Clenshaw recurrence; inverse() is
// available when f > 0 on the domain (F strictly increasing).
class Antiderivative {
public:
    Antiderivative() = default;
    Antiderivative(std::function<double(double)> f, double x_lo, double x_hi, double tol);

    double operator()(double x) const;
    double derivative(double x) const { return f_(x); }
    // Solves F(x) = y for x (requires strictly positive f). Newton with a
    // bisection guard; y must lie in [F(x_lo), F(x_hi)] within slack.
    double inverse(double y) const;

    double x_lo() const { return x_lo_; }
    double x_hi() const { return x_hi_; }
    double total() const;  // F(x_hi)

private:
    struct Panel {
        double a, b;                // panel interval
        std::vector<double> icoef;  // Chebyshev coefficients of the antiderivative,
                                    // scaled to the panel, zero at the left edge
        double offset;              // F(a)
    };

    void build_panel(const std::function<double(double)>& f, double a, double b,
                     double tol, int depth);
    const Panel& panel_at(double x) const;

    std::function<double(double)> f_;
    std::vector<Panel> panels_;
    double x_lo_ = 0.0, x_hi_ = 0.0;
};

}  // namespace chapgas
