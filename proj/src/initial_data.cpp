#include "chapgas/initial_data.hpp"

namespace chapgas {

InitialData data_from_invariant_exprs(const Expr& lam_minus, const Expr& lam_plus,
                                      double x_lo, double x_hi) {
    if (!(x_lo < x_hi)) throw DomainError("initial data domain must satisfy x_lo < x_hi");
    InitialData d;
    d.lam_minus_0 = ScalarFunction::from_expr(lam_minus);
    d.lam_plus_0 = ScalarFunction::from_expr(lam_plus);
    d.x_lo = x_lo;
    d.x_hi = x_hi;
    return d;
}

InitialData data_from_state_exprs(const Expr& rho0, const Expr& u0, double mu,
                                  double x_lo, double x_hi) {
    Expr c = Expr::constant(mu) / rho0;
    return data_from_invariant_exprs(u0 - c, u0 + c, x_lo, x_hi);
}

}  // namespace chapgas
