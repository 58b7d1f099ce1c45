#include "chapgas/fv.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>

#include "chapgas/characteristics.hpp"

namespace chapgas {

namespace {

void validate_cfg(const SchemeConfig& cfg) {
    if (cfg.n_cells < 3) throw DomainError("n_cells must be at least 3");
    if (!(cfg.cfl > 0.0) || cfg.cfl > 0.9) throw DomainError("cfl must lie in (0, 0.9]");
}

void validate_field(const Field1D& f) {
    const size_t n = f.rho.size();
    if (n < 3 || f.m.size() != n || f.x_centers.size() != n)
        throw DomainError("field arrays must have equal length >= 3");
    if (!(f.dx > 0.0)) throw DomainError("field dx must be positive");
}

double minmod(double a, double b) {
    if (a > 0.0 && b > 0.0) return std::min(a, b);
    if (a < 0.0 && b < 0.0) return std::max(a, b);
    return 0.0;
}

std::array<double, 2> phys_flux(double rho, double m, const ChaplyginParams& p) {
    const double u = m / rho;
    return {m, m * u + p.p0 - p.mu * p.mu / rho};
}

double wave_speed(double rho, double m, const ChaplyginParams& p) {
    return std::abs(m / rho) + p.mu / rho;
}

}  // namespace

Field1D fv_init(const InitialData& data, const ChaplyginParams& params, const SchemeConfig& cfg,
                double x_lo, double x_hi) {
    validate_cfg(cfg);
    if (!(x_lo < x_hi)) throw DomainError("window is empty");
    data.require_inside(x_lo, "window x_lo");
    data.require_inside(x_hi, "window x_hi");

    Field1D f;
    f.dx = (x_hi - x_lo) / cfg.n_cells;
    f.t = 0.0;
    f.x_centers.resize(cfg.n_cells);
    f.rho.resize(cfg.n_cells);
    f.m.resize(cfg.n_cells);
    for (int i = 0; i < cfg.n_cells; ++i) {
        const double x = x_lo + (i + 0.5) * f.dx;
        const double lm = data.lam_minus_0.f(x);
        const double lp = data.lam_plus_0.f(x);
        const PhysState st = from_invariants(RiemannPair{lm, lp}, params);
        f.x_centers[i] = x;
        f.rho[i] = st.rho;
        f.m[i] = st.rho * st.u;
    }
    return f;
}

Field1D fv_step(const Field1D& field, const ChaplyginParams& params, const SchemeConfig& cfg,
                double dt_cap) {
    validate_cfg(cfg);
    validate_field(field);
    const int n = field.size();

    // Work arrays with one constant-extrapolation ghost cell per end.
    std::vector<double> rho(n + 2), m(n + 2);
    for (int i = 0; i < n; ++i) {
        rho[i + 1] = field.rho[i];
        m[i + 1] = field.m[i];
    }
    rho[0] = rho[1];
    m[0] = m[1];
    rho[n + 1] = rho[n];
    m[n + 1] = m[n];

    double smax = 0.0;
    for (int i = 0; i < n + 2; ++i) {
        const int cell = std::clamp(i - 1, 0, n - 1);
        if (!(rho[i] > 0.0))
            throw PositivityLossError(
                "non-positive density entering a step at cell " + std::to_string(cell), cell,
                field.t);
        smax = std::max(smax, wave_speed(rho[i], m[i], params));
    }
    const double dt = std::min(cfg.cfl * field.dx / smax, dt_cap);

    // Optional minmod slopes (zero at the ghosts keeps the stencil closed).
    std::vector<double> srho(n + 2, 0.0), sm(n + 2, 0.0);
    if (cfg.limiter == Limiter::minmod) {
        for (int i = 1; i <= n; ++i) {
            srho[i] = minmod(rho[i] - rho[i - 1], rho[i + 1] - rho[i]);
            sm[i] = minmod(m[i] - m[i - 1], m[i + 1] - m[i]);
        }
    }

    // Interface fluxes: index k separates cell k-1 | k in ghosted numbering.
    std::vector<std::array<double, 2>> flux(n + 1);
    for (int k = 1; k <= n + 1; ++k) {
        const double rl = rho[k - 1] + 0.5 * srho[k - 1];
        const double ml = m[k - 1] + 0.5 * sm[k - 1];
        const double rr = rho[k] - 0.5 * srho[k];
        const double mr = m[k] - 0.5 * sm[k];
        if (!(rl > 0.0) || !(rr > 0.0))
            throw PositivityLossError(
                "reconstruction produced a non-positive interface density near cell " +
                    std::to_string(k - 1),
                k - 1, field.t);
        const auto fl = phys_flux(rl, ml, params);
        const auto fr = phys_flux(rr, mr, params);
        const double a = std::max(wave_speed(rl, ml, params), wave_speed(rr, mr, params));
        flux[k - 1] = {0.5 * (fl[0] + fr[0]) - 0.5 * a * (rr - rl),
                       0.5 * (fl[1] + fr[1]) - 0.5 * a * (mr - ml)};
    }

    Field1D out = field;
    out.t = field.t + dt;
    const double lam = dt / field.dx;
    for (int i = 0; i < n; ++i) {
        out.rho[i] = field.rho[i] - lam * (flux[i + 1][0] - flux[i][0]);
        out.m[i] = field.m[i] - lam * (flux[i + 1][1] - flux[i][1]);
        if (!(out.rho[i] > 0.0)) {
            char buf[128];
            std::snprintf(buf, sizeof buf,
                          "density lost positivity at cell %d (x=%.6g) advancing to t=%.6g", i,
                          field.x_centers[i], out.t);
            throw PositivityLossError(buf, i, out.t);
        }
    }
    return out;
}

Field1D fv_run(const InitialData& data, const ChaplyginParams& params, const SchemeConfig& cfg,
               double x_lo, double x_hi, double t_end) {
    if (!(t_end >= 0.0)) throw DomainError("t_end must be non-negative");
    Field1D f = fv_init(data, params, cfg, x_lo, x_hi);
    long guard = 0;
    while (f.t < t_end * (1.0 - 1e-15) && f.t < t_end) {
        if (++guard > 50'000'000) throw Error("step guard exceeded in fv_run");
        f = fv_step(f, params, cfg, t_end - f.t);
    }
    f.t = t_end;  // remove accumulated round-off in the time stamp
    return f;
}

FieldErrors compare(const Field1D& field, const CharacteristicMap& cm) {
    validate_field(field);
    if (cm.has_cusp() && field.t >= cm.t0())
        throw DomainError("comparison requires a classical-domain time (t < " +
                          std::to_string(cm.t0()) + ")");

    BranchTracker tracker(cm);
    FieldErrors e{0.0, 0.0, 0.0, 0.0};
    for (int i = 0; i < field.size(); ++i) {
        const SolutionRoot root = tracker.eval(field.t, field.x_centers[i]);
        const double drho = std::abs(field.rho[i] - root.state.rho);
        const double du = std::abs(field.m[i] / field.rho[i] - root.state.u);
        e.l1_rho += drho * field.dx;
        e.l1_u += du * field.dx;
        e.linf_rho = std::max(e.linf_rho, drho);
        e.linf_u = std::max(e.linf_u, du);
    }
    return e;
}

}  // namespace chapgas
