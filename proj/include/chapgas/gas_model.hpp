#pragma once

// State algebra for the Chaplygin pressure law p = p0 - mu^2/rho and the
// bijection between (rho, u) and the Riemann invariants (lam_minus, lam_plus).

#include <algorithm>
#include <cmath>

#include "chapgas/errors.hpp"

namespace chapgas {

struct ChaplyginParams {
    double mu;              // momentum-density scale, > 0
    double p0 = 1.0;        // pressure offset; inert in jumps and smooth dynamics
    double quad_tol = 1e-10;  // quadrature relative tolerance
    double root_tol = 1e-10;  // root-finding residual tolerance
    double ode_dt = 1e-3;     // base ODE step
};

struct PhysState {
    double rho;  // density, > 0 (vacuum excluded)
    double u;    // velocity
};

struct RiemannPair {
    double lam_minus;  // u - mu/rho
    double lam_plus;   // u + mu/rho
};

inline double pressure(const PhysState& s, const ChaplyginParams& p) {
    return p.p0 - p.mu * p.mu / s.rho;
}

inline double sound_speed(const PhysState& s, const ChaplyginParams& p) {
    return p.mu / s.rho;
}

inline RiemannPair to_invariants(const PhysState& s, const ChaplyginParams& p) {
    const double c = sound_speed(s, p);
    return {s.u - c, s.u + c};
}

// Inverse map; the gap lam_plus - lam_minus = 2*mu/rho closing to zero is the
// concentration signal, reported relative to the invariant magnitudes so the
// threshold is scale-free.
inline PhysState from_invariants(const RiemannPair& r, const ChaplyginParams& p) {
    const double gap = r.lam_plus - r.lam_minus;
    const double scale = std::max({1.0, std::abs(r.lam_plus), std::abs(r.lam_minus)});
    if (gap <= p.root_tol * scale) throw DegeneratePairError(r.lam_minus, r.lam_plus);
    return {2.0 * p.mu / gap, 0.5 * (r.lam_plus + r.lam_minus)};
}

inline double mass_flux(const PhysState& s) { return s.rho * s.u; }

inline double momentum_flux(const PhysState& s, const ChaplyginParams& p) {
    return s.rho * s.u * s.u + pressure(s, p);
}

}  // namespace chapgas
