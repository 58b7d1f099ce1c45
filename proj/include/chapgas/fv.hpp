#pragma once

// Finite-volume oracle for the conservative system: first-order Rusanov
// (local Lax-Friedrichs) update of (rho, rho u) with optional minmod
// reconstruction. Used to cross-check characteristic solutions before blowup
// and to exhibit numerical concentration near the blowup point.

#include <string>
#include <vector>

#include "chapgas/errors.hpp"
#include "chapgas/gas_model.hpp"
#include "chapgas/initial_data.hpp"

namespace chapgas {

class CharacteristicMap;

enum class Limiter { none, minmod };

struct SchemeConfig {
    int n_cells = 2000;
    double cfl = 0.45;  // must lie in (0, 0.9]
    Limiter limiter = Limiter::minmod;
};

struct Field1D {
    std::vector<double> x_centers;
    std::vector<double> rho;  // per-cell density, > 0
    std::vector<double> m;    // per-cell momentum rho*u
    double t = 0.0;
    double dx = 0.0;

    int size() const { return static_cast<int>(rho.size()); }
};

// Hard stop: the scheme never clamps or fabricates states. Expected only near
// the concentration time.
struct PositivityLossError : Error {
    PositivityLossError(const std::string& msg, int cell_, double t_)
        : Error(msg), cell(cell_), t(t_) {}
    int cell;
    double t;
};

// Midpoint sampling of the initial data onto n_cells uniform cells covering
// [x_lo, x_hi].
Field1D fv_init(const InitialData& data, const ChaplyginParams& params, const SchemeConfig& cfg,
                double x_lo, double x_hi);

// One conservative update; the time step is cfl * dx / max(|u| + c), capped at
// dt_cap. Constant-extrapolation ghost cells.
Field1D fv_step(const Field1D& field, const ChaplyginParams& params, const SchemeConfig& cfg,
                double dt_cap = 1e300);

// Repeated steps from t = 0 to exactly t_end (final step truncated).
Field1D fv_run(const InitialData& data, const ChaplyginParams& params, const SchemeConfig& cfg,
               double x_lo, double x_hi, double t_end);

struct FieldErrors {
    double l1_rho, linf_rho;
    double l1_u, linf_u;
};

// Discrete L1/Linf errors of the field against the characteristic solution at
// the field's time (classical domain only).
FieldErrors compare(const Field1D& field, const CharacteristicMap& cm);

}  // namespace chapgas
