#pragma once

// Flat key-value run configuration ("key = value" lines, '#' comments, dotted
// section keys). Parsing reports the offending line; validation collects every
// failure before throwing.

#include <string>

#include "chapgas/errors.hpp"
#include "chapgas/fv.hpp"
#include "chapgas/gas_model.hpp"
#include "chapgas/initial_data.hpp"

namespace chapgas {

struct RunConfig {
    std::string family = "canon";

    double mu = 1.0;
    double p0 = 1.0;
    double quad_tol = 1e-10;
    double root_tol = 1e-10;
    double ode_dt = 1e-3;

    double window_lo = -8.0, window_hi = 8.0;

    int check_n_grid = 256;

    double envelopes_eps = -1.0;  // sentinel: half the cusp bracketing interval
    int envelopes_n = 64;

    double smooth_t = -1.0;  // sentinel: 0.5 * t0
    int smooth_n = 401;

    double shock_w0 = 1e-3;
    double shock_delta_start = 1e-2;
    double shock_horizon = 0.3;
    double shock_rho_cap = 1e8;

    int audit_stride = 4;
    bool audit_strict_boundary = false;

    SchemeConfig fv;          // fv.n_cells, fv.cfl, fv.limiter
    double fv_t_end = -1.0;   // sentinel: 0.5 * t0

    std::string output_dir = "out";

    // Custom family (family = custom): either both invariant expressions or
    // both state expressions, plus an explicit domain.
    std::string lam_minus_expr, lam_plus_expr;
    std::string rho0_expr, u0_expr;
    double domain_lo = 0.0, domain_hi = 0.0;
    bool has_domain = false;

    ChaplyginParams params() const {
        return ChaplyginParams{mu, p0, quad_tol, root_tol, ode_dt};
    }
    // Resolves the family (registry or custom expressions) into initial data.
    InitialData make_data() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

}  // namespace chapgas
