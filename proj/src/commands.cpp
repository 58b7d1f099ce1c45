#include "chapgas/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "chapgas/characteristics.hpp"
#include "chapgas/delta_shock.hpp"
#include "chapgas/fv.hpp"

namespace chapgas {

namespace {

namespace fs = std::filesystem;

// Assumption check failed without an exception; maps to exit code 3.
struct AssumptionFailure : Error {
    using Error::Error;
};

Json config_echo(const RunConfig& cfg) {
    Json j;
    j["family"] = cfg.family;
    j["mu"] = cfg.mu;
    j["p0"] = cfg.p0;
    j["tol.quad"] = cfg.quad_tol;
    j["tol.root"] = cfg.root_tol;
    j["ode.dt"] = cfg.ode_dt;
    j["window"] = Json::array({cfg.window_lo, cfg.window_hi});
    j["output.dir"] = cfg.output_dir;
    return j;
}

Json assumption_json(const AssumptionReport& rep, const ChaplyginParams& prm) {
    Json j;
    j["h1_ok"] = rep.h1_ok;
    j["h2_ok"] = rep.h2_ok;
    j["h3_ok"] = rep.h3_ok;
    j["h4_ok"] = rep.h4_ok;
    j["h5_ok"] = rep.h5_ok;
    j["passed"] = rep.passed();
    if (rep.h3_ok) {
        j["alpha0"] = tagged(rep.alpha0, prm.root_tol);
        j["beta0"] = tagged(rep.beta0, prm.root_tol);
        j["f_alpha0"] = tagged(rep.f_alpha0, prm.root_tol);
        j["fprime_alpha0"] = tagged(rep.fprime_alpha0, prm.root_tol);
        j["cusp_bracket"] = Json::array({rep.sigma_alpha_lo, rep.sigma_alpha_hi});
    }
    Json w = Json::array();
    for (const auto& it : rep.witnesses)
        w.push_back(Json{{"assumption", it.assumption}, {"x", it.x}});
    j["witnesses"] = w;
    return j;
}

std::string failing_assumptions(const AssumptionReport& rep) {
    std::string s;
    auto add = [&s](bool ok, const char* name) {
        if (ok) return;
        if (!s.empty()) s += ", ";
        s += name;
    };
    add(rep.h1_ok, "H1 (strict invariant ordering)");
    add(rep.h2_ok, "H2 (strictly decreasing invariants)");
    add(rep.h3_ok, "H3 (solvable singular curve)");
    add(rep.h4_ok, "H4 (cusp zero of f)");
    add(rep.h5_ok, "H5 (f' < 0 at the cusp)");
    return s;
}

// Runs the assumption check, records it in the report, and builds the map.
CharacteristicMap make_map(const RunConfig& cfg, Json& rep, std::string& stage) {
    stage = "assumptions";
    const InitialData data = cfg.make_data();
    const ChaplyginParams prm = cfg.params();
    const AssumptionReport arep = check_assumptions(data, prm, cfg.check_n_grid);
    rep["assumptions"] = assumption_json(arep, prm);
    if (!arep.passed())
        throw AssumptionFailure("assumptions failed: " + failing_assumptions(arep));
    stage = "map";
    return CharacteristicMap(data, prm, arep);
}

std::string csv_path(const RunConfig& cfg, const char* name) {
    return (fs::path(cfg.output_dir) / name).string();
}

Json state_json(const DeltaShockState& s) {
    return Json{{"t", s.t}, {"x", s.x}, {"u_delta", s.u_delta}, {"w", s.w}};
}

void cmd_check(const RunConfig& cfg, Json& rep, std::string& stage) {
    stage = "assumptions";
    const InitialData data = cfg.make_data();
    const ChaplyginParams prm = cfg.params();
    const AssumptionReport arep = check_assumptions(data, prm, cfg.check_n_grid);
    rep["assumptions"] = assumption_json(arep, prm);
    if (!arep.passed())
        throw AssumptionFailure("assumptions failed: " + failing_assumptions(arep));
}

void cmd_blowup(const RunConfig& cfg, Json& rep, std::string& stage) {
    const CharacteristicMap cm = make_map(cfg, rep, stage);
    stage = "blowup";
    const MapPoint bp = cm.blowup_point();
    const ChaplyginParams& prm = cm.params();
    Json res;
    res["t0"] = tagged(bp.t, prm.quad_tol);
    res["x0"] = tagged(bp.x, prm.quad_tol);
    res["alpha0"] = tagged(cm.alpha0(), prm.root_tol);
    res["beta0"] = tagged(cm.beta0(), prm.root_tol);
    res["fprime_alpha0"] = tagged(cm.report().fprime_alpha0, prm.root_tol);
    res["jacobian_det_at_cusp"] = tagged(cm.jacobian(cm.alpha0(), cm.beta0()).det, prm.root_tol);
    rep["results"] = res;
}

void cmd_envelopes(const RunConfig& cfg, Json& rep, std::string& stage) {
    const CharacteristicMap cm = make_map(cfg, rep, stage);
    stage = "envelopes";
    const AssumptionReport& arep = cm.report();
    const double eps = cfg.envelopes_eps > 0.0
                           ? cfg.envelopes_eps
                           : 0.5 * std::min(arep.alpha0 - arep.sigma_alpha_lo,
                                            arep.sigma_alpha_hi - arep.alpha0);
    const auto [left, right] = cm.envelopes(eps, cfg.envelopes_n);

    std::vector<std::vector<std::string>> rows;
    auto emit = [&rows](const Envelope& env, const char* side) {
        for (const MapPoint& p : env.samples)
            rows.push_back({side, fmt17(p.t), fmt17(p.x)});
    };
    emit(left, "left");
    emit(right, "right");
    stage = "output";
    write_series(csv_path(cfg, "envelopes.csv"), {"side", "t", "x"}, rows);

    const ChaplyginParams& prm = cm.params();
    Json res;
    res["eps"] = eps;
    res["cusp"] = Json{{"t", tagged(cm.t0(), prm.quad_tol)}, {"x", tagged(cm.x0(), prm.quad_tol)}};
    auto arm = [&prm](const Envelope& env) {
        return Json{{"samples", env.samples.size()},
                    {"monotone_ok", env.monotone_ok},
                    {"concave_ok", env.concave_ok},
                    {"t_min", tagged(env.samples.front().t, prm.quad_tol)},
                    {"t_max", tagged(env.t_max(), prm.quad_tol)}};
    };
    res["left"] = arm(left);
    res["right"] = arm(right);
    rep["results"] = res;
}

void cmd_smooth(const RunConfig& cfg, Json& rep, std::string& stage) {
    const CharacteristicMap cm = make_map(cfg, rep, stage);
    stage = "smooth";
    const double ts = cfg.smooth_t >= 0.0 ? cfg.smooth_t : 0.5 * cm.t0();
    if (ts >= cm.t0())
        throw DomainError("smooth.t = " + std::to_string(ts) +
                          " is not before the blowup time t0 = " + std::to_string(cm.t0()));

    BranchTracker tracker(cm);
    std::vector<std::vector<std::string>> rows;
    double rho_min = 0.0, rho_max = 0.0;
    for (int i = 0; i < cfg.smooth_n; ++i) {
        const double x =
            cfg.window_lo + (cfg.window_hi - cfg.window_lo) * i / (cfg.smooth_n - 1);
        const SolutionRoot r = tracker.eval(ts, x);
        rows.push_back({fmt17(x), fmt17(r.state.rho), fmt17(r.state.u),
                        fmt17(r.invariants.lam_minus), fmt17(r.invariants.lam_plus)});
        rho_min = i == 0 ? r.state.rho : std::min(rho_min, r.state.rho);
        rho_max = i == 0 ? r.state.rho : std::max(rho_max, r.state.rho);
    }
    stage = "output";
    write_series(csv_path(cfg, "smooth.csv"), {"x", "rho", "u", "lam_minus", "lam_plus"}, rows);

    Json res;
    res["t"] = ts;
    res["n"] = cfg.smooth_n;
    res["rho_min"] = tagged(rho_min, cm.params().root_tol);
    res["rho_max"] = tagged(rho_max, cm.params().root_tol);
    rep["results"] = res;
}

DeltaShockTrajectory run_trajectory(const RunConfig& cfg, const CharacteristicMap& cm) {
    ShockOptions opts;
    opts.rho_cap = cfg.shock_rho_cap;
    return integrate_delta_shock(cm, cfg.shock_w0, cfg.shock_delta_start, cfg.shock_horizon,
                                 opts);
}

void write_trajectory_csv(const RunConfig& cfg, const DeltaShockTrajectory& traj) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(traj.samples.size());
    for (const TrajectorySample& s : traj.samples)
        rows.push_back({fmt17(s.state.t), fmt17(s.state.x), fmt17(s.state.u_delta),
                        fmt17(s.state.w), s.entropy_ok ? "1" : "0"});
    write_series(csv_path(cfg, "trajectory.csv"), {"t", "x", "u_delta", "w", "entropy_ok"},
                 rows);
}

Json trajectory_json(const DeltaShockTrajectory& traj, const RunConfig& cfg) {
    double margin = 0.0;
    bool w_increasing = true;
    for (size_t i = 0; i < traj.samples.size(); ++i) {
        const double m = entropy_margin(traj.samples[i]);
        margin = i == 0 ? m : std::min(margin, m);
        if (i > 0 && !(traj.samples[i].state.w > traj.samples[i - 1].state.w))
            w_increasing = false;
    }
    const TrajectorySample& last = traj.samples.back();
    // Trajectory quantities carry the ODE accuracy, driven by the base step.
    const double tol = cfg.ode_dt;
    Json j;
    j["t_start"] = traj.t_start;
    j["t_end"] = traj.t_end();
    j["samples"] = traj.samples.size();
    j["final"] = Json{{"x", tagged(last.state.x, tol)},
                      {"u_delta", tagged(last.state.u_delta, tol)},
                      {"w", tagged(last.state.w, tol)}};
    j["entropy_margin_min"] = tagged(margin, cfg.root_tol);
    j["w_strictly_increasing"] = w_increasing;
    return j;
}

void cmd_shock(const RunConfig& cfg, Json& rep, std::string& stage) {
    const CharacteristicMap cm = make_map(cfg, rep, stage);
    stage = "trajectory";
    const DeltaShockTrajectory traj = run_trajectory(cfg, cm);
    stage = "output";
    write_trajectory_csv(cfg, traj);
    rep["results"] = trajectory_json(traj, cfg);
}

void cmd_audit(const RunConfig& cfg, Json& rep, std::string& stage) {
    const CharacteristicMap cm = make_map(cfg, rep, stage);
    stage = "trajectory";
    const DeltaShockTrajectory traj = run_trajectory(cfg, cm);
    write_trajectory_csv(cfg, traj);

    stage = "audit";
    AuditOptions opts;
    opts.stride = cfg.audit_stride;
    opts.strict_boundary = cfg.audit_strict_boundary;
    const ConservationLedger led =
        conservation_audit(cm, traj, cfg.window_lo, cfg.window_hi, opts);

    // Per-row drift of the flux-corrected totals relative to the first row,
    // on the same scale as the ledger drift statistics.
    double m_scale = 1.0, p_scale = 1.0;
    for (const LedgerRow& r : led.rows) {
        m_scale = std::max(m_scale, std::abs(r.corrected_mass));
        p_scale = std::max(p_scale, std::abs(r.corrected_momentum));
    }
    std::vector<std::vector<std::string>> rows;
    rows.reserve(led.rows.size());
    for (const LedgerRow& r : led.rows) {
        const double md = (r.corrected_mass - led.rows.front().corrected_mass) / m_scale;
        const double pd =
            (r.corrected_momentum - led.rows.front().corrected_momentum) / p_scale;
        rows.push_back({fmt17(r.t), fmt17(r.s_rho), fmt17(r.s_rho_u), fmt17(r.delta_mass),
                        fmt17(r.delta_momentum), fmt17(r.raw_mass), fmt17(r.raw_momentum),
                        fmt17(r.influx_mass), fmt17(r.influx_momentum),
                        fmt17(r.corrected_mass), fmt17(r.corrected_momentum), fmt17(md),
                        fmt17(pd)});
    }
    stage = "output";
    write_series(csv_path(cfg, "audit.csv"),
                 {"t", "s_rho", "s_rho_u", "delta_mass", "delta_momentum", "raw_mass",
                  "raw_momentum", "influx_mass", "influx_momentum", "corrected_mass",
                  "corrected_momentum", "mass_drift", "momentum_drift"},
                 rows);

    Json res;
    res["trajectory"] = trajectory_json(traj, cfg);
    res["rows"] = led.rows.size();
    res["window"] = Json::array({led.x_lo, led.x_hi});
    res["mass_drift_rel"] = tagged(led.mass_drift_rel, cfg.quad_tol);
    res["momentum_drift_rel"] = tagged(led.momentum_drift_rel, cfg.quad_tol);
    res["raw_mass_drift_rel"] = tagged(led.raw_mass_drift_rel, cfg.quad_tol);
    res["raw_momentum_drift_rel"] = tagged(led.raw_momentum_drift_rel, cfg.quad_tol);
    res["boundary_mismatch"] = led.boundary_mismatch;
    res["boundary_mismatch_max"] = led.boundary_mismatch_max;
    rep["results"] = res;
}

void cmd_oracle(const RunConfig& cfg, Json& rep, std::string& stage) {
    const CharacteristicMap cm = make_map(cfg, rep, stage);
    stage = "fv";
    const double t_end = cfg.fv_t_end >= 0.0 ? cfg.fv_t_end : 0.5 * cm.t0();
    const Field1D field =
        fv_run(cm.data(), cm.params(), cfg.fv, cfg.window_lo, cfg.window_hi, t_end);

    stage = "compare";
    const FieldErrors err = compare(field, cm);

    stage = "output";
    std::vector<std::vector<std::string>> rows;
    rows.reserve(field.rho.size());
    for (int i = 0; i < field.size(); ++i)
        rows.push_back({fmt17(field.x_centers[i]), fmt17(field.rho[i]),
                        fmt17(field.m[i] / field.rho[i])});
    write_series(csv_path(cfg, "field.csv"), {"x", "rho", "u"}, rows);

    Json res;
    res["t_end"] = t_end;
    res["n_cells"] = cfg.fv.n_cells;
    res["dx"] = field.dx;
    // The oracle's own accuracy scale is its cell width.
    res["l1_rho"] = tagged(err.l1_rho, field.dx);
    res["linf_rho"] = tagged(err.linf_rho, field.dx);
    res["l1_u"] = tagged(err.l1_u, field.dx);
    res["linf_u"] = tagged(err.linf_u, field.dx);
    rep["results"] = res;
}

void fail(Json& rep, const std::string& stage, const std::string& type,
          const std::string& message) {
    rep["status"] = "error";
    Json f;
    f["stage"] = stage;
    f["error_type"] = type;
    f["message"] = message;
    rep["failure"] = f;
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {"check",  "blowup", "envelopes", "smooth",
                                                   "shock",  "audit",  "oracle"};
    return names;
}

RunOutcome run_command(const std::string& command, const RunConfig& cfg) {
    RunOutcome out;
    Json& rep = out.report;
    rep["schema_version"] = 1;
    rep["command"] = command;
    rep["status"] = "ok";
    rep["config"] = config_echo(cfg);

    std::string stage = "setup";
    try {
        const auto& names = command_names();
        if (std::find(names.begin(), names.end(), command) == names.end()) {
            std::string msg = "unknown command '" + command + "'; available:";
            for (const auto& n : names) msg += " " + n;
            throw ConfigValidationError({msg});
        }
        fs::create_directories(cfg.output_dir);
        if (command == "check") cmd_check(cfg, rep, stage);
        else if (command == "blowup") cmd_blowup(cfg, rep, stage);
        else if (command == "envelopes") cmd_envelopes(cfg, rep, stage);
        else if (command == "smooth") cmd_smooth(cfg, rep, stage);
        else if (command == "shock") cmd_shock(cfg, rep, stage);
        else if (command == "audit") cmd_audit(cfg, rep, stage);
        else cmd_oracle(cfg, rep, stage);
    } catch (const ConfigParseError& e) {
        fail(rep, stage, "config_parse", e.what());
        out.exit_code = 2;
    } catch (const ConfigValidationError& e) {
        fail(rep, stage, "config_validation", e.what());
        out.exit_code = 2;
    } catch (const ExprParseError& e) {
        fail(rep, stage, "expression_parse", e.what());
        out.exit_code = 2;
    } catch (const AssumptionFailure& e) {
        fail(rep, stage, "assumptions_failed", e.what());
        out.exit_code = 3;
    } catch (const NoCuspError& e) {
        fail(rep, stage, "no_cusp", e.what());
        out.exit_code = 3;
    } catch (const AmbiguousCuspError& e) {
        fail(rep, stage, "ambiguous_cusp", e.what());
        rep["failure"]["candidates"] = e.candidates;
        out.exit_code = 3;
    } catch (const EntropyViolatedError& e) {
        fail(rep, stage, "entropy_violated", e.what());
        rep["failure"]["sample"] = state_json(e.sample);
        out.exit_code = 4;
    } catch (const EnvelopeExitedError& e) {
        fail(rep, stage, "envelope_exited", e.what());
        rep["failure"]["sample"] = state_json(e.sample);
        out.exit_code = 4;
    } catch (const SideStateFailureError& e) {
        fail(rep, stage, "side_state_failure", e.what());
        rep["failure"]["sample"] = state_json(e.sample);
        out.exit_code = 4;
    } catch (const PositivityLossError& e) {
        fail(rep, stage, "positivity_loss", e.what());
        rep["failure"]["cell"] = e.cell;
        rep["failure"]["t"] = e.t;
        out.exit_code = 4;
    } catch (const RootFinderStallError& e) {
        fail(rep, stage, "root_finder_stall", e.what());
        rep["failure"]["residual"] = e.residual;
        out.exit_code = 4;
    } catch (const Error& e) {
        fail(rep, stage, "numerical", e.what());
        out.exit_code = 4;
    } catch (const std::exception& e) {
        fail(rep, stage, "internal", e.what());
        out.exit_code = 4;
    }

    try {
        fs::create_directories(cfg.output_dir);
        write_report((fs::path(cfg.output_dir) / "report.json").string(), rep);
    } catch (const std::exception& e) {
        if (out.exit_code == 0) out.exit_code = 4;
        fail(rep, "report", "io", e.what());
    }
    return out;
}

}  // namespace chapgas
