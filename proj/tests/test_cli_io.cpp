#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "chapgas/commands.hpp"
#include "chapgas/config.hpp"
#include "chapgas/output.hpp"
#include "oracles.hpp"

using namespace chapgas;

namespace {

namespace fs = std::filesystem;

// Scratch directory per scenario, wiped on entry so reruns start clean.
std::string fresh_dir(const char* leaf) {
    const fs::path dir = fs::temp_directory_path() / "chapgas_io_tests" / leaf;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(bool(in));
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

bool mentions(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

// Collected validation failures for a config text expected to be rejected.
std::vector<std::string> failures_of(const std::string& text) {
    try {
        (void)parse_config_text(text);
    } catch (const ConfigValidationError& e) {
        return e.failures;
    }
    FAIL("expected ConfigValidationError");
    return {};
}

}  // namespace

TEST_CASE("a one-line config fills the documented defaults") {
    const RunConfig cfg = parse_config_text("family = canon\n");
    CHECK(cfg.family == "canon");
    CHECK(cfg.mu == 1.0);
    CHECK(cfg.p0 == 1.0);
    CHECK(cfg.quad_tol == 1e-10);
    CHECK(cfg.root_tol == 1e-10);
    CHECK(cfg.ode_dt == 1e-3);
    CHECK(cfg.window_lo == -8.0);
    CHECK(cfg.window_hi == 8.0);
    CHECK(cfg.check_n_grid == 256);
    CHECK(cfg.envelopes_eps == -1.0);  // resolved against the cusp bracket at run time
    CHECK(cfg.envelopes_n == 64);
    CHECK(cfg.smooth_t == -1.0);  // resolved to half the blowup time at run time
    CHECK(cfg.smooth_n == 401);
    CHECK(cfg.shock_w0 == 1e-3);
    CHECK(cfg.shock_delta_start == 1e-2);
    CHECK(cfg.shock_horizon == 0.3);
    CHECK(cfg.shock_rho_cap == 1e8);
    CHECK(cfg.audit_stride == 4);
    CHECK_FALSE(cfg.audit_strict_boundary);
    CHECK(cfg.fv.n_cells == 2000);
    CHECK(cfg.fv.cfl == 0.45);
    CHECK(cfg.fv.limiter == Limiter::minmod);
    CHECK(cfg.fv_t_end == -1.0);
    CHECK(cfg.output_dir == "out");

    // Comments, blank lines, and whitespace around '=' are all tolerated.
    const RunConfig spaced = parse_config_text(
        "# run setup\n"
        "\n"
        "  family   =   canon   # trailing comment\n"
        "\tmu = 2.5\n"
        "window.lo = -3 \n"
        "window.hi =  3\n"
        "fv.limiter = none\n"
        "audit.strict_boundary = true\n");
    CHECK(spaced.family == "canon");
    CHECK(spaced.mu == 2.5);
    CHECK(spaced.window_lo == -3.0);
    CHECK(spaced.window_hi == 3.0);
    CHECK(spaced.fv.limiter == Limiter::none);
    CHECK(spaced.audit_strict_boundary);

    // An empty config is just "all defaults".
    CHECK(parse_config_text("").family == "canon");
}

TEST_CASE("validation names every failing field and collects them all") {
    const auto quad = failures_of("family = canon\ntol.quad = -1e-10\n");
    REQUIRE(quad.size() == 1);
    CHECK(mentions(quad[0], "tol.quad"));

    // Unknown family: the message lists everything the registry can resolve.
    const auto fam = failures_of("family = quux\n");
    REQUIRE(fam.size() == 1);
    CHECK(mentions(fam[0], "unknown family 'quux'"));
    CHECK(mentions(fam[0], "canon"));
    CHECK(mentions(fam[0], "canon_perturbed"));
    CHECK(mentions(fam[0], "custom"));

    // Several independent problems surface together, not one at a time.
    const auto many = failures_of(
        "mu = -1\n"
        "tol.root = 0\n"
        "check.n_grid = 4\n"
        "fv.cfl = 1.5\n"
        "window.lo = 5\n"
        "window.hi = -5\n");
    CHECK(many.size() == 5);
    std::string joined;
    for (const auto& p : many) joined += p + "\n";
    CHECK(mentions(joined, "mu"));
    CHECK(mentions(joined, "tol.root"));
    CHECK(mentions(joined, "check.n_grid"));
    CHECK(mentions(joined, "fv.cfl"));
    CHECK(mentions(joined, "window.lo"));

    // Sentinel-defaulted keys are only validated when actually given.
    CHECK_NOTHROW(parse_config_text("family = canon\n"));
    CHECK(mentions(failures_of("smooth.t = -0.5\n")[0], "smooth.t"));
    CHECK(mentions(failures_of("envelopes.eps = 0\n")[0], "envelopes.eps"));
    CHECK(mentions(failures_of("fv.t_end = -1\n")[0], "fv.t_end"));

    const auto lim = failures_of("fv.limiter = superbee\n");
    REQUIRE(lim.size() == 1);
    CHECK(mentions(lim[0], "fv.limiter"));
    CHECK(mentions(lim[0], "superbee"));
}

TEST_CASE("parse errors carry the offending line") {
    auto line_of = [](const std::string& text) {
        try {
            (void)parse_config_text(text);
        } catch (const ConfigParseError& e) {
            return e.line;
        }
        FAIL("expected ConfigParseError");
        return -1;
    };

    CHECK(line_of("family = canon\nmu = 1\nthis is not an assignment\n") == 3);
    CHECK(line_of("family = canon\nmu = 1\nmu = 2\n") == 3);          // duplicate key
    CHECK(line_of("mu =\n") == 1);                                    // empty value
    CHECK(line_of("= 3\n") == 1);                                     // empty key
    CHECK(line_of("family = canon\nmu = fast\n") == 2);               // not a number
    CHECK(line_of("check.n_grid = 12.5\n") == 1);                     // not an integer
    CHECK(line_of("audit.strict_boundary = maybe\n") == 1);           // not a flag

    try {
        (void)parse_config_text("family = canon\nmu = fast\n");
        FAIL("expected ConfigParseError");
    } catch (const ConfigParseError& e) {
        CHECK(mentions(e.what(), "line 2"));
        CHECK(mentions(e.what(), "mu"));
        CHECK(mentions(e.what(), "fast"));
    }

    // Unknown keys are collected (with their line) rather than aborting the parse.
    const auto unk = failures_of("family = canon\nshok.w0 = 1e-3\n");
    REQUIRE(unk.size() == 1);
    CHECK(mentions(unk[0], "unknown key 'shok.w0'"));
    CHECK(mentions(unk[0], "line 2"));
}

TEST_CASE("custom families accept either description style") {
    // Invariant style: both expressions plus an explicit domain.
    const RunConfig inv = parse_config_text(
        "family = custom\n"
        "lambda_minus.expr = -0.5 - tanh(x)\n"
        "lambda_plus.expr = 0.5 - tanh(x)\n"
        "domain.lo = -6\n"
        "domain.hi = 6\n"
        "window.lo = -4\n"
        "window.hi = 4\n");
    const InitialData di = inv.make_data();
    CHECK(di.x_lo == -6.0);
    CHECK(di.x_hi == 6.0);
    CHECK(di.lam_plus_0.f(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(di.lam_minus_0.f(1.0) == doctest::Approx(-0.5 - std::tanh(1.0)).epsilon(1e-15));

    // State style: (rho0, u0) resolves to the same invariants through mu.
    const RunConfig st = parse_config_text(
        "family = custom\n"
        "rho0.expr = 2\n"
        "u0.expr = -tanh(x)\n"
        "domain.lo = -6\n"
        "domain.hi = 6\n"
        "window.lo = -4\n"
        "window.hi = 4\n");
    const InitialData ds = st.make_data();
    CHECK(ds.lam_plus_0.f(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(ds.lam_minus_0.f(0.0) == doctest::Approx(-0.5).epsilon(1e-14));

    // Missing pieces are named individually.
    CHECK(mentions(failures_of("family = custom\n"
                               "lambda_minus.expr = -1 - tanh(x)\n"
                               "lambda_plus.expr = 1 - tanh(x)\n")[0],
                   "domain.lo"));
    const auto half = failures_of(
        "family = custom\n"
        "lambda_minus.expr = -1 - tanh(x)\n"
        "domain.lo = -6\n"
        "domain.hi = 6\n");
    CHECK(mentions(half[0], "lambda_plus.expr"));
    const auto both = failures_of(
        "family = custom\n"
        "lambda_minus.expr = -1 - tanh(x)\n"
        "lambda_plus.expr = 1 - tanh(x)\n"
        "rho0.expr = 2\n"
        "u0.expr = 0\n"
        "domain.lo = -6\n"
        "domain.hi = 6\n");
    CHECK(mentions(both[0], "not both"));
    const auto lonely = failures_of(
        "family = custom\n"
        "rho0.expr = 2\n"
        "u0.expr = 0\n"
        "domain.lo = -6\n");
    CHECK(mentions(lonely.front(), "together"));
    CHECK(mentions(failures_of("family = custom\n"
                               "rho0.expr = 2\n"
                               "u0.expr = 0\n"
                               "domain.lo = 6\n"
                               "domain.hi = -6\n")[0],
                   "domain.lo must be below"));

    // A window reaching outside the data domain is caught up front.
    const auto win = failures_of(
        "family = custom\n"
        "rho0.expr = 2\n"
        "u0.expr = -tanh(x)\n"
        "domain.lo = -2\n"
        "domain.hi = 2\n");
    CHECK(mentions(win[0], "not contained in the data domain"));

    // Malformed expression text is reported against its key.
    const auto bad = failures_of(
        "family = custom\n"
        "lambda_minus.expr = -1 - tnah(x)\n"
        "lambda_plus.expr = 1 - tanh(x\n"
        "domain.lo = -6\n"
        "domain.hi = 6\n"
        "window.lo = -4\n"
        "window.hi = 4\n");
    REQUIRE(bad.size() == 2);
    CHECK(mentions(bad[0], "lambda_minus.expr"));
    CHECK(mentions(bad[1], "lambda_plus.expr"));
}

TEST_CASE("series files are byte-exact deterministic CSV") {
    const std::string dir = fresh_dir("series");
    const std::string path = dir + "/table.csv";

    write_series(path, {"x", "rho"}, {{"1", "2"}, {"-0.5", "3e-05"}});
    const std::string bytes = slurp(path);
    CHECK(bytes == "x,rho\n1,2\n-0.5,3e-05\n");
    CHECK(bytes.find('\r') == std::string::npos);

    // Rectangularity is enforced per row, with the row named.
    CHECK_THROWS_WITH_AS(write_series(path, {"a", "b"}, {{"1", "2"}, {"3"}}),
                         doctest::Contains("row 1"), Error);
    CHECK_THROWS_AS(write_series(path, {}, {}), Error);
    CHECK_THROWS_AS(write_series("/nonexistent-dir/t.csv", {"a"}, {}), Error);

    // Full-precision cell formatting survives a round trip through text.
    const double vals[] = {1.0 / 3.0,
                           0.1,
                           3.14159265358979323846,
                           1e-300,
                           5e-324,  // smallest denormal
                           1.7976931348623157e308,
                           -7.0 / 11.0,
                           123456789.123456789,
                           oracle::kT0};
    for (const double v : vals) {
        const std::string s = fmt17(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
    CHECK(fmt17(1.0) == "1");
    CHECK(fmt17(-0.0) == "-0");
}

TEST_CASE("report entries are tagged with the tolerance they carry") {
    const Json j = tagged(0.25, 1e-8);
    CHECK(j["value"] == 0.25);
    CHECK(j["tol"] == 1e-8);
    CHECK(j.dump() == "{\"value\":0.25,\"tol\":1e-08}");

    const std::string dir = fresh_dir("report");
    const std::string path = dir + "/report.json";
    Json rep;
    rep["schema_version"] = 1;
    rep["t0"] = tagged(oracle::kT0, 1e-10);
    write_report(path, rep);
    const std::string bytes = slurp(path);
    CHECK(bytes.back() == '\n');
    const Json round = Json::parse(bytes);
    CHECK(round["t0"]["value"] == oracle::kT0);
    CHECK(round["schema_version"] == 1);
}

TEST_CASE("the blowup pipeline lands on the canonical point") {
    RunConfig cfg;
    cfg.output_dir = fresh_dir("blowup");
    const RunOutcome out = run_command("blowup", cfg);
    REQUIRE(out.exit_code == 0);
    CHECK(out.report["status"] == "ok");
    CHECK(out.report["assumptions"]["passed"] == true);

    const Json& res = out.report["results"];
    CHECK(double(res["t0"]["value"]) == doctest::Approx(oracle::kT0).epsilon(1e-9));
    CHECK(std::abs(double(res["x0"]["value"])) <= 1e-9);
    CHECK(double(res["alpha0"]["value"]) == doctest::Approx(oracle::kAlpha0).epsilon(1e-9));
    CHECK(double(res["fprime_alpha0"]["value"]) ==
          doctest::Approx(oracle::kFprimeAlpha0).epsilon(1e-7));
    CHECK(std::abs(double(res["jacobian_det_at_cusp"]["value"])) <= 1e-8);

    // The same report sits on disk, machine-readable.
    const Json disk = Json::parse(slurp(cfg.output_dir + "/report.json"));
    CHECK(disk["results"]["t0"]["value"] == res["t0"]["value"]);
    CHECK(disk["command"] == "blowup");
}

TEST_CASE("the same config reproduces the same bytes") {
    RunConfig cfg;
    cfg.smooth_n = 161;
    cfg.output_dir = fresh_dir("determinism");

    REQUIRE(run_command("smooth", cfg).exit_code == 0);
    const std::string report1 = slurp(cfg.output_dir + "/report.json");
    const std::string series1 = slurp(cfg.output_dir + "/smooth.csv");

    REQUIRE(run_command("smooth", cfg).exit_code == 0);
    CHECK(slurp(cfg.output_dir + "/report.json") == report1);
    CHECK(slurp(cfg.output_dir + "/smooth.csv") == series1);

    // Sanity on the series shape: header plus one row per sample point.
    CHECK(series1.rfind("x,rho,u,lam_minus,lam_plus\n", 0) == 0);
    CHECK(std::count(series1.begin(), series1.end(), '\n') == 162);
}

TEST_CASE("constant data fails the entrance checks with witnesses") {
    RunConfig cfg;
    cfg.family = "custom";
    cfg.rho0_expr = "2";
    cfg.u0_expr = "0";
    cfg.domain_lo = -5.0;
    cfg.domain_hi = 5.0;
    cfg.has_domain = true;
    cfg.window_lo = -4.0;
    cfg.window_hi = 4.0;
    cfg.output_dir = fresh_dir("check_const");

    const RunOutcome out = run_command("check", cfg);
    CHECK(out.exit_code == 3);
    CHECK(out.report["status"] == "error");
    CHECK(out.report["failure"]["stage"] == "assumptions");
    CHECK(out.report["failure"]["error_type"] == "assumptions_failed");
    CHECK(mentions(out.report["failure"]["message"], "H2"));
    CHECK(out.report["assumptions"]["h2_ok"] == false);
    CHECK(out.report["assumptions"]["passed"] == false);

    const Json& wit = out.report["assumptions"]["witnesses"];
    REQUIRE(wit.size() > 0);
    bool h2_witness = false;
    for (const Json& w : wit)
        h2_witness = h2_witness || mentions(w["assumption"], "H2");
    CHECK(h2_witness);

    // The failure report still lands on disk for machine consumption.
    const Json disk = Json::parse(slurp(cfg.output_dir + "/report.json"));
    CHECK(disk["status"] == "error");
    CHECK(disk["failure"]["error_type"] == "assumptions_failed");
}

TEST_CASE("sampling past the blowup time is a numerical failure, not a crash") {
    RunConfig cfg;
    cfg.smooth_t = 2.0;  // beyond t0 = ln 3
    cfg.output_dir = fresh_dir("smooth_late");

    const RunOutcome out = run_command("smooth", cfg);
    CHECK(out.exit_code == 4);
    CHECK(out.report["status"] == "error");
    CHECK(out.report["failure"]["stage"] == "smooth");
    CHECK(out.report["failure"]["error_type"] == "numerical");
    CHECK(mentions(out.report["failure"]["message"], "blowup time"));
    CHECK(fs::exists(cfg.output_dir + "/report.json"));
}

TEST_CASE("unknown commands are config errors with the menu attached") {
    RunConfig cfg;
    cfg.output_dir = fresh_dir("unknown_cmd");
    const RunOutcome out = run_command("frobnicate", cfg);
    CHECK(out.exit_code == 2);
    CHECK(out.report["failure"]["error_type"] == "config_validation");
    const std::string msg = out.report["failure"]["message"];
    for (const std::string& name : command_names()) CHECK(mentions(msg, name));

    const std::vector<std::string> expected = {"check",  "blowup", "envelopes", "smooth",
                                               "shock",  "audit",  "oracle"};
    CHECK(command_names() == expected);
}

TEST_CASE("config files round-trip through the filesystem") {
    const std::string dir = fresh_dir("config_file");
    const std::string path = dir + "/run.cfg";
    const std::string text =
        "family = canon_perturbed\n"
        "mu = 1.25\n"
        "window.lo = -3\n"
        "window.hi = 3\n"
        "shock.horizon = 0.2\n";
    {
        std::ofstream out(path, std::ios::binary);
        out << text;
    }
    const RunConfig from_file = parse_config_file(path);
    const RunConfig from_text = parse_config_text(text);
    CHECK(from_file.family == from_text.family);
    CHECK(from_file.mu == from_text.mu);
    CHECK(from_file.shock_horizon == from_text.shock_horizon);

    try {
        (void)parse_config_file(dir + "/missing.cfg");
        FAIL("expected ConfigParseError");
    } catch (const ConfigParseError& e) {
        CHECK(mentions(e.what(), "cannot open"));
        CHECK(e.line == 0);
    }
}
