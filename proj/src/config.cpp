#include "chapgas/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "chapgas/expression.hpp"
#include "chapgas/families.hpp"

namespace chapgas {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

bool to_double(const std::string& s, double& out) {
    errno = 0;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && end != s.c_str() && errno == 0;
}

bool to_int(const std::string& s, int& out) {
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size() || end == s.c_str() || errno != 0) return false;
    if (v < -1000000000L || v > 1000000000L) return false;
    out = static_cast<int>(v);
    return true;
}

struct Assigner {
    RunConfig& cfg;
    int line_no;
    std::vector<std::string>& problems;

    double num(const std::string& key, const std::string& val) const {
        double v = 0.0;
        if (!to_double(val, v))
            throw ConfigParseError("key '" + key + "': not a number: '" + val + "'", line_no);
        return v;
    }
    int integer(const std::string& key, const std::string& val) const {
        int v = 0;
        if (!to_int(val, v))
            throw ConfigParseError("key '" + key + "': not an integer: '" + val + "'", line_no);
        return v;
    }
    bool flag(const std::string& key, const std::string& val) const {
        if (val == "true" || val == "1") return true;
        if (val == "false" || val == "0") return false;
        throw ConfigParseError("key '" + key + "': expected true/false, got '" + val + "'",
                               line_no);
    }

    // Returns false if the key is unknown (recorded as a validation problem).
    bool apply(const std::string& key, const std::string& val) {
        if (key == "family") cfg.family = val;
        else if (key == "mu") cfg.mu = num(key, val);
        else if (key == "p0") cfg.p0 = num(key, val);
        else if (key == "tol.quad") cfg.quad_tol = num(key, val);
        else if (key == "tol.root") cfg.root_tol = num(key, val);
        else if (key == "ode.dt") cfg.ode_dt = num(key, val);
        else if (key == "window.lo") cfg.window_lo = num(key, val);
        else if (key == "window.hi") cfg.window_hi = num(key, val);
        else if (key == "check.n_grid") cfg.check_n_grid = integer(key, val);
        else if (key == "envelopes.eps") cfg.envelopes_eps = num(key, val);
        else if (key == "envelopes.n") cfg.envelopes_n = integer(key, val);
        else if (key == "smooth.t") cfg.smooth_t = num(key, val);
        else if (key == "smooth.n") cfg.smooth_n = integer(key, val);
        else if (key == "shock.w0") cfg.shock_w0 = num(key, val);
        else if (key == "shock.delta_start") cfg.shock_delta_start = num(key, val);
        else if (key == "shock.horizon") cfg.shock_horizon = num(key, val);
        else if (key == "shock.rho_cap") cfg.shock_rho_cap = num(key, val);
        else if (key == "audit.stride") cfg.audit_stride = integer(key, val);
        else if (key == "audit.strict_boundary") cfg.audit_strict_boundary = flag(key, val);
        else if (key == "fv.n_cells") cfg.fv.n_cells = integer(key, val);
        else if (key == "fv.cfl") cfg.fv.cfl = num(key, val);
        else if (key == "fv.limiter") {
            if (val == "none") cfg.fv.limiter = Limiter::none;
            else if (val == "minmod") cfg.fv.limiter = Limiter::minmod;
            else problems.push_back("fv.limiter must be 'none' or 'minmod' (got '" + val + "')");
        }
        else if (key == "fv.t_end") cfg.fv_t_end = num(key, val);
        else if (key == "output.dir") cfg.output_dir = val;
        else if (key == "lambda_minus.expr") cfg.lam_minus_expr = val;
        else if (key == "lambda_plus.expr") cfg.lam_plus_expr = val;
        else if (key == "rho0.expr") cfg.rho0_expr = val;
        else if (key == "u0.expr") cfg.u0_expr = val;
        else if (key == "domain.lo") { cfg.domain_lo = num(key, val); }
        else if (key == "domain.hi") { cfg.domain_hi = num(key, val); }
        else return false;
        return true;
    }
};

void check_expr(const std::string& key, const std::string& text,
                std::vector<std::string>& problems) {
    try {
        (void)Expr::parse(text);
    } catch (const ExprParseError& e) {
        problems.push_back("key '" + key + "': " + e.what());
    }
}

void validate(const RunConfig& cfg, const std::set<std::string>& seen,
              std::vector<std::string>& problems) {
    auto require = [&problems](bool ok, const std::string& msg) {
        if (!ok) problems.push_back(msg);
    };

    require(cfg.mu > 0.0, "mu must be positive (got " + std::to_string(cfg.mu) + ")");
    require(cfg.quad_tol > 0.0, "tol.quad must be positive");
    require(cfg.root_tol > 0.0, "tol.root must be positive");
    require(cfg.ode_dt > 0.0, "ode.dt must be positive");
    require(cfg.window_lo < cfg.window_hi, "window.lo must be below window.hi");
    require(cfg.check_n_grid >= 16, "check.n_grid must be at least 16");
    if (seen.count("envelopes.eps"))
        require(cfg.envelopes_eps > 0.0, "envelopes.eps must be positive");
    require(cfg.envelopes_n >= 2, "envelopes.n must be at least 2");
    if (seen.count("smooth.t")) require(cfg.smooth_t >= 0.0, "smooth.t must be non-negative");
    require(cfg.smooth_n >= 2, "smooth.n must be at least 2");
    require(cfg.shock_w0 > 0.0, "shock.w0 must be positive");
    require(cfg.shock_delta_start > 0.0, "shock.delta_start must be positive");
    require(cfg.shock_horizon > 0.0, "shock.horizon must be positive");
    require(cfg.shock_rho_cap > 0.0, "shock.rho_cap must be positive");
    require(cfg.audit_stride >= 1, "audit.stride must be at least 1");
    require(cfg.fv.n_cells >= 3, "fv.n_cells must be at least 3");
    require(cfg.fv.cfl > 0.0 && cfg.fv.cfl <= 0.9, "fv.cfl must lie in (0, 0.9]");
    if (seen.count("fv.t_end")) require(cfg.fv_t_end >= 0.0, "fv.t_end must be non-negative");

    double dom_lo = 0.0, dom_hi = 0.0;
    bool dom_known = false;
    if (cfg.family == "custom") {
        if (!cfg.has_domain)
            problems.push_back("custom family requires domain.lo and domain.hi");
        else if (!(cfg.domain_lo < cfg.domain_hi))
            problems.push_back("domain.lo must be below domain.hi");
        else {
            dom_lo = cfg.domain_lo;
            dom_hi = cfg.domain_hi;
            dom_known = true;
        }
        const bool inv = !cfg.lam_minus_expr.empty() || !cfg.lam_plus_expr.empty();
        const bool state = !cfg.rho0_expr.empty() || !cfg.u0_expr.empty();
        if (inv && state)
            problems.push_back(
                "custom family: give lambda_minus.expr/lambda_plus.expr or rho0.expr/u0.expr, "
                "not both");
        else if (inv) {
            if (cfg.lam_minus_expr.empty() || cfg.lam_plus_expr.empty())
                problems.push_back(
                    "custom family: both lambda_minus.expr and lambda_plus.expr are required");
            else {
                check_expr("lambda_minus.expr", cfg.lam_minus_expr, problems);
                check_expr("lambda_plus.expr", cfg.lam_plus_expr, problems);
            }
        } else if (state) {
            if (cfg.rho0_expr.empty() || cfg.u0_expr.empty())
                problems.push_back("custom family: both rho0.expr and u0.expr are required");
            else {
                check_expr("rho0.expr", cfg.rho0_expr, problems);
                check_expr("u0.expr", cfg.u0_expr, problems);
            }
        } else {
            problems.push_back(
                "custom family requires lambda_minus.expr/lambda_plus.expr or "
                "rho0.expr/u0.expr");
        }
    } else {
        const auto names = family_names();
        bool known = false;
        for (const auto& n : names) known = known || n == cfg.family;
        if (!known) {
            std::string msg = "unknown family '" + cfg.family + "'; known families:";
            for (const auto& n : names) msg += " " + n;
            msg += " custom";
            problems.push_back(msg);
        } else {
            const InitialData d = make_family(cfg.family);
            dom_lo = d.x_lo;
            dom_hi = d.x_hi;
            dom_known = true;
        }
    }
    if (dom_known && cfg.window_lo < cfg.window_hi &&
        (cfg.window_lo < dom_lo || cfg.window_hi > dom_hi))
        problems.push_back("window [" + std::to_string(cfg.window_lo) + ", " +
                           std::to_string(cfg.window_hi) + "] not contained in the data domain [" +
                           std::to_string(dom_lo) + ", " + std::to_string(dom_hi) + "]");
}

}  // namespace

InitialData RunConfig::make_data() const {
    if (family == "custom") {
        if (!lam_minus_expr.empty())
            return data_from_invariant_exprs(Expr::parse(lam_minus_expr),
                                             Expr::parse(lam_plus_expr), domain_lo, domain_hi);
        return data_from_state_exprs(Expr::parse(rho0_expr), Expr::parse(u0_expr), mu, domain_lo,
                                     domain_hi);
    }
    return make_family(family);
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::vector<std::string> problems;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigParseError("expected 'key = value', got '" + line + "'", line_no);
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigParseError("empty key", line_no);
        if (val.empty())
            throw ConfigParseError("empty value for key '" + key + "'", line_no);
        if (!seen.insert(key).second)
            throw ConfigParseError("duplicate key '" + key + "'", line_no);
        if (key == "domain.lo" || key == "domain.hi") cfg.has_domain = true;
        Assigner a{cfg, line_no, problems};
        if (!a.apply(key, val))
            problems.push_back("unknown key '" + key + "' (line " + std::to_string(line_no) + ")");
    }
    if (seen.count("domain.lo") != seen.count("domain.hi")) {
        problems.push_back("domain.lo and domain.hi must be given together");
        cfg.has_domain = false;
    }
    validate(cfg, seen, problems);
    if (!problems.empty()) throw ConfigValidationError(problems);
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigParseError("cannot open config file '" + path + "'", 0);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace chapgas
