#include "chapgas/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "chapgas/errors.hpp"
#include "chapgas/root_finding.hpp"

namespace chapgas {

namespace {

std::string point_str(double t, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "(t=%.12g, x=%.12g)", t, x);
    return buf;
}

// Formulas on the initial profiles that are needed both by check_assumptions
// (before a CharacteristicMap exists) and by the map itself.
struct SigmaGeom {
    const InitialData& d;

    double lm(double z) const { return d.lam_minus_0.f(z); }
    double lp(double z) const { return d.lam_plus_0.f(z); }
    double dlm(double z) const { return d.lam_minus_0.df(z); }
    double dlp(double z) const { return d.lam_plus_0.df(z); }
    double d2lm(double z) const { return d.lam_minus_0.d2f(z); }
    double d2lp(double z) const { return d.lam_plus_0.d2f(z); }
    double gap(double z) const { return lp(z) - lm(z); }
    double gap_d(double z) const { return dlp(z) - dlm(z); }

    // beta(alpha) on Sigma: Lp(beta) = Lm(alpha); Lp strictly decreasing (H2).
    double beta_on_sigma(double alpha) const {
        const double v = lm(alpha);
        if (v < lp(d.x_hi))
            throw UnsolvableBetaError("beta(alpha) unsolvable: Lambda_minus(alpha) below the "
                                      "range of Lambda_plus at alpha = " + std::to_string(alpha),
                                      alpha);
        if (v > lp(d.x_lo))
            throw UnsolvableBetaError("beta(alpha) unsolvable: Lambda_minus(alpha) above the "
                                      "range of Lambda_plus at alpha = " + std::to_string(alpha),
                                      alpha);
        return solve_bracketed([&](double b) { return lp(b) - v; }, d.x_lo, d.x_hi);
    }

    double beta_prime(double alpha, double beta) const { return dlm(alpha) / dlp(beta); }

    // f(alpha) = Lm'(alpha)/gap(beta) - Lp'(beta)/gap(alpha): its zero marks
    // the cusp; sign of f' there decides nondegeneracy.
    double f(double alpha) const {
        const double b = beta_on_sigma(alpha);
        return dlm(alpha) / gap(b) - dlp(b) / gap(alpha);
    }

    double fprime(double alpha) const {
        const double b = beta_on_sigma(alpha);
        const double bp = beta_prime(alpha, b);
        return d2lm(alpha) / gap(b) - dlm(alpha) * gap_d(b) * bp / (gap(b) * gap(b)) -
               d2lp(b) * bp / gap(alpha) + dlp(b) * gap_d(alpha) / (gap(alpha) * gap(alpha));
    }

    // Tangent of Pi restricted to Sigma (chain rule on the analytic Jacobian).
    void sigma_tangent(double alpha, double& vt, double& vx) const {
        const double b = beta_on_sigma(alpha);
        const double bp = beta_prime(alpha, b);
        vt = -1.0 / gap(alpha) + bp / gap(b);
        vx = -lm(alpha) / gap(alpha) + lp(b) * bp / gap(b);
    }
};

}  // namespace

AssumptionReport check_assumptions(const InitialData& data, const ChaplyginParams& params,
                                   int n_grid) {
    if (n_grid < 16) throw DomainError("check_assumptions requires n_grid >= 16");
    SigmaGeom geom{data};
    AssumptionReport rep;

    bool h1 = true, h2 = true;
    for (int i = 0; i <= n_grid; ++i) {
        const double x = data.x_lo + data.span() * i / n_grid;
        if (!(geom.lm(x) < geom.lp(x))) {
            h1 = false;
            rep.witnesses.push_back({"H1", x});
        }
        if (!(geom.dlm(x) < 0.0)) {
            h2 = false;
            rep.witnesses.push_back({"H2-minus", x});
        }
        if (!(geom.dlp(x) < 0.0)) {
            h2 = false;
            rep.witnesses.push_back({"H2-plus", x});
        }
    }
    rep.h1_ok = h1;
    rep.h2_ok = h2;
    if (!h1 || !h2) return rep;  // cusp search meaningless without H1/H2

    // alpha-range on which beta(alpha) is solvable. Under H1/H2 the upper
    // constraint Lm(alpha) <= Lp(x_lo) holds everywhere, so only the lower
    // end of Lp's range cuts the interval.
    if (geom.lm(data.x_lo) < geom.lp(data.x_hi))
        throw NoCuspError("singular curve is empty: Lambda_minus stays below the range of "
                          "Lambda_plus on this domain");
    const double margin = 1e-7 * data.span();
    const double alpha_cut =
        solve_bracketed([&](double a) { return geom.lm(a) - geom.lp(data.x_hi); },
                        data.x_lo, data.x_hi);
    rep.sigma_alpha_lo = data.x_lo;
    rep.sigma_alpha_hi = alpha_cut - margin;
    if (!(rep.sigma_alpha_hi > rep.sigma_alpha_lo))
        throw NoCuspError("singular curve range degenerate on this domain");

    // Unique sign change of f on the solvable range.
    const int nf = std::max(n_grid, 128);
    std::vector<double> av(nf + 1), fv(nf + 1);
    for (int i = 0; i <= nf; ++i) {
        av[i] = rep.sigma_alpha_lo + (rep.sigma_alpha_hi - rep.sigma_alpha_lo) * i / nf;
        fv[i] = geom.f(av[i]);
    }
    std::vector<double> zeros;
    for (int i = 0; i < nf; ++i) {
        if (fv[i] == 0.0) {
            zeros.push_back(av[i]);
        } else if (fv[i] * fv[i + 1] < 0.0) {
            zeros.push_back(
                solve_bracketed([&](double a) { return geom.f(a); }, av[i], av[i + 1]));
        }
    }
    if (fv[nf] == 0.0) zeros.push_back(av[nf]);
    if (zeros.empty())
        throw NoCuspError("f has no sign change on the singular range [" +
                          std::to_string(rep.sigma_alpha_lo) + ", " +
                          std::to_string(rep.sigma_alpha_hi) + "]");
    if (zeros.size() > 1) {
        std::string msg = "multiple zeros of f found:";
        for (double z : zeros) msg += " " + std::to_string(z);
        throw AmbiguousCuspError(msg, zeros);
    }

    rep.alpha0 = zeros.front();
    rep.beta0 = geom.beta_on_sigma(rep.alpha0);
    rep.f_alpha0 = geom.f(rep.alpha0);
    rep.fprime_alpha0 = geom.fprime(rep.alpha0);
    rep.h3_ok = true;

    double fscale = 0.0;
    for (double v : fv) fscale = std::max(fscale, std::abs(v));
    rep.h4_ok = std::abs(rep.f_alpha0) <= params.root_tol * std::max(1.0, fscale);
    if (!rep.h4_ok) rep.witnesses.push_back({"H4", rep.alpha0});
    rep.h5_ok = rep.fprime_alpha0 < -params.root_tol;
    if (!rep.h5_ok) rep.witnesses.push_back({"H5", rep.alpha0});
    return rep;
}

// ---------------------------------------------------------------------------
// CharacteristicMap

CharacteristicMap::CharacteristicMap(InitialData data, const ChaplyginParams& params,
                                     const AssumptionReport& report)
    : data_(std::move(data)), params_(params), report_(report) {
    if (!report.passed())
        throw DomainError("characteristic map requires a fully passed assumption report");
    build_antiderivatives();
    const MapPoint p = pi_map(report.alpha0, report.beta0);
    t0_ = p.t;
    x0_ = p.x;
}

CharacteristicMap::CharacteristicMap(InitialData data, const ChaplyginParams& params, bool)
    : data_(std::move(data)), params_(params) {
    build_antiderivatives();
}

CharacteristicMap CharacteristicMap::diagnostic(InitialData data, const ChaplyginParams& params) {
    return CharacteristicMap(std::move(data), params, true);
}

void CharacteristicMap::build_antiderivatives() {
    const InitialData& d = data_;
    auto inv_gap = [d](double z) { return 1.0 / (d.lam_plus_0.f(z) - d.lam_minus_0.f(z)); };
    auto ratio = [d](double z) {
        const double lp = d.lam_plus_0.f(z), lm = d.lam_minus_0.f(z);
        return (lp + lm) / (lp - lm);
    };
    G_ = Antiderivative(inv_gap, d.x_lo, d.x_hi, params_.quad_tol);
    H_ = Antiderivative(ratio, d.x_lo, d.x_hi, params_.quad_tol);
}

const AssumptionReport& CharacteristicMap::report() const {
    if (!report_) throw DomainError("operation requires cusp data (diagnostic map has none)");
    return *report_;
}

MapPoint CharacteristicMap::pi_map(double alpha, double beta) const {
    data_.require_inside(alpha, "alpha");
    data_.require_inside(beta, "beta");
    if (alpha > beta) throw DomainError("pi_map requires alpha <= beta");
    return {G_(beta) - G_(alpha), 0.5 * (alpha + beta + H_(beta) - H_(alpha))};
}

JacobianEntries CharacteristicMap::jacobian(double alpha, double beta) const {
    data_.require_inside(alpha, "alpha");
    data_.require_inside(beta, "beta");
    if (alpha > beta) throw DomainError("jacobian requires alpha <= beta");
    SigmaGeom geom{data_};
    const double da = geom.gap(alpha), db = geom.gap(beta);
    JacobianEntries e;
    e.t_alpha = -1.0 / da;
    e.t_beta = 1.0 / db;
    e.x_alpha = -geom.lm(alpha) / da;
    e.x_beta = geom.lp(beta) / db;
    e.det = e.t_alpha * e.x_beta - e.t_beta * e.x_alpha;
    return e;
}

double CharacteristicMap::beta_on_sigma(double alpha) const {
    data_.require_inside(alpha, "alpha");
    return SigmaGeom{data_}.beta_on_sigma(alpha);
}

double CharacteristicMap::sigma_tangent_t(double alpha) const {
    double vt, vx;
    SigmaGeom{data_}.sigma_tangent(alpha, vt, vx);
    return vt;
}

double CharacteristicMap::f_of_alpha(double alpha) const { return SigmaGeom{data_}.f(alpha); }

double CharacteristicMap::fprime_of_alpha(double alpha) const {
    return SigmaGeom{data_}.fprime(alpha);
}

SingularCurve CharacteristicMap::singular_curve(double alpha_lo, double alpha_hi, int n) const {
    data_.require_inside(alpha_lo, "alpha_lo");
    data_.require_inside(alpha_hi, "alpha_hi");
    if (!(alpha_lo < alpha_hi) || n < 2)
        throw DomainError("singular_curve requires alpha_lo < alpha_hi and n >= 2");
    SingularCurve out;
    SigmaGeom geom{data_};
    for (int i = 0; i < n; ++i) {
        const double a = alpha_lo + (alpha_hi - alpha_lo) * i / (n - 1);
        try {
            const double b = geom.beta_on_sigma(a);
            out.samples.push_back({a, b, classify_singular_point(a)});
        } catch (const UnsolvableBetaError&) {
            out.skipped.push_back(a);
        }
    }
    return out;
}

PointKind CharacteristicMap::classify_singular_point(double alpha) const {
    const AssumptionReport& rep = report();
    SigmaGeom geom{data_};
    const double b = geom.beta_on_sigma(alpha);
    const double bp = geom.beta_prime(alpha, b);
    double vt, vx;
    geom.sigma_tangent(alpha, vt, vx);
    const double tol = params_.root_tol;
    const double st = tol * std::max({1.0, std::abs(1.0 / geom.gap(alpha)),
                                      std::abs(bp / geom.gap(b))});
    const double sx = tol * std::max({1.0, std::abs(geom.lm(alpha) / geom.gap(alpha)),
                                      std::abs(geom.lp(b) * bp / geom.gap(b))});
    if (std::abs(vt) > st || std::abs(vx) > sx) return PointKind::fold;

    // First derivative vanished: cusp requires a nonzero second derivative,
    // estimated by differencing the tangent across alpha.
    const double h = 1e-5 * std::max(1.0, std::abs(alpha));
    const double a_lo = std::max(alpha - h, rep.sigma_alpha_lo);
    const double a_hi = std::min(alpha + h, rep.sigma_alpha_hi);
    double vt0, vx0, vt1, vx1;
    geom.sigma_tangent(a_lo, vt0, vx0);
    geom.sigma_tangent(a_hi, vt1, vx1);
    const double d2t = (vt1 - vt0) / (a_hi - a_lo);
    const double d2x = (vx1 - vx0) / (a_hi - a_lo);
    if (std::max(std::abs(d2t), std::abs(d2x)) > std::sqrt(params_.root_tol)) return PointKind::cusp;
    throw DegenerateClassificationError(
        "singular point at alpha = " + std::to_string(alpha) +
        " has vanishing first and second derivatives");
}

MapPoint CharacteristicMap::blowup_point() const {
    report();  // cusp required
    return {t0_, x0_};
}

Envelope CharacteristicMap::envelope_arm(EnvelopeSide side, double eps_arm, int n) const {
    const AssumptionReport& rep = report();
    Envelope e;
    e.side = side;
    const double sgn = (side == EnvelopeSide::left) ? -1.0 : 1.0;
    SigmaGeom geom{data_};
    e.samples.reserve(n + 1);
    for (int i = 0; i <= n; ++i) {
        // Graded toward the cusp so early times are finely resolved.
        const double s = std::pow(static_cast<double>(i) / n, 1.25);
        const double a = rep.alpha0 + sgn * eps_arm * s;
        const double b = geom.beta_on_sigma(a);
        e.samples.push_back(pi_map(std::min(a, b), std::max(a, b)));
    }
    // Discrete Lemma-2.9-style flags: x strictly monotone in the t ordering,
    // and t concave as a function of x.
    bool mono = true;
    for (std::size_t i = 0; i + 1 < e.samples.size(); ++i) {
        const double dx = e.samples[i + 1].x - e.samples[i].x;
        if (side == EnvelopeSide::left ? dx <= 0.0 : dx >= 0.0) mono = false;
    }
    e.monotone_ok = mono;
    std::vector<MapPoint> by_x = e.samples;
    std::sort(by_x.begin(), by_x.end(), [](const MapPoint& a, const MapPoint& b) { return a.x < b.x; });
    bool concave = true;
    double prev_slope = 0.0;
    bool have_prev = false;
    for (std::size_t i = 0; i + 1 < by_x.size(); ++i) {
        const double dx = by_x[i + 1].x - by_x[i].x;
        if (dx <= 0.0) { concave = false; break; }
        const double slope = (by_x[i + 1].t - by_x[i].t) / dx;
        if (have_prev && slope > prev_slope + 1e-9 * std::max(1.0, std::abs(prev_slope)))
            concave = false;
        prev_slope = slope;
        have_prev = true;
    }
    e.concave_ok = concave;
    return e;
}

std::pair<Envelope, Envelope> CharacteristicMap::envelopes(double eps, int n) const {
    const AssumptionReport& rep = report();
    if (!(eps > 0.0) || n < 2) throw DomainError("envelopes requires eps > 0 and n >= 2");
    if (rep.alpha0 - eps < rep.sigma_alpha_lo || rep.alpha0 + eps > rep.sigma_alpha_hi)
        throw DomainError("envelope eps exceeds the cusp bracketing interval [" +
                          std::to_string(rep.sigma_alpha_lo) + ", " +
                          std::to_string(rep.sigma_alpha_hi) + "]");
    return {envelope_arm(EnvelopeSide::left, eps, n),
            envelope_arm(EnvelopeSide::right, eps, n)};
}

Envelope CharacteristicMap::envelope_to_time(EnvelopeSide side, double t_target, int n) const {
    const AssumptionReport& rep = report();
    const double sgn = (side == EnvelopeSide::left) ? -1.0 : 1.0;
    const double avail =
        (side == EnvelopeSide::left) ? rep.alpha0 - rep.sigma_alpha_lo
                                     : rep.sigma_alpha_hi - rep.alpha0;
    SigmaGeom geom{data_};
    auto t_sigma = [&](double a) {
        const double b = geom.beta_on_sigma(a);
        return G_(b) - G_(a);
    };
    double eps_arm = std::min(1e-3 * data_.span(), avail);
    if (t_target > t0_) {
        double h = eps_arm;
        while (h < avail && t_sigma(rep.alpha0 + sgn * h) < t_target)
            h = std::min(2.0 * h, avail);
        if (t_sigma(rep.alpha0 + sgn * h) < t_target) {
            eps_arm = avail;  // arm cannot reach t_target; return full reach
        } else {
            const double a_end = solve_bracketed(
                [&](double a) { return t_sigma(a) - t_target; }, rep.alpha0, rep.alpha0 + sgn * h);
            eps_arm = std::min(avail, 1.05 * std::abs(a_end - rep.alpha0));
        }
    }
    return envelope_arm(side, eps_arm, n);
}

double Envelope::x_at(double t) const {
    if (samples.size() < 2) throw DomainError("envelope has too few samples to interpolate");
    const double slack = 1e-12 * std::max(1.0, std::abs(t));
    if (t < samples.front().t - slack || t > samples.back().t + slack)
        throw DomainError("envelope interpolation outside covered time range at t = " +
                          std::to_string(t));
    auto it = std::lower_bound(samples.begin(), samples.end(), t,
                               [](const MapPoint& p, double v) { return p.t < v; });
    if (it == samples.begin()) ++it;
    if (it == samples.end()) --it;
    const MapPoint& p1 = *std::prev(it);
    const MapPoint& p2 = *it;
    const double dt = p2.t - p1.t;
    if (dt <= 0.0) return p1.x;
    const double s = std::clamp((t - p1.t) / dt, 0.0, 1.0);
    return p1.x + s * (p2.x - p1.x);
}

std::vector<MapPoint> CharacteristicMap::trace_characteristic(CharFamily family, double label,
                                                              int n) const {
    data_.require_inside(label, "label");
    if (n < 1) throw DomainError("trace_characteristic requires n >= 1");
    std::vector<MapPoint> out;
    out.reserve(n + 1);
    // Along fixed beta the curve parametrized by alpha has speed
    // dx/dt = x_alpha / t_alpha = Lambda_minus(alpha): the minus-speed
    // characteristic (it carries Lambda_plus(label)). Fixed alpha gives the
    // plus-speed curve carrying Lambda_minus(label).
    if (family == CharFamily::minus) {
        for (int i = 0; i <= n; ++i) {
            const double a = label + (data_.x_lo - label) * i / n;
            out.push_back(pi_map(a, label));
        }
    } else {
        for (int i = 0; i <= n; ++i) {
            const double b = label + (data_.x_hi - label) * i / n;
            out.push_back(pi_map(label, b));
        }
    }
    return out;
}

double CharacteristicMap::beta_at_time(double alpha, double t) const {
    return G_.inverse(G_(alpha) + t);
}

double CharacteristicMap::alpha_max_at_time(double t) const {
    const double ghi = G_.total();
    if (t > ghi * (1.0 + 1e-12))
        throw NoRootError("time t = " + std::to_string(t) +
                          " beyond characteristic coverage of the domain");
    return G_.inverse(std::max(0.0, ghi - t));
}

SolutionRoot CharacteristicMap::make_root(double alpha, double beta) const {
    SigmaGeom geom{data_};
    const RiemannPair inv{geom.lm(alpha), geom.lp(beta)};
    // Materialize leniently: past the fold the middle sheet has a negative
    // invariant gap, which we keep as the formal continuation (rho < 0 marks
    // the sheet as folded). Only an exactly closed gap is an error.
    const double gap = inv.lam_plus - inv.lam_minus;
    const double scale = std::max({1.0, std::abs(inv.lam_plus), std::abs(inv.lam_minus)});
    if (std::abs(gap) <= params_.root_tol * scale)
        throw DegeneratePairError(inv.lam_minus, inv.lam_plus);
    return {alpha, beta, inv, {2.0 * params_.mu / gap, 0.5 * (inv.lam_plus + inv.lam_minus)}};
}

std::optional<std::array<double, 2>> CharacteristicMap::polish_parameters(
    double t, double x, std::array<double, 2> seed) const {
    SigmaGeom geom{data_};
    auto fn = [&](const std::array<double, 2>& p, std::array<double, 2>& F) {
        F[0] = G_(p[1]) - G_(p[0]) - t;
        F[1] = 0.5 * (p[0] + p[1] + H_(p[1]) - H_(p[0])) - x;
    };
    auto jc = [&](const std::array<double, 2>& p, std::array<double, 4>& J) {
        const double da = geom.gap(p[0]), db = geom.gap(p[1]);
        J[0] = -1.0 / da;
        J[1] = 1.0 / db;
        J[2] = -geom.lm(p[0]) / da;
        J[3] = geom.lp(p[1]) / db;
    };
    Newton2Options opts;
    opts.lo0 = opts.lo1 = data_.x_lo;
    opts.hi0 = opts.hi1 = data_.x_hi;
    opts.enforce_order = true;
    opts.residual_tol = 1e-13 * (1.0 + std::abs(t) + std::abs(x));
    opts.max_iters = 60;
    const Newton2Result r = newton2(fn, jc, seed, opts);
    if (!r.converged) return std::nullopt;
    return r.p;
}

std::optional<SolutionRoot> CharacteristicMap::polish_root(double t, double x,
                                                           std::array<double, 2> seed) const {
    auto p = polish_parameters(t, x, seed);
    if (!p) return std::nullopt;
    return make_root((*p)[0], (*p)[1]);
}

std::vector<std::array<double, 2>> CharacteristicMap::solve_parameters(double t, double x) const {
    if (t < 0.0) throw DomainError("evaluate_solution requires t >= 0");
    const double ghi = G_.total();
    if (t > ghi * (1.0 + 1e-12))
        throw NoRootError("no characteristic reaches " + point_str(t, x) +
                          ": time beyond domain coverage");
    const double amax = alpha_max_at_time(t);
    const double alo = data_.x_lo;
    auto psi = [&](double a) {
        const double b = beta_at_time(a, t);
        return 0.5 * (a + b + H_(b) - H_(a)) - x;
    };

    std::vector<double> grid;
    auto add_window = [&](double lo, double hi, int pts) {
        lo = std::max(lo, alo);
        hi = std::min(hi, amax);
        if (!(hi > lo)) return;
        for (int i = 0; i <= pts; ++i) grid.push_back(lo + (hi - lo) * i / pts);
    };
    add_window(alo, amax, 240);
    if (report_) {
        const double a0 = report_->alpha0;
        add_window(a0 - 0.75, a0 + 0.75, 240);
        if (t > t0_) {
            const double w = std::min(1.0, std::max(0.03, 4.0 * std::sqrt(t - t0_)));
            add_window(a0 - w, a0 + w, 240);
        }
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.empty()) grid.push_back(alo);

    std::vector<double> pv(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) pv[i] = psi(grid[i]);

    std::vector<std::array<double, 2>> candidates;
    auto push_candidate = [&](double a) { candidates.push_back({a, beta_at_time(a, t)}); };
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (pv[i] == 0.0) push_candidate(grid[i]);
        else if (pv[i] * pv[i + 1] < 0.0)
            push_candidate(solve_bracketed(psi, grid[i], grid[i + 1]));
    }
    if (!pv.empty() && pv.back() == 0.0) push_candidate(grid.back());

    // Damped-Newton multistart over the admissible parameter triangle; the
    // scan above is the completeness fallback, this honors seeds that may
    // converge to roots the coarse grid missed.
    std::vector<std::array<double, 2>> polished;
    for (int i = 0; i < 8; ++i) {
        const double a_seed = alo + (amax - alo) * (i + 0.5) / 8.0;
        for (int j = 0; j < 8; ++j) {
            const double b_seed = a_seed + (data_.x_hi - a_seed) * (j + 0.5) / 8.0;
            if (auto p = polish_parameters(t, x, {a_seed, b_seed})) polished.push_back(*p);
        }
    }
    for (const auto& c : candidates) {
        auto p = polish_parameters(t, x, c);
        if (!p) {
            const MapPoint got = pi_map(c[0], c[1]);
            const double res = std::max(std::abs(got.t - t), std::abs(got.x - x));
            throw RootFinderStallError("root refinement stalled near alpha = " +
                                           std::to_string(c[0]) + " for " + point_str(t, x),
                                       res);
        }
        polished.push_back(*p);
    }

    std::sort(polished.begin(), polished.end(),
              [](const auto& a, const auto& b) { return a[0] < b[0]; });
    std::vector<std::array<double, 2>> roots;
    const double sep = 10.0 * params_.root_tol;
    // Near a fold the solution is conditioned like the square root of the
    // residual tolerance, so Newton scatter between copies of one root can
    // exceed `sep`. Two zeros count as distinct only if psi leaves the
    // residual band between them.
    const double band = 1e-12 * (1.0 + std::abs(t) + std::abs(x));
    for (const auto& p : polished) {
        if (!roots.empty()) {
            const auto& q = roots.back();
            if (std::abs(p[0] - q[0]) <= sep * std::max(1.0, std::abs(p[0])) &&
                std::abs(p[1] - q[1]) <= sep * std::max(1.0, std::abs(p[1])))
                continue;
            if (std::abs(p[0] - q[0]) <= 1e-3 &&
                std::abs(psi(0.5 * (p[0] + q[0]))) <= band)
                continue;
        }
        roots.push_back(p);
    }
    if (roots.empty())
        throw NoRootError("no characteristic root at " + point_str(t, x));
    return roots;
}

std::vector<SolutionRoot> CharacteristicMap::evaluate_solution(double t, double x) const {
    std::vector<SolutionRoot> out;
    for (const auto& p : solve_parameters(t, x)) out.push_back(make_root(p[0], p[1]));
    return out;
}

double CharacteristicMap::spatial_gradient(double t, double alpha) const {
    data_.require_inside(alpha, "alpha");
    if (t < 0.0) throw DomainError("spatial_gradient requires t >= 0");
    SigmaGeom geom{data_};
    const double beta = beta_at_time(alpha, t);
    const double lam_plus = geom.lp(beta);
    const double den = lam_plus - geom.lm(alpha);
    const double scale = std::max({1.0, std::abs(lam_plus), std::abs(geom.lm(alpha))});
    if (std::abs(den) <= params_.root_tol * scale)
        throw BlowupReachedError("gradient catastrophe: lambda_plus meets Lambda_minus(alpha) "
                                 "along the characteristic from alpha = " + std::to_string(alpha));
    return geom.dlm(alpha) * (geom.lp(alpha) - geom.lm(alpha)) / den;
}

RootSide CharacteristicMap::classify_root_side(const SolutionRoot& r) const {
    const AssumptionReport& rep = report();
    if (r.alpha < rep.alpha0 && r.beta < rep.beta0) return RootSide::left;
    if (r.alpha > rep.alpha0 && r.beta > rep.beta0) return RootSide::right;
    return RootSide::middle;
}

SolutionRoot BranchTracker::eval(double t, double x) {
    if (hint_) {
        if (auto r = cm_->polish_root(t, x, *hint_)) {
            hint_ = {{r->alpha, r->beta}};
            return *r;
        }
    }
    const std::vector<SolutionRoot> roots = cm_->evaluate_solution(t, x);
    std::size_t pick = 0;
    if (roots.size() > 1) {
        if (!hint_)
            throw Error("branch tracker needs a seed in a multi-valued region");
        double best = 1e300;
        for (std::size_t i = 0; i < roots.size(); ++i) {
            const double d = std::abs(roots[i].alpha - (*hint_)[0]) +
                             std::abs(roots[i].beta - (*hint_)[1]);
            if (d < best) { best = d; pick = i; }
        }
    }
    hint_ = {{roots[pick].alpha, roots[pick].beta}};
    return roots[pick];
}

}  // namespace chapgas
