#pragma once

// Geometry of the characteristic solution: the parameter map
//   t(a,b) = int_a^b dz / (Lp - Lm)(z)
//   x(a,b) = (a + b + int_a^b (Lp + Lm)/(Lp - Lm) dz) / 2
// its Jacobian, the singular curve Sigma (Lm(a) = Lp(b)), cusp detection and
// classification, the blowup point, envelopes, characteristic traces, and
// (multi-valued) evaluation of the solution at a space-time point.

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chapgas/gas_model.hpp"
#include "chapgas/initial_data.hpp"
#include "chapgas/quadrature.hpp"

namespace chapgas {

struct AssumptionWitness {
    std::string assumption;  // "H1", "H2-minus", "H2-plus", "H4", "H5"
    double x;
};

struct AssumptionReport {
    bool h1_ok = false;  // Lm < Lp everywhere
    bool h2_ok = false;  // Lm' < 0 and Lp' < 0 everywhere
    bool h3_ok = false;  // singular curve nonempty, cusp parameters solvable
    bool h4_ok = false;  // f(alpha0) = 0 located
    bool h5_ok = false;  // f'(alpha0) < 0
    double alpha0 = 0.0, beta0 = 0.0;
    double f_alpha0 = 0.0, fprime_alpha0 = 0.0;
    // alpha-interval on which beta(alpha) is solvable; f has its unique sign
    // change here (the uniqueness bracket for the cusp search).
    double sigma_alpha_lo = 0.0, sigma_alpha_hi = 0.0;
    std::vector<AssumptionWitness> witnesses;

    bool passed() const { return h1_ok && h2_ok && h3_ok && h4_ok && h5_ok; }
};

AssumptionReport check_assumptions(const InitialData& data, const ChaplyginParams& params,
                                   int n_grid);

struct MapPoint {
    double t, x;
};

struct JacobianEntries {
    double t_alpha, t_beta, x_alpha, x_beta;
    double det;
};

enum class PointKind { fold, cusp };

struct SigmaSample {
    double alpha, beta;
    PointKind kind;
};

struct SingularCurve {
    std::vector<SigmaSample> samples;
    std::vector<double> skipped;  // alphas where beta(alpha) was unsolvable
};

enum class EnvelopeSide { left, right };

struct Envelope {
    EnvelopeSide side;
    std::vector<MapPoint> samples;  // ordered by t ascending, starting at the cusp
    bool monotone_ok = false;       // x strictly increasing (left) / decreasing (right)
    bool concave_ok = false;        // t concave as a function of x

    // Envelope position at time t by linear interpolation of the samples.
    double x_at(double t) const;
    double t_max() const { return samples.empty() ? 0.0 : samples.back().t; }
};

enum class CharFamily { minus, plus };

struct SolutionRoot {
    double alpha, beta;
    RiemannPair invariants;
    // Past the fold the middle sheet carries the formal continuation with a
    // negative invariant gap; state.rho < 0 marks such roots.
    PhysState state;
};

enum class RootSide { left, middle, right };

class CharacteristicMap {
public:
    // Requires a fully passed assumption report (cusp data available).
    CharacteristicMap(InitialData data, const ChaplyginParams& params,
                      const AssumptionReport& report);
    // Diagnostic construction without assumption checking: pi_map, jacobian
    // and traces work; cusp-dependent operations throw.
    static CharacteristicMap diagnostic(InitialData data, const ChaplyginParams& params);

    const InitialData& data() const { return data_; }
    const ChaplyginParams& params() const { return params_; }
    bool has_cusp() const { return report_.has_value(); }
    const AssumptionReport& report() const;
    double alpha0() const { return report().alpha0; }
    double beta0() const { return report().beta0; }
    double t0() const { return t0_; }
    double x0() const { return x0_; }

    MapPoint pi_map(double alpha, double beta) const;
    JacobianEntries jacobian(double alpha, double beta) const;

    // beta(alpha) on Sigma: the solution of Lp(beta) = Lm(alpha).
    double beta_on_sigma(double alpha) const;
    double sigma_tangent_t(double alpha) const;  // d/d alpha of t along Sigma
    SingularCurve singular_curve(double alpha_lo, double alpha_hi, int n) const;
    PointKind classify_singular_point(double alpha) const;
    MapPoint blowup_point() const;

    std::pair<Envelope, Envelope> envelopes(double eps, int n) const;
    // One envelope arm extended (if reachable) to cover times up to t_target.
    Envelope envelope_to_time(EnvelopeSide side, double t_target, int n) const;

    std::vector<MapPoint> trace_characteristic(CharFamily family, double label, int n) const;

    std::vector<SolutionRoot> evaluate_solution(double t, double x) const;
    double spatial_gradient(double t, double alpha) const;

    // Plumbing shared with the shock module and trackers.
    double beta_at_time(double alpha, double t) const;  // G^{-1}(G(alpha) + t)
    double alpha_max_at_time(double t) const;           // largest admissible alpha
    SolutionRoot make_root(double alpha, double beta) const;
    // Root parameters only (no state materialization, so callers may apply
    // their own near-degenerate policy).
    std::vector<std::array<double, 2>> solve_parameters(double t, double x) const;
    std::optional<std::array<double, 2>> polish_parameters(double t, double x,
                                                           std::array<double, 2> seed) const;
    // Newton refinement of pi_map(a,b) = (t,x) from a seed; empty on failure.
    std::optional<SolutionRoot> polish_root(double t, double x,
                                            std::array<double, 2> seed) const;
    RootSide classify_root_side(const SolutionRoot& r) const;

private:
    CharacteristicMap(InitialData data, const ChaplyginParams& params, bool diagnostic);
    void build_antiderivatives();
    Envelope envelope_arm(EnvelopeSide side, double eps_arm, int n) const;
    double f_of_alpha(double alpha) const;
    double fprime_of_alpha(double alpha) const;

    InitialData data_;
    ChaplyginParams params_;
    std::optional<AssumptionReport> report_;
    double t0_ = 0.0, x0_ = 0.0;
    Antiderivative G_;  // antiderivative of 1/(Lp - Lm)
    Antiderivative H_;  // antiderivative of (Lp + Lm)/(Lp - Lm)

    friend AssumptionReport check_assumptions(const InitialData&, const ChaplyginParams&, int);
};

// Follows one solution branch across many nearby (t,x) queries: Newton from
// the previous root, full enumeration as fallback (picking the root nearest
// the previous one to stay on the branch).
class BranchTracker {
public:
    explicit BranchTracker(const CharacteristicMap& cm) : cm_(&cm) {}
    SolutionRoot eval(double t, double x);
    void seed(const SolutionRoot& r) { hint_ = {{r.alpha, r.beta}}; }
    void reset() { hint_.reset(); }

private:
    const CharacteristicMap* cm_;
    std::optional<std::array<double, 2>> hint_;
};

}  // namespace chapgas
