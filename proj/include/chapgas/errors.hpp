#pragma once

// Error taxonomy. Everything a driver should report (rather than crash on)
// derives from Error; the CLI maps subtypes onto exit codes.

#include <stdexcept>
#include <string>
#include <vector>

namespace chapgas {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input/usage problems: bad config values, unparsable expressions,
// evaluation outside the stated data domain.
struct ConfigParseError : Error {
    ConfigParseError(const std::string& msg, int line_no)
        : Error("config parse error (line " + std::to_string(line_no) + "): " + msg),
          line(line_no) {}
    int line;
};

struct ConfigValidationError : Error {
    explicit ConfigValidationError(std::vector<std::string> problems)
        : Error(join(problems)), failures(std::move(problems)) {}
    std::vector<std::string> failures;
private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "config validation failed:";
        for (const auto& p : v) s += "\n  - " + p;
        return s;
    }
};

struct ExprParseError : Error {
    ExprParseError(const std::string& msg, std::size_t pos)
        : Error("expression parse error at position " + std::to_string(pos) + ": " + msg),
          position(pos) {}
    std::size_t position;
};

struct DomainError : Error {
    using Error::Error;
};

// Concentration signal: Riemann invariants too close to invert (rho -> inf).
struct DegeneratePairError : Error {
    DegeneratePairError(double lm, double lp)
        : Error("degenerate invariant pair: lam_plus - lam_minus = " +
                std::to_string(lp - lm) + " at (" + std::to_string(lm) + ", " +
                std::to_string(lp) + ")"),
          lam_minus(lm), lam_plus(lp) {}
    double lam_minus, lam_plus;
};

// Cusp search outcomes.
struct NoCuspError : Error {
    using Error::Error;
};

struct AmbiguousCuspError : Error {
    AmbiguousCuspError(const std::string& msg, std::vector<double> alphas)
        : Error(msg), candidates(std::move(alphas)) {}
    std::vector<double> candidates;
};

struct DegenerateClassificationError : Error {
    using Error::Error;
};

struct UnsolvableBetaError : Error {
    UnsolvableBetaError(const std::string& msg, double a) : Error(msg), alpha(a) {}
    double alpha;
};

// Solution evaluation.
struct NoRootError : Error {
    using Error::Error;
};

struct RootFinderStallError : Error {
    RootFinderStallError(const std::string& msg, double res) : Error(msg), residual(res) {}
    double residual;
};

struct BlowupReachedError : Error {
    using Error::Error;
};

}  // namespace chapgas
