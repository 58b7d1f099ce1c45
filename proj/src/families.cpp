#include "chapgas/families.hpp"

#include "chapgas/errors.hpp"

namespace chapgas {

InitialData canon_family() {
    return data_from_invariant_exprs(Expr::parse("-0.5 - tanh(x)"),
                                     Expr::parse("0.5 - tanh(x)"), -12.0, 12.0);
}

InitialData canon_perturbed_family() {
    return data_from_invariant_exprs(Expr::parse("-0.5 - tanh(x) + 0.05*sech(x)"),
                                     Expr::parse("0.5 - tanh(x) + 0.05*sech(x)"), -3.5, 3.5);
}

std::vector<std::string> family_names() { return {"canon", "canon_perturbed"}; }

InitialData make_family(const std::string& name) {
    if (name == "canon") return canon_family();
    if (name == "canon_perturbed") return canon_perturbed_family();
    std::string msg = "unknown family '" + name + "'; known families:";
    for (const auto& n : family_names()) msg += " " + n;
    throw DomainError(msg);
}

}  // namespace chapgas
