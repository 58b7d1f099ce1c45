#pragma once

// Built-in initial-data families. The canonical profiles keep
// Lambda_plus - Lambda_minus identically 1 (rho0 = 2, u0 = -tanh x for
// mu = 1), which makes every blowup quantity available in closed form and is
// the workhorse of the test suite.

#include <string>
#include <vector>

#include "chapgas/initial_data.hpp"

namespace chapgas {

// "canon": Lp = 1/2 - tanh x, Lm = -1/2 - tanh x on [-12, 12]. The wide
// domain keeps characteristic feet of the audit window inside the data.
InitialData canon_family();

// "canon_perturbed": canon plus 0.05*sech x, on [-3.5, 3.5] (the perturbation
// breaks monotonicity outside that range).
InitialData canon_perturbed_family();

std::vector<std::string> family_names();
InitialData make_family(const std::string& name);  // throws DomainError if unknown

}  // namespace chapgas
