// validate.hpp: self-check suites behind `relaxsim validate`

#pragma once

#include <string>
#include <vector>

namespace relax::validate {

struct Check {
    std::string name;
    double error{0.0};
    double tolerance{0.0};
    bool pass{false};
};

struct Suite {
    std::string name;
    std::vector<Check> checks;
    bool pass() const noexcept;
};

struct Report {
    std::vector<Suite> suites;
    bool pass() const noexcept;
    std::string to_json() const;
};

// Reduced dynamics against projections of the full master equation and rate equation.
Suite oracle_equivalence();
// Ladder cases with n = 7 and 8; minutes of runtime, so not part of run_all.
Suite oracle_equivalence_large();
// Random imaginary sigma tables leave reduced-variable derivatives unchanged.
Suite lamb_shift_cancellation();
// Gibbs stationarity, positivity and trace of oracle states, ladder eigenvalues and conservation.
Suite invariants();
// Closed forms against brute-force sums and adaptive integration.
Suite closed_forms();

Report run_all(std::size_t jobs = 1);

} // namespace relax::validate
