// models.hpp: oracle, Hamming-ladder and Dicke Hamiltonians with their coupling operators
//
// Computational basis states are integers whose binary expansion is the qubit
// configuration, least-significant bit = qubit 1. All three families are
// diagonal in that basis, so it doubles as the energy eigenbasis.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

namespace relax::models {

using StateIndex = std::uint64_t;

enum class CouplingKind { projector, indirect, direct, hadamard, collective_bitflip };

std::string_view to_string(CouplingKind kind) noexcept;
CouplingKind parse_coupling(std::string_view name);

// Nonlocal kinds act on the oracle Hamiltonian; collective_bitflip on ladders.
constexpr bool is_nonlocal(CouplingKind kind) noexcept {
    return kind != CouplingKind::collective_bitflip;
}

// Norm factor eta. `size` is the state count N for nonlocal kinds, the qubit count n for collective_bitflip.
double eta(CouplingKind kind, std::uint64_t size);

// <a|A|b> including eta.
double matrix_element(CouplingKind kind, StateIndex a, StateIndex b, unsigned n, StateIndex w);

// Full 2^n x 2^n coupling matrix. Intended for small n.
Eigen::MatrixXd coupling_matrix(CouplingKind kind, unsigned n, StateIndex w);

unsigned hamming_distance(StateIndex a, StateIndex b) noexcept;
unsigned hamming_distance(std::string_view a, std::string_view b);

// Bitstring as written, most significant qubit first ("0011" -> 3).
StateIndex parse_bitstring(std::string_view bits, unsigned n);
std::string format_bitstring(StateIndex state, unsigned n);

// binom(n, alpha), exact.
boost::multiprecision::cpp_int shell_degeneracy(unsigned n, unsigned alpha);
// log binom(n, alpha); used wherever degeneracies enter the dynamics.
double log_shell_degeneracy(unsigned n, unsigned alpha);

// H = dE (1 - |w><w|): E_w = 0, every other state at dE.
struct OracleModel {
    unsigned n{1};
    double delta_e{1.0};
    StateIndex w{0};

    OracleModel(unsigned n, double delta_e, StateIndex w = 0);

    std::uint64_t states() const noexcept { return std::uint64_t{1} << n; }
    double energy(StateIndex a) const noexcept { return a == w ? 0.0 : delta_e; }
    std::vector<double> energies() const;
};

// H = sum_alpha E_alpha P(H_alpha), shells by Hamming distance to w.
struct LadderModel {
    unsigned n{1};
    std::vector<double> shell_energies;  // E_0 <= E_1 <= ... <= E_n
    StateIndex w{0};

    LadderModel(unsigned n, std::vector<double> shell_energies, StateIndex w = 0);
    static LadderModel equidistant(unsigned n, double delta_e, StateIndex w = 0);

    std::uint64_t states() const noexcept { return std::uint64_t{1} << n; }
    double energy(StateIndex a) const noexcept { return shell_energies[hamming_distance(a, w)]; }
    std::vector<double> energies() const;
    // Common spacing if E_alpha - E_{alpha-1} is constant (relative 1e-12), else negative.
    double uniform_spacing() const noexcept;
};

// Dicke model, H = (omega0/2) J^z with collective coupling lambda J^x. Same shell structure
// as the ladder with E_alpha = omega0 (alpha - n/2); the coupling carries no 1/n normalization.
struct DickeModel {
    unsigned n{1};
    double omega0{1.0};

    DickeModel(unsigned n, double omega0);
    LadderModel as_ladder() const;
    static constexpr double coupling_eta = 1.0;
};

// exp(-beta E_0) / sum_i exp(-beta E_i), with E_0 the first entry. beta may be +inf.
double gibbs_ground_probability(std::span<const double> energies, double beta);
// Same for a ladder, summing shells with their degeneracies in log space.
double gibbs_ground_probability(const LadderModel& model, double beta);
// Per-shell Gibbs weights binom(n,alpha) e^{-beta E_alpha} / Z.
std::vector<double> gibbs_shell_populations(const LadderModel& model, double beta);

} // namespace relax::models
