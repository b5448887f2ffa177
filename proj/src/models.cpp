#include "relax/models.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "relax/error.hpp"

namespace relax::models {

namespace {

void check_qubits(unsigned n) {
    if (n < 1 || n > 62) throw Error(Errc::out_of_range, fmt::format("qubit count {} outside [1, 62]", n));
}

void check_state(StateIndex a, unsigned n) {
    if (a >= (StateIndex{1} << n))
        throw Error(Errc::out_of_range, fmt::format("state index {} outside [0, 2^{})", a, n));
}

// Weight exp(-beta * gap) for gap >= 0, with the beta = inf and gap = 0 case resolved.
double boltzmann_log_weight(double beta, double gap) {
    if (gap == 0.0) return 0.0;
    if (std::isinf(beta)) return gap > 0.0 ? -std::numeric_limits<double>::infinity()
                                           : std::numeric_limits<double>::infinity();
    return -beta * gap;
}

double log_sum_exp(const std::vector<double>& xs) {
    const double m = *std::max_element(xs.begin(), xs.end());
    if (std::isinf(m)) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

} // namespace

std::string_view to_string(CouplingKind kind) noexcept {
    switch (kind) {
        case CouplingKind::projector: return "projector";
        case CouplingKind::indirect: return "indirect";
        case CouplingKind::direct: return "direct";
        case CouplingKind::hadamard: return "hadamard";
        case CouplingKind::collective_bitflip: return "collective_bitflip";
    }
    return "unknown";
}

CouplingKind parse_coupling(std::string_view name) {
    for (auto kind : {CouplingKind::projector, CouplingKind::indirect, CouplingKind::direct,
                      CouplingKind::hadamard, CouplingKind::collective_bitflip})
        if (name == to_string(kind)) return kind;
    throw ConfigError(fmt::format("unknown coupling kind '{}'", name));
}

double eta(CouplingKind kind, std::uint64_t size) {
    if (size < 1) throw Error(Errc::out_of_range, "eta: size must be >= 1");
    const double s = static_cast<double>(size);
    switch (kind) {
        case CouplingKind::projector:
        case CouplingKind::hadamard: return 1.0;
        case CouplingKind::indirect: return s / (s + 1.0);
        case CouplingKind::direct: return std::sqrt(s) / (1.0 + std::sqrt(s));
        case CouplingKind::collective_bitflip: return 1.0 / s;
    }
    return 1.0;
}

double matrix_element(CouplingKind kind, StateIndex a, StateIndex b, unsigned n, StateIndex w) {
    check_qubits(n);
    check_state(a, n);
    check_state(b, n);
    check_state(w, n);
    const std::uint64_t states = std::uint64_t{1} << n;
    const double N = static_cast<double>(states);
    switch (kind) {
        case CouplingKind::projector: return 1.0 / N;
        case CouplingKind::indirect:
            return eta(kind, states) * (1.0 / N + ((a == w && b == w) ? 1.0 : 0.0));
        case CouplingKind::direct: {
            const double overlap = 1.0 / std::sqrt(N);  // <s|w>
            return eta(kind, states) * ((b == w ? overlap : 0.0) + (a == w ? overlap : 0.0));
        }
        case CouplingKind::hadamard: {
            const double sign = (std::popcount(a & b) % 2 == 0) ? 1.0 : -1.0;
            return sign / std::sqrt(N);
        }
        case CouplingKind::collective_bitflip:
            return std::popcount(a ^ b) == 1 ? eta(kind, n) : 0.0;
    }
    return 0.0;
}

Eigen::MatrixXd coupling_matrix(CouplingKind kind, unsigned n, StateIndex w) {
    check_qubits(n);
    if (n > 14) throw Error(Errc::scale_exceeded, fmt::format("dense coupling matrix for n = {} qubits", n));
    const auto N = static_cast<Eigen::Index>(std::uint64_t{1} << n);
    Eigen::MatrixXd A(N, N);
    for (Eigen::Index a = 0; a < N; ++a)
        for (Eigen::Index b = 0; b < N; ++b)
            A(a, b) = matrix_element(kind, static_cast<StateIndex>(a), static_cast<StateIndex>(b), n, w);
    return A;
}

unsigned hamming_distance(StateIndex a, StateIndex b) noexcept {
    return static_cast<unsigned>(std::popcount(a ^ b));
}

unsigned hamming_distance(std::string_view a, std::string_view b) {
    if (a.size() != b.size())
        throw Error(Errc::length_mismatch, fmt::format("bitstrings of length {} and {}", a.size(), b.size()));
    unsigned d = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) ++d;
    return d;
}

StateIndex parse_bitstring(std::string_view bits, unsigned n) {
    if (bits.size() != n)
        throw Error(Errc::length_mismatch, fmt::format("bitstring '{}' does not have {} qubits", bits, n));
    StateIndex value = 0;
    for (char c : bits) {
        if (c != '0' && c != '1') throw Error(Errc::invalid_argument, fmt::format("bad bitstring '{}'", bits));
        value = (value << 1) | static_cast<StateIndex>(c - '0');
    }
    return value;
}

std::string format_bitstring(StateIndex state, unsigned n) {
    std::string s(n, '0');
    for (unsigned i = 0; i < n; ++i)
        if ((state >> i) & 1U) s[n - 1 - i] = '1';
    return s;
}

boost::multiprecision::cpp_int shell_degeneracy(unsigned n, unsigned alpha) {
    if (alpha > n) throw Error(Errc::out_of_range, fmt::format("shell {} outside [0, {}]", alpha, n));
    const unsigned k = std::min(alpha, n - alpha);
    boost::multiprecision::cpp_int c = 1;
    for (unsigned i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

double log_shell_degeneracy(unsigned n, unsigned alpha) {
    if (alpha > n) throw Error(Errc::out_of_range, fmt::format("shell {} outside [0, {}]", alpha, n));
    return std::lgamma(n + 1.0) - std::lgamma(alpha + 1.0) - std::lgamma(n - alpha + 1.0);
}

OracleModel::OracleModel(unsigned n_, double delta_e_, StateIndex w_) : n(n_), delta_e(delta_e_), w(w_) {
    check_qubits(n);
    check_state(w, n);
    if (!(delta_e > 0.0) || !std::isfinite(delta_e))
        throw Error(Errc::invalid_argument, fmt::format("energy gap must be positive, got {}", delta_e));
}

std::vector<double> OracleModel::energies() const {
    std::vector<double> e(states());
    for (StateIndex a = 0; a < states(); ++a) e[a] = energy(a);
    return e;
}

LadderModel::LadderModel(unsigned n_, std::vector<double> shell_energies_, StateIndex w_)
    : n(n_), shell_energies(std::move(shell_energies_)), w(w_) {
    if (n < 1) throw Error(Errc::out_of_range, "ladder needs at least one qubit");
    if (n <= 62) check_state(w, n);
    if (shell_energies.size() != n + 1)
        throw Error(Errc::length_mismatch,
                    fmt::format("ladder with n = {} needs {} shell energies, got {}", n, n + 1, shell_energies.size()));
    for (std::size_t a = 0; a < shell_energies.size(); ++a) {
        if (!std::isfinite(shell_energies[a])) throw Error(Errc::non_finite_input, "shell energy not finite");
        if (a > 0 && shell_energies[a] < shell_energies[a - 1])
            throw Error(Errc::invalid_argument, "shell energies must be non-decreasing");
    }
}

LadderModel LadderModel::equidistant(unsigned n, double delta_e, StateIndex w) {
    if (!(delta_e > 0.0)) throw Error(Errc::invalid_argument, "ladder spacing must be positive");
    std::vector<double> e(n + 1);
    for (unsigned a = 0; a <= n; ++a) e[a] = a * delta_e;
    return LadderModel(n, std::move(e), w);
}

std::vector<double> LadderModel::energies() const {
    if (n > 20) throw Error(Errc::scale_exceeded, "explicit spectrum only for n <= 20");
    std::vector<double> e(states());
    for (StateIndex a = 0; a < states(); ++a) e[a] = energy(a);
    return e;
}

double LadderModel::uniform_spacing() const noexcept {
    const double d = shell_energies[1] - shell_energies[0];
    if (!(d > 0.0)) return -1.0;
    for (std::size_t a = 1; a < shell_energies.size(); ++a)
        if (std::abs((shell_energies[a] - shell_energies[a - 1]) - d) > 1e-12 * std::max(d, 1.0)) return -1.0;
    return d;
}

DickeModel::DickeModel(unsigned n_, double omega0_) : n(n_), omega0(omega0_) {
    if (n < 1) throw Error(Errc::out_of_range, "Dicke model needs at least one spin");
    if (!(omega0 > 0.0)) throw Error(Errc::invalid_argument, "omega0 must be positive");
}

LadderModel DickeModel::as_ladder() const {
    std::vector<double> e(n + 1);
    for (unsigned a = 0; a <= n; ++a) e[a] = omega0 * (static_cast<double>(a) - 0.5 * n);
    return LadderModel(n, std::move(e), 0);
}

double gibbs_ground_probability(std::span<const double> energies, double beta) {
    if (energies.empty()) throw Error(Errc::invalid_argument, "empty spectrum");
    if (std::isnan(beta) || beta < 0.0) throw Error(Errc::invalid_argument, "beta must be non-negative");
    const double e_min = *std::min_element(energies.begin(), energies.end());
    std::vector<double> logw(energies.size());
    for (std::size_t i = 0; i < energies.size(); ++i) logw[i] = boltzmann_log_weight(beta, energies[i] - e_min);
    return std::exp(logw[0] - log_sum_exp(logw));
}

double gibbs_ground_probability(const LadderModel& model, double beta) {
    return gibbs_shell_populations(model, beta)[0];
}

std::vector<double> gibbs_shell_populations(const LadderModel& model, double beta) {
    if (std::isnan(beta) || beta < 0.0) throw Error(Errc::invalid_argument, "beta must be non-negative");
    const double e_min = model.shell_energies.front();
    std::vector<double> logw(model.n + 1);
    for (unsigned a = 0; a <= model.n; ++a)
        logw[a] = log_shell_degeneracy(model.n, a) + boltzmann_log_weight(beta, model.shell_energies[a] - e_min);
    const double log_z = log_sum_exp(logw);
    std::vector<double> p(model.n + 1);
    for (unsigned a = 0; a <= model.n; ++a) p[a] = std::exp(logw[a] - log_z);
    return p;
}

} // namespace relax::models
