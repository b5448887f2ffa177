// bms.hpp: full Born-Markov-secular master equation and rate equation in the energy eigenbasis
//
// Brute-force reference for small systems. Density matrices are vectorized
// row-major: index a*N + b holds rho_ab.

#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "relax/bath.hpp"
#include "relax/models.hpp"
#include "relax/propagate.hpp"
#include "relax/trajectory.hpp"

namespace relax::bms {

using DensityMatrix = Eigen::MatrixXcd;
using Superoperator = Eigen::SparseMatrix<std::complex<double>, Eigen::RowMajor>;

struct EnergyEigenbasisModel {
    std::vector<double> energies;
    Eigen::MatrixXd coupling;        // <a|A|b>, real symmetric
    double energy_match_tolerance;   // for the secular Kronecker deltas

    EnergyEigenbasisModel(std::vector<double> energies, Eigen::MatrixXd coupling, double tolerance = -1.0);

    static EnergyEigenbasisModel oracle(const models::OracleModel& model, models::CouplingKind kind);
    // Ladder with the collective sigma^x coupling scaled by `eta` (1/n for the Hamming ladder, 1 for Dicke).
    static EnergyEigenbasisModel ladder(const models::LadderModel& model, double eta);

    std::size_t size() const noexcept { return energies.size(); }
    bool same_energy(double x, double y) const noexcept;
};

// Damping coefficients gamma_bar_{ab,cd} and Lamb-shift coefficients sigma_bar_{ab},
// evaluated on demand; zero wherever the secular deltas vanish.
class DampingTensor {
public:
    DampingTensor(const EnergyEigenbasisModel& model, const bath::BathSpectrum& bath, double lambda);

    double gamma_bar(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const;
    // sigma_bar is lambda^2/(2i) sum_c sigma(E_a - E_c) ...; with imaginary sigma it is real.
    double sigma_bar(std::size_t a, std::size_t b) const;

private:
    EnergyEigenbasisModel model_;
    bath::BathSpectrum bath_;
    double lambda2_;
};

struct GeneratorOptions {
    bool include_lamb_shift{false};
    std::size_t max_states{64};
};

// One Bohr-frequency sector: all (a,b) with E_a - E_b = omega. The secular
// generator never couples different sectors.
struct Sector {
    double omega{0.0};
    std::vector<Eigen::Index> indices;  // vectorized positions a*N + b
};

class QuantumGenerator {
public:
    QuantumGenerator(const EnergyEigenbasisModel& model, const bath::BathSpectrum& bath, double lambda,
                     GeneratorOptions options = {});

    std::size_t states() const noexcept { return n_; }
    const Superoperator& superoperator() const noexcept { return superop_; }
    const std::vector<Sector>& sectors() const noexcept { return sectors_; }
    // Dense N^2 x N^2 form; N <= 32.
    Eigen::MatrixXcd dense() const;
    DensityMatrix apply(const DensityMatrix& rho) const;

private:
    std::size_t n_;
    Superoperator superop_;
    std::vector<Sector> sectors_;
};

// Rate matrix on populations: columns sum to zero.
Eigen::MatrixXd build_rate_generator(const EnergyEigenbasisModel& model, const bath::BathSpectrum& bath,
                                     double lambda, std::size_t max_states = 64);

QuantumGenerator build_quantum_generator(const EnergyEigenbasisModel& model, const bath::BathSpectrum& bath,
                                         double lambda, bool include_lamb_shift,
                                         std::size_t max_states = 64);

struct EvolveOptions {
    double condition_limit{1e8};
    Eigen::Index max_dense_sector{200};
    numerics::IntegratorOptions integrator{};
};

struct DensityTrajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
};

DensityTrajectory evolve(const QuantumGenerator& generator, const DensityMatrix& rho0,
                         std::span<const double> times, const EvolveOptions& options = {});

// Population trajectory under a rate matrix; columns are the N populations.
Trajectory evolve(const Eigen::MatrixXd& rate_generator, const Eigen::VectorXd& p0, std::span<const double> times,
                  const EvolveOptions& options = {});

// Initial states that need no knowledge of w.
DensityMatrix uniform_diagonal(std::size_t n_states);
DensityMatrix coherent_superposition(std::size_t n_states);  // |s><s|
// Basis state at maximal Hamming distance from w.
DensityMatrix top_shell_state(unsigned n_qubits, models::StateIndex w);

struct DensityDiagnostics {
    double hermiticity_error;
    double trace_error;
    double min_eigenvalue;
};
DensityDiagnostics diagnose(const DensityMatrix& rho);

enum class VariableSet {
    rate_pair,         // rho_ww, sum_{a != w} rho_aa
    quantum_pair,      // rho_ww, sum_{a,b != w} rho_ab
    hadamard_pair,     // rho_ww, sum_{a,b != w} (-1)^{w.a + w.b} rho_ab
    shell_populations, // sum_{a in H_alpha} rho_aa
    shell_coherent,    // sum_{a,b in H_alpha} rho_ab
};

// Reduced variables; complex in general, real for Hermitian rho.
std::vector<double> project_reduced(const DensityMatrix& rho, VariableSet set, models::StateIndex w, unsigned n);
std::vector<double> project_reduced(const Eigen::VectorXd& populations, VariableSet set, models::StateIndex w,
                                    unsigned n);
Trajectory project_trajectory(const DensityTrajectory& trajectory, VariableSet set, models::StateIndex w,
                              unsigned n);

// Off-diagonal decay rate of the pure dephasing model.
double dephasing_decay_rate(double d_a, double d_b, double lambda, double gamma0);

} // namespace relax::bms
