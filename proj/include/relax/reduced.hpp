// reduced.hpp: closed dynamics in aggregated variables
//
// Nonlocal couplings on the oracle Hamiltonian close on two variables
// (z1 = ground population, z2 = aggregated remainder); the collective bit-flip
// coupling closes on one variable per Hamming shell.

#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "relax/bath.hpp"
#include "relax/models.hpp"
#include "relax/propagate.hpp"
#include "relax/trajectory.hpp"

namespace relax::reduced {

enum class Method { rate, quantum };

std::string_view to_string(Method method) noexcept;
Method parse_method(std::string_view name);

// Initial density matrices that can be prepared without knowing w.
enum class InitialState {
    uniform_diagonal,  // rho = 1/N
    coherent,          // rho = |s><s|
    top_shell,         // ladders only: everything in the shell at distance n
};

std::string_view to_string(InitialState init) noexcept;
InitialState parse_initial_state(std::string_view name);

struct TwoStateParams {
    models::CouplingKind kind{models::CouplingKind::projector};
    Method method{Method::rate};
    std::uint64_t states{4};  // N = 2^n
    double beta{1.0};
    double lambda{0.01};
    double g{2.0};
    double delta_e{1.0};
    models::StateIndex w{0};
};

struct TwoStateSystem {
    Eigen::Matrix2d M;
    Eigen::Vector2d z0;
    TwoStateParams params;
};

// Projector matrices times the kind-specific prefactor (1, N^2/(N+1)^2, N^2/(sqrt N+1)^2, N).
double two_state_prefactor(models::CouplingKind kind, std::uint64_t states);
Eigen::Matrix2d two_state_matrix(Method method, std::uint64_t states, double beta, double lambda, double g,
                                 double delta_e);
Eigen::Vector2d two_state_initial(const TwoStateParams& params, InitialState init);
TwoStateSystem build_two_state(const TwoStateParams& params, InitialState init = InitialState::uniform_diagonal);

// exp(M t) for a real 2x2 matrix, in closed form.
Eigen::Matrix2d expm2(const Eigen::Matrix2d& M, double t);
Eigen::Vector2d two_state_at(const TwoStateSystem& system, double t);
Trajectory solve_two_state(const TwoStateSystem& system, std::span<const double> times);
// Long-time limit of exp(M t) z0.
Eigen::Vector2d two_state_stationary(const TwoStateSystem& system);

double tau_re(double states, double beta, double delta_e, double lambda, double g);
double tau_me(double states, double beta, double delta_e, double lambda, double g);

// (N - 2)[w = 0] + 1/N: Hadamard-variable z2 of |s><s|.
double hadamard_initial_z2(unsigned n, models::StateIndex w);

// Tridiagonal shell dynamics. Row alpha reads
//   dz_alpha/dt = lower[alpha] z_{alpha-1} + diag[alpha] z_alpha + upper[alpha] z_{alpha+1}.
struct LadderSystem {
    unsigned n{0};
    Method method{Method::rate};
    std::vector<double> lower;  // lower[0] = 0
    std::vector<double> diag;
    std::vector<double> upper;  // upper[n] = 0
    // log of the weights of the conserved functional sum_alpha w_alpha z_alpha
    // (1 for rates, 1/binom(n, alpha) for the quantum shell variables).
    std::vector<double> log_weights;

    std::size_t size() const noexcept { return diag.size(); }
    void apply(const double* z, double* dz) const;
    Eigen::MatrixXd dense() const;
    double conserved(std::span<const double> z) const;
};

// eta < 0 selects the Hamming-ladder normalization 1/n.
LadderSystem build_ladder(Method method, const models::LadderModel& model, const bath::BathSpectrum& bath,
                          double lambda, double eta = -1.0);

// -alpha lambda^2 eta^2 g coth(beta dE / 2), alpha = 0..n, with eta = 1/n.
std::vector<double> ladder_rate_eigenvalues(unsigned n, double beta, double lambda, double g, double delta_e);
// Eigenvalues of the ladder matrix through its symmetrization (valid for any birth-death chain).
std::vector<double> ladder_numerical_eigenvalues(const LadderSystem& system);

std::vector<double> ladder_initial(const LadderSystem& system, InitialState init);
// Fixed point with the same conserved functional as z0, from detailed balance.
std::vector<double> ladder_stationary(const LadderSystem& system, std::span<const double> z0);

struct LadderSolveOptions {
    double condition_limit{1e8};
    numerics::IntegratorOptions integrator{};
};

// Propagator for a ladder: exact via the symmetrized eigenbasis when the similarity
// transform is well conditioned, otherwise adaptive integration.
class LadderPropagator {
public:
    LadderPropagator(LadderSystem system, LadderSolveOptions options = {});

    numerics::PropagationRoute route() const noexcept { return route_; }
    const LadderSystem& system() const noexcept { return system_; }
    std::vector<std::vector<double>> propagate(std::span<const double> z0, std::span<const double> times) const;
    // Only valid on the eigendecomposition route.
    std::vector<double> at(std::span<const double> z0, double t) const;

private:
    LadderSystem system_;
    LadderSolveOptions options_;
    numerics::PropagationRoute route_{numerics::PropagationRoute::integration};
    Eigen::VectorXd scale_;         // similarity transform M = D S D^-1
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd eigenvectors_;
};

Trajectory solve_ladder(const LadderSystem& system, std::span<const double> z0, std::span<const double> times,
                        const LadderSolveOptions& options = {});

// Zero-temperature decay chain dy_k/dt = beta_k y_k + gamma_k y_{k+1}, y(0) = (0, ..., 0, 1).
struct CascadeCoefficients {
    std::vector<double> beta;
    std::vector<double> gamma;  // gamma[n] unused

    // c = lambda^2 eta^2 g(omega0)
    static CascadeCoefficients rate(unsigned n, double c);
    static CascadeCoefficients quantum(unsigned n, double c);
    unsigned n() const noexcept { return static_cast<unsigned>(beta.size()) - 1; }
};

// Laplace-transform solution, evaluated in extended precision. Coefficients closer than
// 1e-8 max|beta| are split and the result extrapolated back to zero splitting.
double cascade_solution(const CascadeCoefficients& coeffs, unsigned k, double t);
std::vector<double> cascade_solution(const CascadeCoefficients& coeffs, double t);

} // namespace relax::reduced
