// propagate.hpp: propagation of linear ODE systems x' = G x
//
// Two routes: exact eigendecomposition when the eigenvector matrix is well
// conditioned, otherwise adaptive Dormand-Prince integration (boost::odeint)
// with dense output.

#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace relax::numerics {

struct IntegratorOptions {
    double rel_tol{1e-10};
    double abs_tol{1e-14};
    double initial_step{0.0};          // 0: derived from the requested span
    std::size_t max_steps{20'000'000};
};

using State = std::vector<double>;
using RightHandSide = std::function<void(const State& x, State& dxdt)>;

// Samples x(t) at each of the sorted, non-negative `times`.
std::vector<State> integrate(const RightHandSide& rhs, const State& x0, std::span<const double> times,
                             const IntegratorOptions& options = {});

// Step-by-step integration with access to the interpolant inside the last step.
class DenseIntegrator {
public:
    DenseIntegrator(RightHandSide rhs, const State& x0, double initial_step, const IntegratorOptions& options = {});
    ~DenseIntegrator();
    DenseIntegrator(DenseIntegrator&&) noexcept;
    DenseIntegrator& operator=(DenseIntegrator&&) noexcept;

    // Advances one accepted step; returns the new time.
    double step();
    double time() const;
    double previous_time() const;
    const State& state() const;
    // Interpolated state for previous_time() <= t <= time().
    State state_at(double t) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

enum class PropagationRoute { eigendecomposition, integration };

// Propagator for x' = G x with a dense complex generator.
class DensePropagator {
public:
    explicit DensePropagator(Eigen::MatrixXcd generator, double condition_limit = 1e8,
                             IntegratorOptions options = {});

    PropagationRoute route() const noexcept { return route_; }
    double condition_estimate() const noexcept { return condition_; }
    const Eigen::MatrixXcd& generator() const noexcept { return generator_; }

    Eigen::VectorXcd apply(const Eigen::VectorXcd& x0, double t) const;
    std::vector<Eigen::VectorXcd> propagate(const Eigen::VectorXcd& x0, std::span<const double> times) const;

private:
    Eigen::MatrixXcd generator_;
    IntegratorOptions options_;
    PropagationRoute route_{PropagationRoute::integration};
    double condition_{0.0};
    Eigen::VectorXcd eigenvalues_;
    Eigen::MatrixXcd vectors_;
    Eigen::MatrixXcd inverse_vectors_;
};

// Sparse generator, always integrated.
std::vector<Eigen::VectorXcd> propagate_sparse(const Eigen::SparseMatrix<std::complex<double>>& generator,
                                               const Eigen::VectorXcd& x0, std::span<const double> times,
                                               const IntegratorOptions& options = {});

void check_time_grid(std::span<const double> times);

} // namespace relax::numerics
