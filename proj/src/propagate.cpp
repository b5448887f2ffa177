#include "relax/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

#include "relax/error.hpp"

namespace relax::numerics {

namespace odeint = boost::numeric::odeint;

namespace {

using DenseStepper = odeint::result_of::make_dense_output<odeint::runge_kutta_dopri5<State>>::type;

double default_initial_step(std::span<const double> times, const IntegratorOptions& options) {
    if (options.initial_step > 0.0) return options.initial_step;
    const double span = times.empty() ? 1.0 : times.back();
    return span > 0.0 ? span * 1e-9 : 1e-9;
}

State split(const Eigen::VectorXcd& z) {
    const auto n = static_cast<std::size_t>(z.size());
    State x(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = z[static_cast<Eigen::Index>(i)].real();
        x[n + i] = z[static_cast<Eigen::Index>(i)].imag();
    }
    return x;
}

Eigen::VectorXcd join(const State& x) {
    const std::size_t n = x.size() / 2;
    Eigen::VectorXcd z(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) z[static_cast<Eigen::Index>(i)] = {x[i], x[n + i]};
    return z;
}

template <class Matrix>
RightHandSide complex_rhs(const Matrix& g) {
    return [&g](const State& x, State& dxdt) {
        const Eigen::VectorXcd dz = g * join(x);
        const std::size_t n = x.size() / 2;
        for (std::size_t i = 0; i < n; ++i) {
            dxdt[i] = dz[static_cast<Eigen::Index>(i)].real();
            dxdt[n + i] = dz[static_cast<Eigen::Index>(i)].imag();
        }
    };
}

} // namespace

void check_time_grid(std::span<const double> times) {
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i]) || times[i] < 0.0)
            throw Error(Errc::invalid_argument, fmt::format("time {} is not a finite non-negative value", times[i]));
        if (i > 0 && times[i] < times[i - 1]) throw Error(Errc::invalid_argument, "time grid must be sorted");
    }
}

struct DenseIntegrator::Impl {
    RightHandSide rhs;
    DenseStepper stepper;
    IntegratorOptions options;
    std::size_t steps{0};

    Impl(RightHandSide f, const IntegratorOptions& o)
        : rhs(std::move(f)),
          stepper(odeint::make_dense_output(o.abs_tol, o.rel_tol, odeint::runge_kutta_dopri5<State>())),
          options(o) {}

    double step() {
        if (++steps > options.max_steps)
            throw Error(Errc::integration_failure,
                        fmt::format("step budget {} exhausted at t = {}", options.max_steps, stepper.current_time()));
        auto system = [this](const State& x, State& dxdt, double) { rhs(x, dxdt); };
        const auto [t_old, t_new] = stepper.do_step(system);
        if (!(t_new > t_old) || !std::isfinite(t_new))
            throw Error(Errc::integration_failure, fmt::format("step size collapsed at t = {}", t_old));
        for (double v : stepper.current_state())
            if (!std::isfinite(v)) throw Error(Errc::integration_failure, fmt::format("non-finite state at t = {}", t_new));
        return t_new;
    }
};

DenseIntegrator::DenseIntegrator(RightHandSide rhs, const State& x0, double initial_step,
                                 const IntegratorOptions& options)
    : impl_(std::make_unique<Impl>(std::move(rhs), options)) {
    impl_->stepper.initialize(x0, 0.0, initial_step > 0.0 ? initial_step : 1e-9);
}

DenseIntegrator::~DenseIntegrator() = default;
DenseIntegrator::DenseIntegrator(DenseIntegrator&&) noexcept = default;
DenseIntegrator& DenseIntegrator::operator=(DenseIntegrator&&) noexcept = default;

double DenseIntegrator::step() { return impl_->step(); }
double DenseIntegrator::time() const { return impl_->stepper.current_time(); }
double DenseIntegrator::previous_time() const { return impl_->stepper.previous_time(); }
const State& DenseIntegrator::state() const { return impl_->stepper.current_state(); }

State DenseIntegrator::state_at(double t) const {
    State x(state().size());
    impl_->stepper.calc_state(t, x);
    return x;
}

std::vector<State> integrate(const RightHandSide& rhs, const State& x0, std::span<const double> times,
                             const IntegratorOptions& options) {
    check_time_grid(times);
    std::vector<State> out;
    out.reserve(times.size());
    DenseIntegrator integrator(rhs, x0, default_initial_step(times, options), options);
    for (double t : times) {
        if (t == 0.0) {
            out.push_back(x0);
            continue;
        }
        while (integrator.time() < t) integrator.step();
        out.push_back(integrator.state_at(t));
    }
    return out;
}

DensePropagator::DensePropagator(Eigen::MatrixXcd generator, double condition_limit, IntegratorOptions options)
    : generator_(std::move(generator)), options_(options) {
    if (generator_.rows() != generator_.cols()) throw Error(Errc::invalid_argument, "generator must be square");
    const auto n = generator_.rows();
    if (n == 0) {
        route_ = PropagationRoute::eigendecomposition;
        return;
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(generator_);
    if (solver.info() == Eigen::Success) {
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(solver.eigenvectors());
        Eigen::MatrixXcd inverse = lu.inverse();
        const double cond = solver.eigenvectors().cwiseAbs().colwise().sum().maxCoeff() *
                            inverse.cwiseAbs().colwise().sum().maxCoeff();
        const double scale = std::max(generator_.cwiseAbs().maxCoeff(), 1e-300);
        const double residual =
            (generator_ * solver.eigenvectors() - solver.eigenvectors() * solver.eigenvalues().asDiagonal())
                .cwiseAbs()
                .maxCoeff();
        if (std::isfinite(cond) && cond < condition_limit && residual <= 1e-10 * scale * static_cast<double>(n)) {
            route_ = PropagationRoute::eigendecomposition;
            condition_ = cond;
            eigenvalues_ = solver.eigenvalues();
            vectors_ = solver.eigenvectors();
            inverse_vectors_ = std::move(inverse);
            return;
        }
        condition_ = std::isfinite(cond) ? cond : std::numeric_limits<double>::infinity();
    } else {
        condition_ = std::numeric_limits<double>::infinity();
    }
    route_ = PropagationRoute::integration;
}

Eigen::VectorXcd DensePropagator::apply(const Eigen::VectorXcd& x0, double t) const {
    const double times[] = {t};
    return propagate(x0, times).front();
}

std::vector<Eigen::VectorXcd> DensePropagator::propagate(const Eigen::VectorXcd& x0,
                                                         std::span<const double> times) const {
    check_time_grid(times);
    if (x0.size() != generator_.rows()) throw Error(Errc::length_mismatch, "state size does not match generator");
    std::vector<Eigen::VectorXcd> out;
    out.reserve(times.size());
    if (route_ == PropagationRoute::eigendecomposition) {
        const Eigen::VectorXcd coefficients = inverse_vectors_ * x0;
        for (double t : times) {
            const Eigen::VectorXcd phases = (eigenvalues_ * t).array().exp();
            out.push_back(vectors_ * phases.cwiseProduct(coefficients));
        }
        return out;
    }
    auto states = integrate(complex_rhs(generator_), split(x0), times, options_);
    for (const auto& s : states) out.push_back(join(s));
    return out;
}

std::vector<Eigen::VectorXcd> propagate_sparse(const Eigen::SparseMatrix<std::complex<double>>& generator,
                                               const Eigen::VectorXcd& x0, std::span<const double> times,
                                               const IntegratorOptions& options) {
    if (x0.size() != generator.rows()) throw Error(Errc::length_mismatch, "state size does not match generator");
    auto states = integrate(complex_rhs(generator), split(x0), times, options);
    std::vector<Eigen::VectorXcd> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(join(s));
    return out;
}

} // namespace relax::numerics
