#include "relax/reduced.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "relax/error.hpp"

namespace relax::reduced {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double x, const char* what) {
    if (!std::isfinite(x) || x <= 0.0)
        throw Error(Errc::invalid_argument, fmt::format("{} must be positive and finite, got {}", what, x));
}

unsigned log2_exact(std::uint64_t states) {
    if (states < 2 || (states & (states - 1)) != 0)
        throw Error(Errc::invalid_argument, fmt::format("N = {} is not a power of two", states));
    return static_cast<unsigned>(std::countr_zero(states));
}

// sinh(x)/x and sin(x)/x without cancellation near zero.
double sinhc(double x) {
    return std::abs(x) < 1e-4 ? 1.0 + x * x / 6.0 : std::sinh(x) / x;
}
double sinc(double x) {
    return std::abs(x) < 1e-4 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
}

double log_sum_exp(std::span<const double> xs) {
    double m = -kInf;
    for (double x : xs) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

} // namespace

std::string_view to_string(Method method) noexcept {
    return method == Method::rate ? "rate" : "quantum";
}

Method parse_method(std::string_view name) {
    if (name == "rate") return Method::rate;
    if (name == "quantum") return Method::quantum;
    throw ConfigError(fmt::format("unknown method '{}' (expected rate or quantum)", name));
}

std::string_view to_string(InitialState init) noexcept {
    switch (init) {
        case InitialState::uniform_diagonal: return "uniform";
        case InitialState::coherent: return "coherent";
        case InitialState::top_shell: return "top";
    }
    return "?";
}

InitialState parse_initial_state(std::string_view name) {
    if (name == "uniform") return InitialState::uniform_diagonal;
    if (name == "coherent") return InitialState::coherent;
    if (name == "top") return InitialState::top_shell;
    throw ConfigError(fmt::format("unknown initial state '{}' (expected uniform, coherent or top)", name));
}

double two_state_prefactor(models::CouplingKind kind, std::uint64_t states) {
    const auto N = static_cast<double>(states);
    switch (kind) {
        case models::CouplingKind::projector: return 1.0;
        case models::CouplingKind::indirect: return N * N / ((N + 1.0) * (N + 1.0));
        case models::CouplingKind::direct: {
            const double r = std::sqrt(N) + 1.0;
            return N * N / (r * r);
        }
        case models::CouplingKind::hadamard: return N;
        case models::CouplingKind::collective_bitflip: break;
    }
    throw Error(Errc::invalid_argument, "the bit-flip coupling has no two-variable reduction");
}

Eigen::Matrix2d two_state_matrix(Method method, std::uint64_t states, double beta, double lambda, double g,
                                 double delta_e) {
    if (states < 2) throw Error(Errc::invalid_argument, "two-state reduction needs N >= 2");
    require_positive(delta_e, "delta_e");
    const bath::BathSpectrum bath(beta, bath::SpectralDensity::flat(g));
    const double down = bath.gamma(delta_e);
    const double up = bath.gamma(-delta_e);
    const auto N = static_cast<double>(states);
    const double s = lambda * lambda / (N * N);
    Eigen::Matrix2d M;
    if (method == Method::rate) {
        M << -up * (N - 1.0), down,
              up * (N - 1.0), -down;
    } else {
        M << -(N - 1.0) * up, down,
              (N - 1.0) * (N - 1.0) * up, -(N - 1.0) * down;
    }
    return s * M;
}

double hadamard_initial_z2(unsigned n, models::StateIndex w) {
    if (n == 0 || n > 62) throw Error(Errc::out_of_range, fmt::format("n = {} out of range", n));
    const auto N = models::StateIndex{1} << n;
    if (w >= N) throw Error(Errc::out_of_range, fmt::format("w = {} outside [0, {})", w, N));
    const double Nd = static_cast<double>(N);
    return (w == 0 ? Nd - 2.0 : 0.0) + 1.0 / Nd;
}

Eigen::Vector2d two_state_initial(const TwoStateParams& p, InitialState init) {
    const auto N = static_cast<double>(p.states);
    if (init == InitialState::top_shell) throw Error(Errc::invalid_argument, "top-shell state is a ladder state");
    Eigen::Vector2d z0(1.0 / N, (N - 1.0) / N);
    if (p.method == Method::rate || init == InitialState::uniform_diagonal) return z0;
    if (p.kind == models::CouplingKind::hadamard)
        z0[1] = hadamard_initial_z2(log2_exact(p.states), p.w);
    else
        z0[1] = (N - 1.0) * (N - 1.0) / N;
    return z0;
}

TwoStateSystem build_two_state(const TwoStateParams& p, InitialState init) {
    TwoStateSystem sys;
    sys.M = two_state_prefactor(p.kind, p.states) *
            two_state_matrix(p.method, p.states, p.beta, p.lambda, p.g, p.delta_e);
    sys.z0 = two_state_initial(p, init);
    sys.params = p;
    return sys;
}

Eigen::Matrix2d expm2(const Eigen::Matrix2d& M, double t) {
    const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
    const double half = 0.5 * M.trace();
    const double det = M.determinant();
    const double disc = half * half - det;
    const double scale = M.cwiseAbs().maxCoeff();
    if (scale == 0.0) return I;
    const Eigen::Matrix2d B = M - half * I;
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        if (s > 1e-4 * scale) {
            // Larger-magnitude eigenvalue directly, the other from the product of both.
            const double big = half >= 0.0 ? half + s : half - s;
            const double small = big != 0.0 ? det / big : 0.0;
            const double hi = std::max(big, small), lo = std::min(big, small);
            return (std::exp(hi * t) * (M - lo * I) - std::exp(lo * t) * (M - hi * I)) / (hi - lo);
        }
        return std::exp(half * t) * (std::cosh(s * t) * I + t * sinhc(s * t) * B);
    }
    const double q = std::sqrt(-disc);
    return std::exp(half * t) * (std::cos(q * t) * I + t * sinc(q * t) * B);
}

Eigen::Vector2d two_state_at(const TwoStateSystem& system, double t) {
    return expm2(system.M, t) * system.z0;
}

Trajectory solve_two_state(const TwoStateSystem& system, std::span<const double> times) {
    numerics::check_time_grid(times);
    Trajectory traj;
    traj.labels = {"z1", "z2"};
    for (double t : times) {
        const Eigen::Vector2d z = two_state_at(system, t);
        traj.times.push_back(t);
        traj.values.push_back({z[0], z[1]});
    }
    return traj;
}

Eigen::Vector2d two_state_stationary(const TwoStateSystem& system) {
    const Eigen::Matrix2d& M = system.M;
    const double half = 0.5 * M.trace();
    const double disc = half * half - M.determinant();
    if (half > 0.0) throw Error(Errc::invalid_argument, "two-state matrix is not relaxing");
    if (disc < 0.0) return Eigen::Vector2d::Zero();
    const double lo = half - std::sqrt(disc);
    if (lo == 0.0) return system.z0;
    const double hi = M.determinant() / lo;
    if (std::abs(hi) > 1e-12 * std::abs(lo)) {
        if (hi > 0.0) throw Error(Errc::invalid_argument, "two-state matrix has a growing mode");
        return Eigen::Vector2d::Zero();
    }
    // Projection onto the zero mode.
    return (M - lo * Eigen::Matrix2d::Identity()) * system.z0 / (-lo);
}

double tau_re(double states, double beta, double delta_e, double lambda, double g) {
    require_positive(states, "N");
    require_positive(delta_e, "delta_e");
    require_positive(lambda, "lambda");
    require_positive(g, "g");
    if (!(beta > 0.0)) throw Error(Errc::invalid_argument, "beta must be positive");
    const double x = std::expm1(beta * delta_e);  // e^{beta dE} - 1
    const double ratio = std::isfinite(x) ? x / (states + x) : 1.0;
    return states * states * ratio / (lambda * lambda * g);
}

double tau_me(double states, double beta, double delta_e, double lambda, double g) {
    require_positive(states, "N");
    require_positive(delta_e, "delta_e");
    require_positive(lambda, "lambda");
    require_positive(g, "g");
    if (!(beta > 0.0)) throw Error(Errc::invalid_argument, "beta must be positive");
    if (states <= 1.0) throw Error(Errc::invalid_argument, "tau_me needs N > 1");
    return states * states * std::tanh(0.5 * beta * delta_e) / (lambda * lambda * g * (states - 1.0));
}

void LadderSystem::apply(const double* z, double* dz) const {
    const std::size_t m = diag.size();
    for (std::size_t a = 0; a < m; ++a) {
        double v = diag[a] * z[a];
        if (a > 0) v += lower[a] * z[a - 1];
        if (a + 1 < m) v += upper[a] * z[a + 1];
        dz[a] = v;
    }
}

Eigen::MatrixXd LadderSystem::dense() const {
    const auto m = static_cast<Eigen::Index>(diag.size());
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        M(a, a) = diag[static_cast<std::size_t>(a)];
        if (a > 0) M(a, a - 1) = lower[static_cast<std::size_t>(a)];
        if (a + 1 < m) M(a, a + 1) = upper[static_cast<std::size_t>(a)];
    }
    return M;
}

double LadderSystem::conserved(std::span<const double> z) const {
    if (z.size() != diag.size()) throw Error(Errc::length_mismatch, "shell vector size");
    double s = 0.0;
    for (std::size_t a = 0; a < z.size(); ++a) s += std::exp(log_weights[a]) * z[a];
    return s;
}

LadderSystem build_ladder(Method method, const models::LadderModel& model, const bath::BathSpectrum& bath,
                          double lambda, double eta) {
    const unsigned n = model.n;
    if (n < 1 || n > 1000) throw Error(Errc::out_of_range, fmt::format("ladder size n = {} outside [1, 1000]", n));
    if (eta < 0.0) eta = models::eta(models::CouplingKind::collective_bitflip, n);
    const double c = lambda * lambda * eta * eta;
    const auto& E = model.shell_energies;

    LadderSystem sys;
    sys.n = n;
    sys.method = method;
    sys.lower.assign(n + 1, 0.0);
    sys.diag.assign(n + 1, 0.0);
    sys.upper.assign(n + 1, 0.0);
    sys.log_weights.assign(n + 1, 0.0);
    for (unsigned a = 0; a <= n; ++a) {
        const double al = a, nn = n;
        // Decay a -> a-1 releases E_a - E_{a-1}; excitation a -> a+1 absorbs E_{a+1} - E_a.
        const double down = a > 0 ? bath.gamma(E[a] - E[a - 1]) : 0.0;
        const double up = a < n ? bath.gamma(E[a] - E[a + 1]) : 0.0;
        if (method == Method::rate) {
            if (a > 0) sys.lower[a] = c * (nn - al + 1.0) * bath.gamma(E[a - 1] - E[a]);
            sys.diag[a] = -c * (al * down + (nn - al) * up);
            if (a < n) sys.upper[a] = c * (al + 1.0) * bath.gamma(E[a + 1] - E[a]);
        } else {
            if (a > 0) sys.lower[a] = c * (nn - al + 1.0) * (nn - al + 1.0) * bath.gamma(E[a - 1] - E[a]);
            sys.diag[a] = -c * (down * al * (nn - al + 1.0) + up * (nn - al) * (al + 1.0));
            if (a < n) sys.upper[a] = c * (al + 1.0) * (al + 1.0) * bath.gamma(E[a + 1] - E[a]);
            sys.log_weights[a] = -models::log_shell_degeneracy(n, a);
        }
    }
    return sys;
}

std::vector<double> ladder_rate_eigenvalues(unsigned n, double beta, double lambda, double g, double delta_e) {
    if (n < 1) throw Error(Errc::out_of_range, "n must be at least 1");
    require_positive(delta_e, "delta_e");
    if (!(beta > 0.0)) throw Error(Errc::invalid_argument, "beta must be positive");
    const double eta = 1.0 / n;
    const double coth = std::isinf(beta) ? 1.0 : 1.0 / std::tanh(0.5 * beta * delta_e);
    std::vector<double> out;
    for (unsigned a = 0; a <= n; ++a) out.push_back(-static_cast<double>(a) * lambda * lambda * eta * eta * g * coth);
    return out;
}

std::vector<double> ladder_numerical_eigenvalues(const LadderSystem& system) {
    const auto m = static_cast<Eigen::Index>(system.size());
    Eigen::VectorXd d(m), off(std::max<Eigen::Index>(m - 1, 0));
    for (Eigen::Index a = 0; a < m; ++a) d[a] = system.diag[static_cast<std::size_t>(a)];
    for (Eigen::Index a = 0; a + 1 < m; ++a) {
        const double p = system.upper[static_cast<std::size_t>(a)] * system.lower[static_cast<std::size_t>(a + 1)];
        if (p < 0.0) throw Error(Errc::invalid_argument, "ladder with negative off-diagonal product");
        off[a] = std::sqrt(p);
    }
    if (m == 1) return {d[0]};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(d, off, Eigen::EigenvaluesOnly);
    std::vector<double> out(solver.eigenvalues().data(), solver.eigenvalues().data() + m);
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

std::vector<double> ladder_initial(const LadderSystem& system, InitialState init) {
    const unsigned n = system.n;
    std::vector<double> z(n + 1, 0.0);
    if (init == InitialState::top_shell) {
        z[n] = 1.0;
        return z;
    }
    const bool squared = init == InitialState::coherent && system.method == Method::quantum;
    const double log_norm = n * std::log(2.0);
    for (unsigned a = 0; a <= n; ++a) {
        const double lb = models::log_shell_degeneracy(n, a);
        z[a] = std::exp((squared ? 2.0 : 1.0) * lb - log_norm);
    }
    return z;
}

std::vector<double> ladder_stationary(const LadderSystem& system, std::span<const double> z0) {
    const std::size_t m = system.size();
    if (z0.size() != m) throw Error(Errc::length_mismatch, "initial shell vector size");
    std::vector<double> logz(m, -kInf);
    logz[0] = 0.0;
    for (std::size_t a = 0; a + 1 < m; ++a) {
        if (!std::isfinite(logz[a]) || system.lower[a + 1] == 0.0) break;
        if (system.upper[a] == 0.0) throw Error(Errc::invalid_argument, "ladder without decay channel");
        logz[a + 1] = logz[a] + std::log(system.lower[a + 1]) - std::log(system.upper[a]);
    }
    std::vector<double> weighted(m);
    for (std::size_t a = 0; a < m; ++a) weighted[a] = logz[a] + system.log_weights[a];
    const double log_total = log_sum_exp(weighted);
    const double conserved = system.conserved(z0);
    std::vector<double> out(m);
    for (std::size_t a = 0; a < m; ++a) out[a] = conserved * std::exp(logz[a] - log_total);
    return out;
}

LadderPropagator::LadderPropagator(LadderSystem system, LadderSolveOptions options)
    : system_(std::move(system)), options_(options) {
    const std::size_t m = system_.size();
    Eigen::VectorXd log_scale(static_cast<Eigen::Index>(m));
    log_scale[0] = 0.0;
    Eigen::VectorXd d(static_cast<Eigen::Index>(m)), off(static_cast<Eigen::Index>(m > 0 ? m - 1 : 0));
    for (std::size_t a = 0; a < m; ++a) d[static_cast<Eigen::Index>(a)] = system_.diag[a];
    for (std::size_t a = 0; a + 1 < m; ++a) {
        const double up = system_.upper[a], lo = system_.lower[a + 1];
        if (up == 0.0 && lo == 0.0) {
            log_scale[static_cast<Eigen::Index>(a + 1)] = log_scale[static_cast<Eigen::Index>(a)];
            off[static_cast<Eigen::Index>(a)] = 0.0;
            continue;
        }
        if (!(up > 0.0) || !(lo > 0.0)) return;  // one-way chain: not symmetrizable
        log_scale[static_cast<Eigen::Index>(a + 1)] =
            log_scale[static_cast<Eigen::Index>(a)] + 0.5 * (std::log(lo) - std::log(up));
        off[static_cast<Eigen::Index>(a)] = std::sqrt(up * lo);
    }
    const double condition = std::exp(log_scale.maxCoeff() - log_scale.minCoeff());
    if (!(condition < options_.condition_limit)) return;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    if (m == 1) {
        eigenvalues_ = d;
        eigenvectors_ = Eigen::MatrixXd::Identity(1, 1);
    } else {
        solver.computeFromTridiagonal(d, off, Eigen::ComputeEigenvectors);
        if (solver.info() != Eigen::Success) return;
        eigenvalues_ = solver.eigenvalues();
        eigenvectors_ = solver.eigenvectors();
    }
    scale_ = log_scale.array().exp();
    route_ = numerics::PropagationRoute::eigendecomposition;
}

std::vector<double> LadderPropagator::at(std::span<const double> z0, double t) const {
    if (route_ != numerics::PropagationRoute::eigendecomposition)
        throw Error(Errc::invalid_argument, "closed-form evaluation needs the eigendecomposition route");
    const auto m = static_cast<Eigen::Index>(system_.size());
    if (static_cast<Eigen::Index>(z0.size()) != m) throw Error(Errc::length_mismatch, "initial shell vector size");
    Eigen::VectorXd y(m);
    for (Eigen::Index a = 0; a < m; ++a) y[a] = z0[static_cast<std::size_t>(a)] / scale_[a];
    Eigen::VectorXd coeff = eigenvectors_.transpose() * y;
    coeff.array() *= (eigenvalues_.array() * t).exp();
    const Eigen::VectorXd z = scale_.cwiseProduct(eigenvectors_ * coeff);
    return {z.data(), z.data() + m};
}

std::vector<std::vector<double>> LadderPropagator::propagate(std::span<const double> z0,
                                                             std::span<const double> times) const {
    numerics::check_time_grid(times);
    if (z0.size() != system_.size()) throw Error(Errc::length_mismatch, "initial shell vector size");
    std::vector<std::vector<double>> out;
    if (route_ == numerics::PropagationRoute::eigendecomposition) {
        for (double t : times) out.push_back(at(z0, t));
        return out;
    }
    const LadderSystem& sys = system_;
    auto rhs = [&sys](const numerics::State& x, numerics::State& dx) { sys.apply(x.data(), dx.data()); };
    return numerics::integrate(rhs, numerics::State(z0.begin(), z0.end()), times, options_.integrator);
}

Trajectory solve_ladder(const LadderSystem& system, std::span<const double> z0, std::span<const double> times,
                        const LadderSolveOptions& options) {
    const LadderPropagator prop(system, options);
    Trajectory traj;
    traj.times.assign(times.begin(), times.end());
    for (std::size_t a = 0; a < system.size(); ++a) traj.labels.push_back(fmt::format("z{}", a));
    traj.values = prop.propagate(z0, times);
    return traj;
}

} // namespace relax::reduced
