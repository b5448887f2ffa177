#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "relax/error.hpp"
#include "relax/reduced.hpp"
#include "support.hpp"

using namespace relax;
using models::CouplingKind;
using reduced::InitialState;
using reduced::Method;

namespace {

reduced::TwoStateParams params(CouplingKind kind, Method method, std::uint64_t N, double beta) {
    return {kind, method, N, beta, 0.01, 2.0, 1.0, 0};
}

reduced::LadderSystem ladder(Method method, unsigned n, double beta, double lambda = 0.01) {
    const bath::BathSpectrum b(beta, bath::SpectralDensity::flat(2.0));
    return reduced::build_ladder(method, models::LadderModel::equidistant(n, 1.0), b, lambda);
}

} // namespace

TEST_CASE("two-state matrices and prefactors") {
    const double beta = std::log(57.0);
    const auto rate2 = reduced::build_two_state(params(CouplingKind::projector, Method::rate, 2, beta)).M;
    const auto quantum2 = reduced::build_two_state(params(CouplingKind::projector, Method::quantum, 2, beta)).M;
    CHECK((rate2 - quantum2).cwiseAbs().maxCoeff() < 1e-18);

    for (std::uint64_t N : {4ull, 16ull, 1024ull}) {
        const double Nd = static_cast<double>(N);
        for (auto method : {Method::rate, Method::quantum}) {
            const auto base = reduced::build_two_state(params(CouplingKind::projector, method, N, beta)).M;
            const auto scaled = [&](CouplingKind k, double f) {
                const auto M = reduced::build_two_state(params(k, method, N, beta)).M;
                return (M - f * base).cwiseAbs().maxCoeff() / base.cwiseAbs().maxCoeff();
            };
            CHECK(scaled(CouplingKind::indirect, Nd * Nd / ((Nd + 1) * (Nd + 1))) < 1e-14);
            CHECK(scaled(CouplingKind::direct, Nd * Nd / ((std::sqrt(Nd) + 1) * (std::sqrt(Nd) + 1))) < 1e-14);
            CHECK(scaled(CouplingKind::hadamard, Nd) < 1e-14);
        }
    }
}

TEST_CASE("two-state trajectories") {
    const double beta = std::log(57.0);
    const auto sys = reduced::build_two_state(params(CouplingKind::projector, Method::rate, 4, beta));
    CHECK((reduced::two_state_at(sys, 0.0) - sys.z0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(reduced::two_state_at(sys, 1e8)[0] == doctest::Approx(0.95).epsilon(1e-12));
    CHECK(reduced::two_state_stationary(sys)[0] == doctest::Approx(0.95).epsilon(1e-12));

    const double times[] = {0.0, 1e3, 1e4};
    const auto traj = reduced::solve_two_state(sys, times);
    CHECK(traj.labels == std::vector<std::string>{"z1", "z2"});
    CHECK(traj.values[2][0] == doctest::Approx(reduced::two_state_at(sys, 1e4)[0]));
}

TEST_CASE("projector quantum dynamics from the uniform state is not ergodic") {
    double previous = 1.0;
    for (std::uint64_t N : {4ull, 16ull, 64ull, 256ull}) {
        const double beta = std::log(19.0 * static_cast<double>(N - 1));
        const auto sys = reduced::build_two_state(params(CouplingKind::projector, Method::quantum, N, beta),
                                                  InitialState::uniform_diagonal);
        const double z = reduced::two_state_stationary(sys)[0];
        CHECK(z < 0.95);
        CHECK(z < previous);
        previous = z;
    }
}

TEST_CASE("matrix exponential of 2x2 generators") {
    test::Gen gen(606);
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::Matrix2d M;
        M << gen.uniform(-2, 0), gen.uniform(0, 2), gen.uniform(0, 2), gen.uniform(-2, 0);
        if (trial % 4 == 0) M(1, 0) = -M(0, 1) * gen.uniform(0.1, 1.0);  // complex eigenvalues
        if (trial % 4 == 1) M(1, 1) = M(0, 0) + 1e-9;                     // nearly degenerate
        const double t = gen.log_uniform(1e-3, 10.0);
        // Taylor series with scaling and squaring as the oracle.
        const int squarings = 20;
        const Eigen::Matrix2d A = M * (t / std::ldexp(1.0, squarings));
        Eigen::Matrix2d term = Eigen::Matrix2d::Identity(), sum = term;
        for (int k = 1; k < 20; ++k) {
            term = term * A / k;
            sum += term;
        }
        for (int s = 0; s < squarings; ++s) sum = sum * sum;
        CHECK((reduced::expm2(M, t) - sum).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, sum.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("closed-form relaxation times") {
    const double beta = std::log(57.0);
    CHECK(reduced::tau_re(4, beta, 1.0, 0.01, 2.0) == doctest::Approx(16.0 * 56.0 / (1e-4 * 2.0 * 60.0)).epsilon(1e-12));
    CHECK(reduced::tau_re(4, beta, 1.0, 0.01, 2.0) == doctest::Approx(74666.7).epsilon(1e-6));
    CHECK(reduced::tau_me(4, beta, 1.0, 0.01, 2.0) == doctest::Approx(16.0 * (56.0 / 58.0) / (1e-4 * 2.0 * 3.0)).epsilon(1e-12));
    CHECK(reduced::tau_me(4, beta, 1.0, 0.01, 2.0) == doctest::Approx(25747.13).epsilon(1e-6));
    for (double N : {1e4, 1e6, 1e8}) {
        const double b = std::log(N);
        CHECK(reduced::tau_re(N, b, 1.0, 0.01, 2.0) / (N * N) == doctest::Approx(1.0 / (1e-4 * 2.0 * 2.0)).epsilon(1e-3));
        CHECK(reduced::tau_me(N, b, 1.0, 0.01, 2.0) / N == doctest::Approx(1.0 / (1e-4 * 2.0)).epsilon(1e-3));
    }
}

TEST_CASE("initial states") {
    const auto p = params(CouplingKind::projector, Method::quantum, 8, 1.0);
    CHECK(reduced::two_state_initial(p, InitialState::coherent)[1] == doctest::Approx(49.0 / 8.0));
    CHECK(reduced::two_state_initial(p, InitialState::uniform_diagonal)[1] == doctest::Approx(7.0 / 8.0));
    CHECK_THROWS_AS(reduced::two_state_initial(p, InitialState::top_shell), Error);
    CHECK(reduced::hadamard_initial_z2(2, 0) == doctest::Approx(2.25));
    CHECK(reduced::hadamard_initial_z2(2, 3) == doctest::Approx(0.25));
    CHECK(reduced::hadamard_initial_z2(1, 0) == doctest::Approx(0.5));
}

TEST_CASE("ladder coefficients") {
    const double beta = 0.9, lambda = 0.01, g = 2.0;
    const bath::BathSpectrum b(beta, bath::SpectralDensity::flat(g));
    const auto lm = models::LadderModel::equidistant(1, 1.0);
    const auto r1 = reduced::build_ladder(Method::rate, lm, b, lambda);
    const auto q1 = reduced::build_ladder(Method::quantum, lm, b, lambda);
    CHECK((r1.dense() - q1.dense()).cwiseAbs().maxCoeff() < 1e-20);

    const auto q3 = reduced::build_ladder(Method::quantum, models::LadderModel::equidistant(3, 1.0), b, lambda);
    const double c = lambda * lambda / 9.0;
    CHECK(q3.lower[2] == doctest::Approx(c * 4.0 * b.gamma(-1.0)).epsilon(1e-14));
    CHECK(q3.upper[2] == doctest::Approx(c * 9.0 * b.gamma(1.0)).epsilon(1e-14));

    const auto cold = ladder(Method::rate, 6, bath::kZeroTemperature);
    for (double x : cold.lower) CHECK(x == 0.0);
}

TEST_CASE("ladder eigenvalues") {
    const auto ev = reduced::ladder_rate_eigenvalues(3, bath::kZeroTemperature, 0.01, 2.0, 1.0);
    const double unit = 1e-4 * 2.0 / 9.0;
    REQUIRE(ev.size() == 4);
    for (unsigned a = 0; a <= 3; ++a) CHECK(ev[a] == doctest::Approx(-unit * a).epsilon(1e-12));

    const auto hot = reduced::ladder_rate_eigenvalues(5, 1.0, 0.01, 2.0, 1.0);
    const auto cooler = reduced::ladder_rate_eigenvalues(5, 2.0, 0.01, 2.0, 1.0);
    const double ratio = (1.0 / std::tanh(0.5)) / (1.0 / std::tanh(1.0));
    for (unsigned a = 1; a <= 5; ++a) CHECK(hot[a] / cooler[a] == doctest::Approx(ratio).epsilon(1e-12));

    for (unsigned n = 1; n <= 12; ++n) {
        const auto sys = ladder(Method::rate, n, 0.7);
        Eigen::EigenSolver<Eigen::MatrixXd> es(sys.dense());
        std::vector<double> num;
        for (int i = 0; i <= static_cast<int>(n); ++i) num.push_back(es.eigenvalues()[i].real());
        std::sort(num.begin(), num.end(), std::greater<>());
        auto exact = reduced::ladder_rate_eigenvalues(n, 0.7, 0.01, 2.0, 1.0);
        std::sort(exact.begin(), exact.end(), std::greater<>());
        for (unsigned a = 0; a <= n; ++a) CHECK(std::abs(num[a] - exact[a]) < 1e-10 * std::abs(exact.back()));
    }
}

TEST_CASE("ladder stationary and conservation properties") {
    test::Gen gen(707);
    for (int trial = 0; trial < 30; ++trial) {
        const unsigned n = static_cast<unsigned>(gen.integer(1, 60));
        const double beta = gen.log_uniform(0.05, 5.0);
        const auto method = trial % 2 ? Method::quantum : Method::rate;
        const auto sys = ladder(method, n, beta, 0.1);
        const auto z0 = reduced::ladder_initial(sys, trial % 3 ? InitialState::top_shell
                                                               : (method == Method::quantum ? InitialState::coherent
                                                                                            : InitialState::uniform_diagonal));
        const auto ev = reduced::ladder_numerical_eigenvalues(sys);
        const double slow = std::abs(ev[1]);
        std::vector<double> times;
        for (int i = 0; i <= 10; ++i) times.push_back(i * 0.5 / slow);
        const auto traj = reduced::solve_ladder(sys, z0, times);
        CAPTURE(n);
        CAPTURE(beta);
        for (const auto& z : traj.values) {
            if (method == Method::rate) {
                double sum = 0.0;
                for (double x : z) sum += x;
                CHECK(std::abs(sum - 1.0) < 1e-9);
            } else {
                CHECK(std::abs(sys.conserved(z) - sys.conserved(z0)) < 1e-10 * std::max(1.0, sys.conserved(z0)));
                for (unsigned a = 0; a <= n; ++a) CHECK(z[a] <= test::binomial(n, a) * (1 + 1e-8) + 1e-12);
            }
        }
    }
}

TEST_CASE("rate ladder Gibbs state is a fixed point") {
    const double beta = 1.2;
    const auto lm = models::LadderModel::equidistant(10, 1.0);
    const auto gibbs = models::gibbs_shell_populations(lm, beta);
    const auto sys = ladder(Method::rate, 10, beta);
    const double times[] = {0.0, 1e4, 1e6};
    const auto traj = reduced::solve_ladder(sys, gibbs, times);
    for (const auto& z : traj.values)
        for (unsigned a = 0; a <= 10; ++a) CHECK(std::abs(z[a] - gibbs[a]) < 1e-12);
    const auto stat = reduced::ladder_stationary(sys, reduced::ladder_initial(sys, InitialState::top_shell));
    for (unsigned a = 0; a <= 10; ++a) CHECK(std::abs(stat[a] - gibbs[a]) < 1e-12);
}

TEST_CASE("zero-temperature rate ladder matches the cascade solution") {
    const unsigned n = 8;
    const double lambda = 0.1, g = 2.0;
    const bath::BathSpectrum b(bath::kZeroTemperature, bath::SpectralDensity::flat(g));
    const auto lm = models::LadderModel::equidistant(n, 1.0);
    const auto sys = reduced::build_ladder(Method::rate, lm, b, lambda, 1.0);
    const auto coeffs = reduced::CascadeCoefficients::rate(n, lambda * lambda * g);
    std::vector<double> times;
    for (int i = 0; i <= 12; ++i) times.push_back(i * 0.5 / (lambda * lambda * g));
    const auto traj = reduced::solve_ladder(sys, reduced::ladder_initial(sys, InitialState::top_shell), times);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto exact = reduced::cascade_solution(coeffs, times[i]);
        for (unsigned k = 0; k <= n; ++k) CHECK(std::abs(traj.values[i][k] - exact[k]) < 1e-8);
    }
}

TEST_CASE("ladder propagation routes") {
    const auto warm = ladder(Method::rate, 20, 1.0);
    CHECK(reduced::LadderPropagator(warm).route() == numerics::PropagationRoute::eigendecomposition);
    const auto cold = ladder(Method::rate, 20, bath::kZeroTemperature);
    CHECK(reduced::LadderPropagator(cold).route() == numerics::PropagationRoute::integration);
}
