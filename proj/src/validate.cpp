#include "relax/validate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "relax/analysis.hpp"
#include "relax/bms.hpp"
#include "relax/harness.hpp"
#include "relax/reduced.hpp"

namespace relax::validate {

namespace {

using models::CouplingKind;
using reduced::InitialState;
using reduced::Method;

constexpr double kLambda = 0.1;
constexpr double kG = 2.0;
constexpr double kDeltaE = 1.0;
// Dephasing rate for the zero-frequency terms; it drops out of every reduced variable.
constexpr double kGammaZero = 0.37;
constexpr std::size_t kOracleStates = 256;
constexpr std::size_t kSamples = 21;

bath::SpectralDensity flat_bath(double gamma_zero = kGammaZero) {
    return bath::SpectralDensity::flat(kG, gamma_zero);
}

Check make_check(std::string name, double error, double tolerance) {
    const bool pass = std::isfinite(error) && error <= tolerance;
    return {std::move(name), error, tolerance, pass};
}

std::vector<double> linspace(double end, std::size_t count) {
    std::vector<double> t(count);
    for (std::size_t i = 0; i < count; ++i) t[i] = end * static_cast<double>(i) / static_cast<double>(count - 1);
    return t;
}

double max_abs_difference(const Trajectory& a, const Trajectory& b) {
    double err = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& x = a.values[i];
        const auto& y = b.values[i];
        for (std::size_t k = 0; k < std::min(x.size(), y.size()); ++k) err = std::max(err, std::abs(x[k] - y[k]));
    }
    return err;
}

bms::VariableSet two_state_variables(CouplingKind kind, Method method) {
    if (method == Method::rate) return bms::VariableSet::rate_pair;
    return kind == CouplingKind::hadamard ? bms::VariableSet::hadamard_pair : bms::VariableSet::quantum_pair;
}

bms::DensityMatrix initial_density(InitialState init, unsigned n, models::StateIndex w) {
    const std::size_t N = std::size_t{1} << n;
    switch (init) {
        case InitialState::uniform_diagonal: return bms::uniform_diagonal(N);
        case InitialState::coherent: return bms::coherent_superposition(N);
        case InitialState::top_shell: return bms::top_shell_state(n, w);
    }
    return {};
}

// Oracle trajectory projected on `set`, from the rate equation or the full master equation.
Trajectory oracle_projection(const bms::EnergyEigenbasisModel& model, const bath::BathSpectrum& bath, Method method,
                             const bms::DensityMatrix& rho0, std::span<const double> times, bms::VariableSet set,
                             models::StateIndex w, unsigned n, std::vector<Check>* diagnostics = nullptr,
                             const std::string& label = {}) {
    if (method == Method::rate) {
        const auto R = bms::build_rate_generator(model, bath, kLambda, kOracleStates);
        const Eigen::VectorXd p0 = rho0.diagonal().real();
        const auto pops = bms::evolve(R, p0, times);
        Trajectory out;
        out.times = pops.times;
        for (const auto& row : pops.values) {
            const Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(row.data(), static_cast<Eigen::Index>(row.size()));
            out.values.push_back(bms::project_reduced(p, set, w, n));
        }
        return out;
    }
    const bms::QuantumGenerator gen(model, bath, kLambda, {false, kOracleStates});
    const auto traj = bms::evolve(gen, rho0, times);
    if (diagnostics) {
        double trace_err = 0.0;
        double min_eig = std::numeric_limits<double>::infinity();
        for (const auto& rho : traj.states) {
            const auto d = bms::diagnose(rho);
            trace_err = std::max(trace_err, d.trace_error);
            min_eig = std::min(min_eig, d.min_eigenvalue);
        }
        diagnostics->push_back(make_check(label + " trace", trace_err, 1e-10));
        diagnostics->push_back(make_check(label + " positivity", std::max(0.0, -min_eig), 1e-8));
    }
    return bms::project_trajectory(traj, set, w, n);
}

double slowest_rate(const std::vector<double>& eigenvalues) {
    double scale = 0.0;
    for (double e : eigenvalues) scale = std::max(scale, std::abs(e));
    double slowest = std::numeric_limits<double>::infinity();
    for (double e : eigenvalues)
        if (std::abs(e) > 1e-12 * scale) slowest = std::min(slowest, std::abs(e));
    return slowest;
}

void nonlocal_case(std::vector<Check>& checks, std::vector<Check>* diagnostics, CouplingKind kind, Method method,
                   InitialState init, unsigned n, models::StateIndex w, double beta) {
    const std::uint64_t N = std::uint64_t{1} << n;
    const reduced::TwoStateParams p{kind, method, N, beta, kLambda, kG, kDeltaE, w};
    const auto sys = reduced::build_two_state(p, init);
    const auto times = linspace(5.0 / std::abs(sys.M.trace()), kSamples);
    const auto reduced_traj = reduced::solve_two_state(sys, times);

    const models::OracleModel om(n, kDeltaE, w);
    const auto model = bms::EnergyEigenbasisModel::oracle(om, kind);
    const bath::BathSpectrum bath(beta, flat_bath());
    const auto label = fmt::format("{} {} {} N={} w={} beta={}", models::to_string(kind), reduced::to_string(method),
                                   reduced::to_string(init), N, w, beta);
    const auto oracle = oracle_projection(model, bath, method, initial_density(init, n, w), times,
                                          two_state_variables(kind, method), w, n, diagnostics, label);
    checks.push_back(make_check(label, max_abs_difference(reduced_traj, oracle), 1e-6));
}

void ladder_case(std::vector<Check>& checks, std::vector<Check>* diagnostics, const models::LadderModel& lm,
                 Method method, InitialState init, double beta) {
    const bath::BathSpectrum bath(beta, flat_bath());
    const auto sys = reduced::build_ladder(method, lm, bath, kLambda);
    const auto times = linspace(5.0 / slowest_rate(reduced::ladder_numerical_eigenvalues(sys)), kSamples);
    const auto z0 = reduced::ladder_initial(sys, init);
    const auto reduced_traj = reduced::solve_ladder(sys, z0, times);

    const auto model = bms::EnergyEigenbasisModel::ladder(lm, models::eta(CouplingKind::collective_bitflip, lm.n));
    const auto set = method == Method::rate ? bms::VariableSet::shell_populations : bms::VariableSet::shell_coherent;
    const auto label = fmt::format("ladder {} {} n={} w={} beta={}{}", reduced::to_string(method),
                                   reduced::to_string(init), lm.n, lm.w, beta,
                                   lm.uniform_spacing() > 0 ? "" : " uneven");
    const auto oracle = oracle_projection(model, bath, method, initial_density(init, lm.n, lm.w), times, set, lm.w,
                                          lm.n, diagnostics, label);
    checks.push_back(make_check(label, max_abs_difference(reduced_traj, oracle), 1e-6));
}

std::vector<double> uneven_shells(unsigned n) {
    std::vector<double> e{0.0};
    for (unsigned a = 1; a <= n; ++a) e.push_back(e.back() + 0.7 + 0.15 * a);
    return e;
}

double derivative_difference(const bms::EnergyEigenbasisModel& model, const bath::BathSpectrum& first,
                             const bath::BathSpectrum& second, bool lamb_shift, bms::VariableSet set,
                             models::StateIndex w, unsigned n) {
    const bms::QuantumGenerator g0(model, first, kLambda, {false, kOracleStates});
    const bms::QuantumGenerator g1(model, second, kLambda, {lamb_shift, kOracleStates});

    std::vector<bms::DensityMatrix> states;
    for (auto init : {InitialState::uniform_diagonal, InitialState::coherent, InitialState::top_shell})
        states.push_back(initial_density(init, n, w));
    const double t[] = {0.0, 10.0, 100.0};
    const auto traj = bms::evolve(g0, bms::coherent_superposition(model.size()), t);
    states.insert(states.end(), traj.states.begin() + 1, traj.states.end());

    double err = 0.0;
    for (const auto& rho : states) {
        const auto d0 = bms::project_reduced(g0.apply(rho), set, w, n);
        const auto d1 = bms::project_reduced(g1.apply(rho), set, w, n);
        for (std::size_t k = 0; k < d0.size(); ++k) err = std::max(err, std::abs(d0[k] - d1[k]));
    }
    return err;
}

// Reduced-variable derivatives with and without a random Lamb-shift table.
double lamb_shift_effect(const bms::EnergyEigenbasisModel& model, double beta, bms::VariableSet set,
                         models::StateIndex w, unsigned n, std::mt19937_64& rng) {
    std::set<double> omegas;
    for (double a : model.energies)
        for (double c : model.energies)
            if (a - c > 1e-12) omegas.insert(a - c);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    bath::LambShiftTable table;
    for (double om : omegas) {
        const double s = dist(rng);
        table.set(om, {0.0, s});
        table.set(-om, {0.0, -s});
    }
    const bath::BathSpectrum plain(beta, flat_bath());
    const bath::BathSpectrum shifted(beta, flat_bath(), table);
    return derivative_difference(model, plain, shifted, true, set, w, n);
}

// Same comparison between two values of the zero-frequency rate.
double zero_frequency_effect(const bms::EnergyEigenbasisModel& model, double beta, bms::VariableSet set,
                             models::StateIndex w, unsigned n) {
    const bath::BathSpectrum low(beta, flat_bath(kGammaZero));
    const bath::BathSpectrum high(beta, flat_bath(25.0 * kGammaZero));
    return derivative_difference(model, low, high, false, set, w, n);
}

// sum_{a,b != w} (-1)^{w.a + w.b} / N, one term at a time.
double hadamard_z2_brute_force(unsigned n, models::StateIndex w) {
    const std::uint64_t N = std::uint64_t{1} << n;
    long long sum = 0;
    for (std::uint64_t a = 0; a < N; ++a) {
        if (a == w) continue;
        for (std::uint64_t b = 0; b < N; ++b) {
            if (b == w) continue;
            sum += (std::popcount(w & a) + std::popcount(w & b)) % 2 == 0 ? 1 : -1;
        }
    }
    return static_cast<double>(sum) / static_cast<double>(N);
}

double cascade_against_integration(const reduced::CascadeCoefficients& c, std::span<const double> times) {
    const unsigned n = c.n();
    numerics::RightHandSide rhs = [&](const numerics::State& y, numerics::State& dy) {
        for (unsigned k = 0; k <= n; ++k) dy[k] = c.beta[k] * y[k] + (k < n ? c.gamma[k] * y[k + 1] : 0.0);
    };
    numerics::State y0(n + 1, 0.0);
    y0[n] = 1.0;
    numerics::IntegratorOptions opts;
    opts.rel_tol = 1e-13;
    opts.abs_tol = 1e-16;
    const auto ys = numerics::integrate(rhs, y0, times, opts);
    double err = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto exact = reduced::cascade_solution(c, times[i]);
        for (unsigned k = 0; k <= n; ++k) err = std::max(err, std::abs(exact[k] - ys[i][k]));
    }
    return err;
}

} // namespace

bool Suite::pass() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

bool Report::pass() const noexcept {
    return std::all_of(suites.begin(), suites.end(), [](const Suite& s) { return s.pass(); });
}

std::string Report::to_json() const {
    nlohmann::ordered_json j;
    j["pass"] = pass();
    j["suites"] = nlohmann::ordered_json::array();
    for (const auto& s : suites) {
        nlohmann::ordered_json js;
        js["name"] = s.name;
        js["pass"] = s.pass();
        js["checks"] = nlohmann::ordered_json::array();
        for (const auto& c : s.checks) {
            js["checks"].push_back(
                {{"name", c.name}, {"error", c.error}, {"tolerance", c.tolerance}, {"pass", c.pass}});
        }
        j["suites"].push_back(std::move(js));
    }
    return j.dump(2) + "\n";
}

Suite oracle_equivalence() {
    Suite s{"oracle_equivalence", {}};
    for (auto kind : {CouplingKind::projector, CouplingKind::indirect, CouplingKind::direct, CouplingKind::hadamard}) {
        for (unsigned n = 2; n <= 4; ++n) {
            const models::StateIndex last = (models::StateIndex{1} << n) - 1;
            for (models::StateIndex w : {models::StateIndex{0}, last}) {
                nonlocal_case(s.checks, nullptr, kind, Method::rate, InitialState::uniform_diagonal, n, w, 1.5);
                for (auto init : {InitialState::coherent, InitialState::uniform_diagonal})
                    nonlocal_case(s.checks, nullptr, kind, Method::quantum, init, n, w, 1.5);
            }
        }
    }
    for (unsigned n = 2; n <= 6; ++n) {
        for (models::StateIndex w : {models::StateIndex{0}, models::StateIndex{1}}) {
            const auto lm = models::LadderModel::equidistant(n, kDeltaE, w);
            for (auto init : {InitialState::uniform_diagonal, InitialState::top_shell})
                ladder_case(s.checks, nullptr, lm, Method::rate, init, 1.0);
            for (auto init : {InitialState::coherent, InitialState::top_shell})
                ladder_case(s.checks, nullptr, lm, Method::quantum, init, 1.0);
        }
    }
    const models::LadderModel uneven(4, uneven_shells(4), 2);
    ladder_case(s.checks, nullptr, uneven, Method::rate, InitialState::top_shell, 0.7);
    ladder_case(s.checks, nullptr, uneven, Method::quantum, InitialState::coherent, 0.7);
    return s;
}

Suite oracle_equivalence_large() {
    Suite s{"oracle_equivalence_large", {}};
    for (unsigned n : {7u, 8u}) {
        const auto lm = models::LadderModel::equidistant(n, kDeltaE, 0);
        ladder_case(s.checks, nullptr, lm, Method::rate, InitialState::top_shell, 1.0);
        ladder_case(s.checks, nullptr, lm, Method::quantum, InitialState::coherent, 1.0);
    }
    return s;
}

Suite lamb_shift_cancellation() {
    Suite s{"lamb_shift_cancellation", {}};
    std::mt19937_64 rng(20240611);
    for (auto kind : {CouplingKind::projector, CouplingKind::indirect, CouplingKind::direct, CouplingKind::hadamard}) {
        for (unsigned n : {2u, 3u}) {
            const models::StateIndex w = n == 2 ? 0 : 5;
            const models::OracleModel om(n, kDeltaE, w);
            const auto model = bms::EnergyEigenbasisModel::oracle(om, kind);
            const double err =
                lamb_shift_effect(model, 1.0, two_state_variables(kind, Method::quantum), w, n, rng);
            s.checks.push_back(make_check(fmt::format("{} N={} w={}", models::to_string(kind), 1u << n, w), err, 1e-10));
            const double dz = zero_frequency_effect(model, 1.0, two_state_variables(kind, Method::quantum), w, n);
            s.checks.push_back(
                make_check(fmt::format("{} N={} w={} gamma(0) independence", models::to_string(kind), 1u << n, w), dz, 1e-10));
        }
    }
    for (unsigned n : {3u, 4u}) {
        for (bool even : {true, false}) {
            const models::LadderModel lm = even ? models::LadderModel::equidistant(n, kDeltaE, 1)
                                                : models::LadderModel(n, uneven_shells(n), 1);
            const auto model = bms::EnergyEigenbasisModel::ladder(lm, models::eta(CouplingKind::collective_bitflip, n));
            const double err = lamb_shift_effect(model, 1.0, bms::VariableSet::shell_coherent, lm.w, n, rng);
            s.checks.push_back(make_check(fmt::format("ladder n={}{}", n, even ? "" : " uneven"), err, 1e-10));
        }
    }
    return s;
}

Suite invariants() {
    Suite s{"invariants", {}};

    for (std::uint64_t N : {4ull, 64ull, 4096ull}) {
        for (double beta : {0.5, 2.0, 8.0}) {
            const reduced::TwoStateParams p{CouplingKind::projector, Method::rate, N, beta, kLambda, kG, kDeltaE, 0};
            const double z = reduced::two_state_stationary(reduced::build_two_state(p))[0];
            const double gibbs = 1.0 / (1.0 + static_cast<double>(N - 1) * std::exp(-beta * kDeltaE));
            s.checks.push_back(make_check(fmt::format("two-state Gibbs N={} beta={}", N, beta), std::abs(z - gibbs), 1e-8));
        }
    }
    for (unsigned n : {3u, 10u, 40u}) {
        for (bool even : {true, false}) {
            const models::LadderModel lm = even ? models::LadderModel::equidistant(n, kDeltaE)
                                                : models::LadderModel(n, uneven_shells(n));
            const double beta = 1.3;
            const bath::BathSpectrum bath(beta, flat_bath());
            const auto sys = reduced::build_ladder(Method::rate, lm, bath, kLambda);
            const auto z = reduced::ladder_stationary(sys, reduced::ladder_initial(sys, InitialState::top_shell));
            const auto gibbs = models::gibbs_shell_populations(lm, beta);
            double err = 0.0;
            for (std::size_t a = 0; a <= n; ++a) err = std::max(err, std::abs(z[a] - gibbs[a]));
            s.checks.push_back(make_check(fmt::format("ladder Gibbs n={}{}", n, even ? "" : " uneven"), err, 1e-8));
        }
    }

    // Long-time oracle rate equation against Gibbs populations.
    {
        const unsigned n = 3;
        const double beta = 1.1;
        const models::OracleModel om(n, kDeltaE, 5);
        const auto model = bms::EnergyEigenbasisModel::oracle(om, CouplingKind::hadamard);
        const bath::BathSpectrum bath(beta, flat_bath());
        const auto R = bms::build_rate_generator(model, bath, kLambda, kOracleStates);
        const Eigen::VectorXd p0 = bms::uniform_diagonal(8).diagonal().real();
        const double t[] = {0.0, 2e4};
        const auto traj = bms::evolve(R, p0, t);
        const auto energies = om.energies();
        double z = 0.0;
        for (double e : energies) z += std::exp(-beta * e);
        double err = 0.0;
        for (std::size_t a = 0; a < 8; ++a)
            err = std::max(err, std::abs(traj.values.back()[a] - std::exp(-beta * energies[a]) / z));
        s.checks.push_back(make_check("oracle rate Gibbs N=8", err, 1e-8));
    }

    // Trace and positivity of oracle density matrices.
    std::vector<Check> sink;
    for (auto kind : {CouplingKind::projector, CouplingKind::indirect, CouplingKind::direct, CouplingKind::hadamard})
        nonlocal_case(sink, &s.checks, kind, Method::quantum, InitialState::coherent, 4, 3, 1.5);
    ladder_case(sink, &s.checks, models::LadderModel::equidistant(4, kDeltaE, 0), Method::quantum,
                InitialState::coherent, 1.0);

    // Ladder spectrum against the closed-form eigenvalues.
    for (unsigned n = 1; n <= 12; ++n) {
        for (double beta : {0.3, 1.0, 4.0}) {
            const bath::BathSpectrum bath(beta, flat_bath());
            const auto sys = reduced::build_ladder(Method::rate, models::LadderModel::equidistant(n, kDeltaE), bath, kLambda);
            const auto num = reduced::ladder_numerical_eigenvalues(sys);
            auto exact = reduced::ladder_rate_eigenvalues(n, beta, kLambda, kG, kDeltaE);
            std::sort(exact.begin(), exact.end(), std::greater<>());
            double scale = 0.0;
            double err = 0.0;
            for (double e : exact) scale = std::max(scale, std::abs(e));
            for (std::size_t a = 0; a <= n; ++a) err = std::max(err, std::abs(num[a] - exact[a]));
            s.checks.push_back(make_check(fmt::format("ladder eigenvalues n={} beta={}", n, beta), err / scale, 1e-10));
        }
    }

    // Conserved functional along ladder trajectories.
    for (auto method : {Method::rate, Method::quantum}) {
        const unsigned n = 12;
        const bath::BathSpectrum bath(0.8, flat_bath());
        const auto sys = reduced::build_ladder(method, models::LadderModel::equidistant(n, kDeltaE), bath, kLambda);
        const auto z0 = reduced::ladder_initial(sys, method == Method::rate ? InitialState::top_shell
                                                                            : InitialState::coherent);
        const auto traj = reduced::solve_ladder(sys, z0, linspace(5.0 / slowest_rate(reduced::ladder_numerical_eigenvalues(sys)), kSamples));
        const double c0 = sys.conserved(z0);
        double err = 0.0;
        for (const auto& z : traj.values) err = std::max(err, std::abs(sys.conserved(z) - c0));
        s.checks.push_back(make_check(fmt::format("ladder conservation {} n={}", reduced::to_string(method), n), err, 1e-9));
    }
    return s;
}

Suite closed_forms() {
    Suite s{"closed_forms", {}};

    for (unsigned n = 1; n <= 10; ++n) {
        double err = 0.0;
        for (models::StateIndex w = 0; w < (models::StateIndex{1} << n); ++w)
            err = std::max(err, std::abs(reduced::hadamard_initial_z2(n, w) - hadamard_z2_brute_force(n, w)));
        s.checks.push_back(make_check(fmt::format("hadamard initial z2 n={} all w", n), err, 1e-12));
    }

    // Projector rate ground population from the exponential of the 2x2 generator
    // against the explicit relaxation formula.
    for (std::uint64_t N : {16ull, 256ull, 4096ull}) {
        for (double beta : {0.5, 3.0, 10.0}) {
            const reduced::TwoStateParams p{CouplingKind::projector, Method::rate, N, beta, 0.01, kG, kDeltaE, 0};
            const auto sys = reduced::build_two_state(p);
            const double x = std::exp(beta * kDeltaE);
            const double Nd = static_cast<double>(N);
            const double z_inf = x / (x + Nd - 1.0);
            const double rate = 0.01 * 0.01 * kG * (x + Nd - 1.0) / (Nd * Nd * (x - 1.0));
            double err = 0.0;
            for (double f : {0.1, 0.3, 1.0, 3.0}) {
                const double t = f / rate;
                const double explicit_z1 = z_inf + (1.0 / Nd - z_inf) * std::exp(-rate * t);
                err = std::max(err, std::abs(reduced::two_state_at(sys, t)[0] - explicit_z1));
            }
            s.checks.push_back(make_check(fmt::format("projector rate trajectory N={} beta={}", N, beta), err, 1e-8));
        }
    }

    // Cascade solution against adaptive integration of the decay chain.
    for (unsigned n : {1u, 5u, 12u, 20u}) {
        for (auto family : {Method::rate, Method::quantum}) {
            const double c = 0.01;
            const auto coeffs = family == Method::rate ? reduced::CascadeCoefficients::rate(n, c)
                                                       : reduced::CascadeCoefficients::quantum(n, c);
            const double span = 10.0 / (c * n);
            const std::vector<double> times{0.0, 0.01 * span, 0.1 * span, 0.5 * span, span};
            s.checks.push_back(make_check(fmt::format("cascade {} n={}", reduced::to_string(family), n),
                                          cascade_against_integration(coeffs, times), 1e-10));
        }
    }
    {
        reduced::CascadeCoefficients near;
        near.beta = {0.0, -1.0, -1.0 - 1e-10, -2.5, -2.5 + 3e-12, -4.0};
        near.gamma = {1.0, 1.5, 0.7, 2.0, 1.2, 0.0};
        const std::vector<double> times{0.0, 0.1, 0.5, 2.0, 8.0};
        s.checks.push_back(make_check("cascade near-degenerate", cascade_against_integration(near, times), 1e-10));
    }
    return s;
}

Report run_all(std::size_t jobs) {
    const std::vector<std::function<Suite()>> suites{oracle_equivalence, lamb_shift_cancellation, invariants,
                                                     closed_forms};
    std::function<Suite(std::size_t)> task = [&](std::size_t i) { return suites[i](); };
    return {harness::run_ordered(jobs, suites.size(), task)};
}

} // namespace relax::validate
