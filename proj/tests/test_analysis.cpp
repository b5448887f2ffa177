#include <doctest.h>

#include <cmath>
#include <numbers>

#include "relax/analysis.hpp"
#include "relax/error.hpp"
#include "support.hpp"

using namespace relax;
using models::CouplingKind;
using reduced::InitialState;
using reduced::Method;

TEST_CASE("temperature calibration") {
    const models::OracleModel om(2, 1.0, 0);
    CHECK(analysis::calibrate_beta(om.energies(), 0.95) == doctest::Approx(std::log(57.0)).epsilon(1e-11));

    // Ladder n=2: 1/(1 + 2x + x^2) = 0.95 with x = e^{-beta}, so 1 + x = 1/sqrt(0.95).
    const double x = 1.0 / std::sqrt(0.95) - 1.0;
    CHECK(analysis::calibrate_beta(models::LadderModel::equidistant(2, 1.0), 0.95) ==
          doctest::Approx(-std::log(x)).epsilon(1e-11));

    CHECK_THROWS_AS(analysis::calibrate_beta(om.energies(), 1.0), Error);
    try {
        analysis::calibrate_beta(om.energies(), 1.0 - 1e-300);
        FAIL("expected unreachable target");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::unreachable_target);
    }
}

TEST_CASE("property: calibration inverts the Gibbs probability") {
    test::Gen gen(909);
    for (int trial = 0; trial < 100; ++trial) {
        const auto e = gen.spectrum(static_cast<std::size_t>(gen.integer(2, 40)));
        const double floor = 1.0 / static_cast<double>(e.size());
        const double target = gen.uniform(floor + 0.01, 0.999);
        const double beta = analysis::calibrate_beta(e, target);
        CHECK(std::abs(models::gibbs_ground_probability(e, beta) - target) < 1e-10);
    }
}

TEST_CASE("relaxation times of two-state systems") {
    const std::uint64_t N = 4;
    const double beta = std::log(57.0);
    const reduced::TwoStateParams p{CouplingKind::projector, Method::rate, N, beta, 0.01, 2.0, 1.0, 0};
    const auto sys = reduced::build_two_state(p);
    const auto r = analysis::relaxation_time(sys, 0.9);
    REQUIRE(r.reachable());
    // Invert z1(t) = z_inf + (1/N - z_inf) e^{-t/tau}.
    const double tau = reduced::tau_re(4, beta, 1.0, 0.01, 2.0);
    const double expected = tau * std::log((0.25 - 0.95) / (0.9 - 0.95));
    CHECK(*r.time == doctest::Approx(expected).epsilon(1e-9));

    CHECK(*analysis::relaxation_time(sys, 0.1).time == 0.0);

    const reduced::TwoStateParams h{CouplingKind::hadamard, Method::quantum, 64, std::log(19.0 * 63), 0.01, 2.0, 1.0, 5};
    const auto unreachable = analysis::relaxation_time(reduced::build_two_state(h, InitialState::coherent), 0.9);
    CHECK_FALSE(unreachable.reachable());
    CHECK(unreachable.stationary_ground < 0.9);
}

TEST_CASE("property: lower thresholds never take longer") {
    test::Gen gen(1001);
    for (int trial = 0; trial < 40; ++trial) {
        const unsigned n = static_cast<unsigned>(gen.integer(2, 30));
        const auto lm = models::LadderModel::equidistant(n, 1.0);
        const double beta = analysis::calibrate_beta(lm, 0.95);
        const bath::BathSpectrum b(beta, bath::SpectralDensity::flat(2.0));
        const auto method = trial % 2 ? Method::rate : Method::quantum;
        const auto sys = reduced::build_ladder(method, lm, b, 0.01);
        const auto z0 = reduced::ladder_initial(sys, method == Method::rate ? InitialState::uniform_diagonal
                                                                            : InitialState::coherent);
        const double hi = gen.uniform(0.5, 0.94);
        const double lo = hi * gen.uniform(0.5, 1.0);
        const auto rh = analysis::relaxation_time(sys, z0, hi);
        const auto rl = analysis::relaxation_time(sys, z0, lo);
        REQUIRE(rh.reachable());
        REQUIRE(rl.reachable());
        CHECK(*rl.time <= *rh.time * (1 + 1e-9));
    }
}

TEST_CASE("relaxation time from samples") {
    Trajectory tr;
    tr.labels = {"z1"};
    for (int i = 0; i <= 10; ++i) {
        tr.times.push_back(i);
        tr.values.push_back({1.0 - std::exp(-0.3 * i)});
    }
    const auto r = analysis::relaxation_time(tr, 0.5, 1.0);
    REQUIRE(r.reachable());
    CHECK(*r.time > 2.0);
    CHECK(*r.time < 3.0);
    CHECK_FALSE(analysis::relaxation_time(tr, 0.5, 0.4).reachable());
}

TEST_CASE("power-law fits") {
    std::vector<analysis::ScalingPoint> pts;
    for (double N = 16; N <= 4096; N *= 2) pts.push_back({N, 3.7 * N * N});
    const auto fit = analysis::scaling_exponent(pts);
    CHECK(std::abs(fit.exponent - 2.0) < 1e-10);
    CHECK(fit.log_prefactor == doctest::Approx(std::log(3.7)).epsilon(1e-9));
    CHECK(fit.window_begin == pts.size() / 2);
    CHECK(fit.residual < 1e-10);
    CHECK_THROWS_AS(analysis::scaling_exponent(std::vector<analysis::ScalingPoint>{{1, 1}}), Error);
}

TEST_CASE("Dicke energies") {
    const unsigned n = 10;
    std::vector<double> top(n + 1, 0.0), ground(n + 1, 0.0), uniform(n + 1);
    top[n] = 1.0;
    ground[0] = 1.0;
    for (unsigned a = 0; a <= n; ++a) uniform[a] = test::binomial(n, a) * test::binomial(n, a) / std::ldexp(1.0, n);
    for (auto m : {Method::rate, Method::quantum}) {
        CHECK(analysis::energy_expectation(top, m, n, 2.0) == doctest::Approx(10.0));
        CHECK(analysis::energy_expectation(ground, m, n, 2.0) == doctest::Approx(-10.0));
    }
    CHECK(std::abs(analysis::energy_expectation(uniform, Method::quantum, n, 1.0)) < 1e-12);
}

TEST_CASE("approximate superradiant pulse") {
    const auto p = analysis::approx_peaks(20, 0.1, 1.0, 1.0);
    CHECK(p.t_peak == doctest::Approx(std::log(2.0) / 0.2).epsilon(1e-12));
    CHECK(p.t_peak == doctest::Approx(3.46574).epsilon(1e-5));
    CHECK(p.i_peak == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(analysis::approx_intensity(20, 0.1, 1.0, 1.0, 0.0) == 0.0);
    CHECK(analysis::approx_intensity(20, 0.1, 1.0, 1.0, p.t_peak) == doctest::Approx(p.i_peak).epsilon(1e-12));
    const auto q = analysis::approx_peaks(40, 0.1, 1.0, 1.0);
    CHECK(q.t_peak == doctest::Approx(p.t_peak / 2).epsilon(1e-12));
    CHECK(q.i_peak == doctest::Approx(p.i_peak * 4).epsilon(1e-12));

    // The width is the full width at half maximum of the approximate pulse itself.
    const double half = 0.5 * p.i_peak;
    auto crossing = [&](double lo, double hi) {
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            const bool above = analysis::approx_intensity(20, 0.1, 1.0, 1.0, mid) > half;
            (above == (lo < p.t_peak) ? hi : lo) = mid;
        }
        return 0.5 * (lo + hi);
    };
    const double left = crossing(0.0, p.t_peak);
    const double right = crossing(p.t_peak, 20 * p.t_peak);
    CHECK(p.width == doctest::Approx(right - left).epsilon(1e-10));
    const double r = std::numbers::sqrt2;
    CHECK(p.width * 0.2 == doctest::Approx(2.0 * std::log(std::sqrt((r + 1) / (r - 1)))).epsilon(1e-10));
}

TEST_CASE("peak metrics of a synthetic Gaussian") {
    std::vector<double> t, I;
    const double center = 3.3, height = 2.5, sigma = 0.4;
    for (int i = 0; i <= 4000; ++i) {
        t.push_back(i * 0.0025);
        I.push_back(height * std::exp(-0.5 * std::pow((t.back() - center) / sigma, 2)));
    }
    const auto m = analysis::peak_metrics(t, I);
    const double fwhm = 2.0 * std::sqrt(2.0 * std::log(2.0)) * sigma;
    CHECK(test::rel_diff(m.t_peak, center) < 1e-4);
    CHECK(test::rel_diff(m.i_peak, height) < 1e-4);
    CHECK(test::rel_diff(m.width, fwhm) < 1e-4);
    CHECK(test::rel_diff(m.energy, height * sigma * std::sqrt(2 * std::numbers::pi)) < 1e-4);

    std::vector<double> coarse_t{0, 1, 2, 3, 4}, coarse_i{0, 1, 3, 1, 0};
    try {
        analysis::peak_metrics(coarse_t, coarse_i);
        FAIL("expected grid_too_coarse");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::grid_too_coarse);
    }
}

TEST_CASE("Dicke emission") {
    analysis::DickeParams p;
    p.n = 80;
    const auto q = analysis::dicke_run(p, Method::quantum);
    const auto r = analysis::dicke_run(p, Method::rate);
    CHECK(test::rel_diff(q.peak.energy, 80.0) < 1e-4);
    CHECK(test::rel_diff(r.peak.energy, q.peak.energy) < 1e-3);
    // Trapezoidal energy against the drop of the expectation value.
    CHECK(test::rel_diff(q.peak.energy, q.energy_drop) < 1e-5);
    CHECK(test::rel_diff(r.peak.energy, r.energy_drop) < 1e-5);
    CHECK(r.peak.t_peak == 0.0);
    CHECK(q.peak.t_peak > 0.0);
    // Stationary tail: the intensity has died away at the end of the grid.
    CHECK(std::abs(q.intensity.back()) < 1e-12 * q.peak.i_peak);
}

TEST_CASE("Dicke time grid") {
    const auto g = analysis::dicke_time_grid(2.0, 500.0);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == doctest::Approx(500.0));
    CHECK(std::is_sorted(g.begin(), g.end()));
    CHECK(std::adjacent_find(g.begin(), g.end()) == g.end());
}
