#include <doctest.h>

#include <cmath>

#include "relax/propagate.hpp"
#include "relax/reduced.hpp"
#include "support.hpp"

using namespace relax;
using reduced::CascadeCoefficients;

namespace {

// Classical RK4 with a fixed step of at most 1e-3 of the fastest decay time, independent
// of the library integrators.
std::vector<double> rk4_chain(const CascadeCoefficients& c, double t) {
    const unsigned n = c.n();
    double fastest = 1.0;
    for (double b : c.beta) fastest = std::max(fastest, std::abs(b));
    const int steps = std::max(1000, static_cast<int>(std::ceil(t * fastest / 1e-3)));
    std::vector<double> y(n + 1, 0.0);
    y[n] = 1.0;
    auto f = [&](const std::vector<double>& x) {
        std::vector<double> d(n + 1);
        for (unsigned k = 0; k <= n; ++k) d[k] = c.beta[k] * x[k] + (k < n ? c.gamma[k] * x[k + 1] : 0.0);
        return d;
    };
    const double h = t / steps;
    for (int s = 0; s < steps; ++s) {
        const auto k1 = f(y);
        std::vector<double> tmp(n + 1);
        for (unsigned k = 0; k <= n; ++k) tmp[k] = y[k] + 0.5 * h * k1[k];
        const auto k2 = f(tmp);
        for (unsigned k = 0; k <= n; ++k) tmp[k] = y[k] + 0.5 * h * k2[k];
        const auto k3 = f(tmp);
        for (unsigned k = 0; k <= n; ++k) tmp[k] = y[k] + h * k3[k];
        const auto k4 = f(tmp);
        for (unsigned k = 0; k <= n; ++k) y[k] += h / 6.0 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]);
    }
    return y;
}

} // namespace

TEST_CASE("cascade boundary values") {
    const auto c = CascadeCoefficients::quantum(6, 0.01);
    for (double t : {0.0, 3.0, 40.0}) CHECK(reduced::cascade_solution(c, 6, t) == doctest::Approx(std::exp(c.beta[6] * t)));
    for (unsigned k = 0; k < 6; ++k) CHECK(reduced::cascade_solution(c, k, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("cascade coefficient families") {
    const auto r = CascadeCoefficients::rate(4, 0.5);
    const auto q = CascadeCoefficients::quantum(4, 0.5);
    for (unsigned a = 0; a <= 4; ++a) {
        CHECK(r.beta[a] == doctest::Approx(-0.5 * a));
        CHECK(q.beta[a] == doctest::Approx(-0.5 * a * (4 - a + 1)));
        if (a < 4) {
            CHECK(r.gamma[a] == doctest::Approx(0.5 * (a + 1)));
            CHECK(q.gamma[a] == doctest::Approx(0.5 * (a + 1) * (a + 1)));
        }
    }
}

TEST_CASE("rate cascade n=3 matches independent integration") {
    const auto c = CascadeCoefficients::rate(3, 0.2);
    for (double t : {0.5, 2.0, 7.0, 20.0}) {
        const auto y = rk4_chain(c, t);
        CHECK(std::abs(reduced::cascade_solution(c, 0, t) - y[0]) < 1e-10);
    }
}

TEST_CASE("quantum cascade has degenerate pairs and still matches integration") {
    // beta_alpha = -alpha (n - alpha + 1) c repeats for alpha and n + 1 - alpha.
    for (unsigned n : {5u, 10u, 20u}) {
        const auto c = CascadeCoefficients::quantum(n, 0.01);
        for (double t : {1.0, 10.0, 60.0}) {
            const auto exact = reduced::cascade_solution(c, t);
            const auto y = rk4_chain(c, t);
            for (unsigned k = 0; k <= n; ++k) CHECK(std::abs(exact[k] - y[k]) < 1e-10);
        }
    }
}

TEST_CASE("property: random near-degenerate chains") {
    test::Gen gen(808);
    for (int trial = 0; trial < 25; ++trial) {
        const unsigned n = static_cast<unsigned>(gen.integer(1, 8));
        CascadeCoefficients c;
        for (unsigned k = 0; k <= n; ++k) {
            c.beta.push_back(-gen.uniform(0.0, 2.0));
            c.gamma.push_back(gen.uniform(0.1, 2.0));
        }
        if (n >= 2) c.beta[1] = c.beta[2] * (1.0 + gen.uniform(-1e-11, 1e-11));
        const double t = gen.uniform(0.1, 5.0);
        const auto exact = reduced::cascade_solution(c, t);
        const auto y = rk4_chain(c, t);
        for (unsigned k = 0; k <= n; ++k) CHECK(std::abs(exact[k] - y[k]) < 1e-10);
    }
}

TEST_CASE("all-zero decay constants give the polynomial solution") {
    CascadeCoefficients c;
    c.beta = {0.0, 0.0, 0.0};
    c.gamma = {2.0, 3.0, 0.0};
    const double t = 1.5;
    CHECK(reduced::cascade_solution(c, 2, t) == doctest::Approx(1.0));
    CHECK(reduced::cascade_solution(c, 1, t) == doctest::Approx(3.0 * t));
    CHECK(reduced::cascade_solution(c, 0, t) == doctest::Approx(2.0 * 3.0 * t * t / 2.0));
}
