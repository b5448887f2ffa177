#include <doctest.h>

#include <cmath>

#include "relax/bath.hpp"
#include "relax/error.hpp"
#include "support.hpp"

using namespace relax;
using bath::BathSpectrum;
using bath::SpectralDensity;

TEST_CASE("emission and absorption rates of a flat bath") {
    const BathSpectrum b(1.0, SpectralDensity::flat(2.0));
    CHECK(b.gamma(1.0) == doctest::Approx(2.0 / (1.0 - std::exp(-1.0))).epsilon(1e-14));
    CHECK(b.gamma(1.0) == doctest::Approx(3.16395).epsilon(1e-5));
    CHECK(b.gamma(-1.0) == doctest::Approx(2.0 / (std::exp(1.0) - 1.0)).epsilon(1e-14));
    CHECK(b.gamma(-1.0) == doctest::Approx(1.16395).epsilon(1e-5));
}

TEST_CASE("zero temperature forbids absorption") {
    const BathSpectrum b(bath::kZeroTemperature, SpectralDensity::flat(2.0));
    CHECK(b.zero_temperature());
    CHECK(b.gamma(-1.0) == 0.0);
    CHECK(b.gamma(1.0) == doctest::Approx(2.0));
}

TEST_CASE("zero-frequency rate") {
    CHECK(BathSpectrum(2.0, SpectralDensity::ohmic(1.0)).gamma_zero() == doctest::Approx(0.5));
    CHECK(BathSpectrum(2.0, SpectralDensity::ohmic(1.0)).gamma(0.0) == doctest::Approx(0.5));
    CHECK(BathSpectrum(1.0, SpectralDensity::flat(2.0, 1.0)).gamma_zero() == 1.0);
    CHECK(BathSpectrum(1.0, SpectralDensity::flat(2.0, 1.0)).gamma(0.0) == 1.0);

    const BathSpectrum no_override(1.0, SpectralDensity::flat(2.0));
    CHECK_THROWS_AS(no_override.gamma_zero(), Error);
    CHECK_THROWS_AS(no_override.gamma(0.0), Error);
}

TEST_CASE("ohmic rate approaches its zero-frequency limit") {
    const BathSpectrum b(2.0, SpectralDensity::ohmic(1.0));
    CHECK(b.gamma(1e-9) == doctest::Approx(b.gamma_zero()).epsilon(1e-8));
    CHECK(b.gamma(-1e-9) == doctest::Approx(b.gamma_zero()).epsilon(1e-8));
}

TEST_CASE("property: detailed balance, non-negativity, monotone in temperature") {
    test::Gen gen(101);
    for (int trial = 0; trial < 500; ++trial) {
        const double beta = gen.log_uniform(1e-3, 50.0);
        const double omega = gen.log_uniform(1e-4, 20.0);
        const double amp = gen.uniform(0.1, 5.0);
        const auto density = trial % 2 ? SpectralDensity::flat(amp) : SpectralDensity::ohmic(amp);
        const BathSpectrum b(beta, density);
        const double down = b.gamma(omega);
        const double up = b.gamma(-omega);
        CHECK(down >= 0.0);
        CHECK(up >= 0.0);
        CHECK(test::rel_diff(up, std::exp(-beta * omega) * down) < 1e-12);

        const BathSpectrum colder(beta * gen.uniform(1.0, 3.0), density);
        CHECK(colder.gamma(omega) <= down * (1.0 + 1e-14));
    }
}

TEST_CASE("non-finite inputs are rejected") {
    const BathSpectrum b(1.0, SpectralDensity::flat(2.0));
    CHECK_THROWS_AS(b.gamma(std::nan("")), Error);
    CHECK_THROWS_AS(BathSpectrum(-1.0, SpectralDensity::flat(2.0)), Error);
}

TEST_CASE("Lamb-shift table stores odd imaginary samples") {
    bath::LambShiftTable t;
    CHECK(t.empty());
    t.set(1.0, {0.0, 0.3});
    t.set(-1.0, {0.0, -0.3});
    CHECK(t(1.0) == std::complex<double>(0.0, 0.3));
    CHECK(t(-1.0) == std::complex<double>(0.0, -0.3));
    CHECK(t(2.0) == std::complex<double>(0.0, 0.0));
    CHECK_THROWS_AS(t.set(1.0, {0.1, 0.3}), Error);
}
