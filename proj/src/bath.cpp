#include "relax/bath.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "relax/error.hpp"

namespace relax::bath {

namespace {

bool same_frequency(double a, double b) noexcept {
    return std::abs(a - b) <= 1e-9 * std::max({std::abs(a), std::abs(b), 1.0});
}

void check_amplitude(double amplitude) {
    if (!(amplitude > 0.0) || !std::isfinite(amplitude))
        throw Error(Errc::invalid_argument, fmt::format("spectral amplitude must be positive, got {}", amplitude));
}

void check_override(const std::optional<double>& g0) {
    if (g0 && (!(*g0 >= 0.0) || !std::isfinite(*g0)))
        throw Error(Errc::invalid_argument, fmt::format("gamma_zero override must be non-negative, got {}", *g0));
}

} // namespace

SpectralDensity SpectralDensity::flat(double amplitude, std::optional<double> gamma_zero) {
    check_amplitude(amplitude);
    check_override(gamma_zero);
    return {Family::flat, amplitude, gamma_zero};
}

SpectralDensity SpectralDensity::ohmic(double amplitude, std::optional<double> gamma_zero) {
    check_amplitude(amplitude);
    check_override(gamma_zero);
    return {Family::ohmic, amplitude, gamma_zero};
}

double SpectralDensity::operator()(double abs_omega) const noexcept {
    return family == Family::flat ? amplitude : amplitude * abs_omega;
}

LambShiftTable::LambShiftTable(const std::vector<std::pair<double, std::complex<double>>>& entries) {
    for (const auto& [omega, s] : entries) set(omega, s);
}

void LambShiftTable::set(double omega, std::complex<double> sigma) {
    if (!std::isfinite(omega) || !std::isfinite(sigma.imag()))
        throw Error(Errc::non_finite_input, "Lamb-shift entry must be finite");
    if (sigma.real() != 0.0)
        throw Error(Errc::invalid_argument,
                    fmt::format("sigma({}) must be purely imaginary, real part {}", omega, sigma.real()));
    for (auto& entry : entries_) {
        if (same_frequency(entry.first, omega)) {
            entry.second = sigma.imag();
            return;
        }
    }
    entries_.emplace_back(omega, sigma.imag());
    std::sort(entries_.begin(), entries_.end());
}

std::complex<double> LambShiftTable::operator()(double omega) const noexcept {
    for (const auto& [w, s] : entries_)
        if (same_frequency(w, omega)) return {0.0, s};
    return {0.0, 0.0};
}

BathSpectrum::BathSpectrum(double beta, SpectralDensity density, LambShiftTable lamb_shift)
    : beta_(beta), density_(density), lamb_shift_(std::move(lamb_shift)) {
    if (std::isnan(beta) || !(beta > 0.0))
        throw Error(Errc::invalid_argument, fmt::format("beta must be positive, got {}", beta));
    check_amplitude(density_.amplitude);
    check_override(density_.gamma_zero_override);
}

double BathSpectrum::gamma(double omega) const {
    if (!std::isfinite(omega)) throw Error(Errc::non_finite_input, "gamma: frequency must be finite");
    if (omega == 0.0) {
        if (density_.family == Family::flat && !density_.gamma_zero_override)
            throw Error(Errc::undefined_at_zero, "flat spectral density has no finite gamma(0); set an override");
        return gamma_zero();
    }
    const double g = density_(std::abs(omega));
    if (zero_temperature()) return omega > 0.0 ? g : 0.0;
    // |1 - e^{-beta w}| written with expm1 so that small beta*w keeps its digits.
    if (omega > 0.0) return g / -std::expm1(-beta_ * omega);
    return g / std::expm1(-beta_ * omega);
}

double BathSpectrum::gamma_zero() const {
    if (density_.gamma_zero_override) return *density_.gamma_zero_override;
    if (density_.family == Family::flat)
        throw Error(Errc::divergent_gamma_zero, "flat spectral density diverges at omega = 0");
    return zero_temperature() ? 0.0 : density_.amplitude / beta_;
}

} // namespace relax::bath
