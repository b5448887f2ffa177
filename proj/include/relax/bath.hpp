// bath.hpp: thermal bosonic bath, transition rates gamma(omega) and Lamb-shift table

#pragma once

#include <complex>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace relax::bath {

// Zero temperature is represented exactly, never as a large finite beta.
inline constexpr double kZeroTemperature = std::numeric_limits<double>::infinity();

enum class Family { flat, ohmic };

struct SpectralDensity {
    Family family{Family::flat};
    double amplitude{1.0};                   // flat: g = amplitude; ohmic: g = amplitude * |omega|
    std::optional<double> gamma_zero_override;

    static SpectralDensity flat(double amplitude, std::optional<double> gamma_zero = std::nullopt);
    static SpectralDensity ohmic(double amplitude, std::optional<double> gamma_zero = std::nullopt);

    // g(|omega|); the argument is the absolute frequency.
    double operator()(double abs_omega) const noexcept;
};

// Imaginary odd transform sigma(omega) sampled at the frequencies that matter.
// Frequencies absent from the table contribute zero.
class LambShiftTable {
public:
    LambShiftTable() = default;

    // Each sigma must be purely imaginary.
    explicit LambShiftTable(const std::vector<std::pair<double, std::complex<double>>>& entries);

    void set(double omega, std::complex<double> sigma);
    std::complex<double> operator()(double omega) const noexcept;

    bool empty() const noexcept { return entries_.empty(); }
    const std::vector<std::pair<double, double>>& entries() const noexcept { return entries_; }

private:
    std::vector<std::pair<double, double>> entries_;  // (omega, Im sigma)
};

class BathSpectrum {
public:
    BathSpectrum(double beta, SpectralDensity density, LambShiftTable lamb_shift = {});

    double beta() const noexcept { return beta_; }
    bool zero_temperature() const noexcept { return beta_ == kZeroTemperature; }
    const SpectralDensity& density() const noexcept { return density_; }
    const LambShiftTable& lamb_shift() const noexcept { return lamb_shift_; }

    // g(|w|) / |1 - exp(-beta w)|. At w = 0 falls back to gamma_zero().
    double gamma(double omega) const;

    // Finite w -> 0 value: amplitude / beta for ohmic, the override for flat.
    double gamma_zero() const;

    std::complex<double> sigma(double omega) const noexcept { return lamb_shift_(omega); }

private:
    double beta_;
    SpectralDensity density_;
    LambShiftTable lamb_shift_;
};

} // namespace relax::bath
