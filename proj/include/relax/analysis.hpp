// analysis.hpp: calibration, relaxation times, scaling fits and Dicke observables

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "relax/models.hpp"
#include "relax/reduced.hpp"
#include "relax/trajectory.hpp"

namespace relax::analysis {

struct CalibrationTarget {
    double gibbs_target{0.95};  // stationary ground population the temperature is tuned to
    double threshold{0.9};      // ground population that counts as relaxed

    void validate() const;
};

inline constexpr double kMaxBeta = 1e6;

// Inverse temperature at which p0(beta) = target, by bisection (relative 1e-12) on a
// monotone increasing p0. Throws unreachable_target past beta = kMaxBeta.
double calibrate_beta(const std::function<double(double)>& p0, double target);
double calibrate_beta(std::span<const double> energies, double target);
double calibrate_beta(const models::LadderModel& model, double target);

struct RelaxationResult {
    std::optional<double> time;  // empty: the threshold is never reached
    double initial_ground{0.0};
    double stationary_ground{0.0};

    bool reachable() const noexcept { return time.has_value(); }
};

// First time the ground population reaches `threshold`, refined to relative 1e-10.
RelaxationResult relaxation_time(const reduced::TwoStateSystem& system, double threshold);
RelaxationResult relaxation_time(const reduced::LadderSystem& system, std::span<const double> z0, double threshold,
                                 const reduced::LadderSolveOptions& options = {});
// From samples alone: linear interpolation between the bracketing samples. The stationary
// value decides reachability.
RelaxationResult relaxation_time(const Trajectory& trajectory, double threshold, double stationary_ground);

struct ScalingPoint {
    double size;
    double time;
};

struct ScalingResult {
    std::vector<ScalingPoint> samples;
    double exponent{0.0};
    double log_prefactor{0.0};
    std::size_t window_begin{0};  // fit uses samples[window_begin..]
    double residual{0.0};         // rms of log residuals in the window
};

// Power-law slope over the largest-size half of the samples.
ScalingResult scaling_exponent(std::span<const ScalingPoint> points);

// Energy of a shell vector for the Dicke ladder, E_alpha = omega0 (alpha - n/2). Quantum
// shell variables are divided by binom(n, alpha); negative quantum entries from integrator
// noise are clamped to zero and counted in `clamped`.
double energy_expectation(std::span<const double> z, reduced::Method method, unsigned n, double omega0,
                          std::size_t* clamped = nullptr);
// -dE/dt from the generator itself.
double intensity(std::span<const double> z, const reduced::LadderSystem& system, double omega0);
std::vector<double> intensity(const Trajectory& trajectory, const reduced::LadderSystem& system, double omega0);
// -dE/dt by central differences (one-sided at the ends).
std::vector<double> intensity_from_energy(std::span<const double> times, std::span<const double> energy);

struct PeakMetrics {
    double t_peak{0.0};
    double i_peak{0.0};
    double width{0.0};   // full width at half maximum
    double energy{0.0};  // integral of I over the grid
};

double approx_intensity(unsigned n, double lambda, double g, double omega0, double t);
PeakMetrics approx_peaks(unsigned n, double lambda, double g, double omega0);

inline constexpr std::size_t kMinPeakSamples = 50;

// Quadratic interpolation at the discrete maximum, half-maximum crossings by linear
// interpolation between bracketing samples, trapezoidal energy. A maximum at the first
// sample is a monotone decay (t_peak = 0).
PeakMetrics peak_metrics(std::span<const double> times, std::span<const double> values);

// Linear pre-peak samples, then geometric spacing from t_peak/50 (2000 points per
// [t_peak/50, 50 t_peak]) continued up to t_end.
std::vector<double> dicke_time_grid(double approx_t_peak, double t_end);

struct DickeParams {
    unsigned n{20};
    double omega0{1.0};
    double lambda{0.1};
    double g{1.0};
    double beta{bath::kZeroTemperature};
};

struct DickeResult {
    reduced::Method method;
    std::vector<double> times;
    std::vector<double> energy;
    std::vector<double> intensity;
    PeakMetrics peak;
    double energy_drop{0.0};  // E(0) - E(t_end)
    std::size_t clamped{0};
};

// Collective emission from the fully excited state, integrated on the shell ladder with
// eta = 1. The grid is shared by both methods and runs until the slowest incoherent mode
// has decayed by e^-40.
DickeResult dicke_run(const DickeParams& params, reduced::Method method);

} // namespace relax::analysis
