#include "relax/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "relax/error.hpp"

namespace relax::analysis {

namespace {

constexpr double kRefine = 1e-10;

// Bisection for the first crossing of a monotone quantity inside [lo, hi].
template <class F>
double bisect_crossing(F&& above, double lo, double hi) {
    while (hi - lo > kRefine * hi) {
        const double mid = 0.5 * (lo + hi);
        (above(mid) ? hi : lo) = mid;
    }
    return hi;
}

} // namespace

void CalibrationTarget::validate() const {
    if (!(threshold > 0.0 && threshold < gibbs_target && gibbs_target <= 1.0))
        throw ConfigError(fmt::format("calibration needs 0 < threshold < target <= 1 (threshold {}, target {})",
                                      threshold, gibbs_target));
}

double calibrate_beta(const std::function<double(double)>& p0, double target) {
    if (!(target > 0.0 && target < 1.0))
        throw Error(Errc::unreachable_target, fmt::format("target {} outside (0, 1)", target));
    double lo = 0.0, hi = 1.0;
    while (p0(hi) < target) {
        lo = hi;
        hi *= 2.0;
        if (hi > kMaxBeta)
            throw Error(Errc::unreachable_target,
                        fmt::format("ground population {} not reached below beta = {}", target, kMaxBeta));
    }
    if (lo == 0.0) {
        // p0 at infinite temperature is the ground share; below it the target is unreachable.
        double probe = hi;
        while (probe > 1e-300 && p0(probe) >= target) {
            hi = probe;
            probe *= 0.5;
        }
        if (!(probe > 1e-300)) throw Error(Errc::unreachable_target, fmt::format("target {} too low", target));
        lo = probe;
    }
    while (hi - lo > 1e-12 * hi) {
        const double mid = 0.5 * (lo + hi);
        (p0(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double calibrate_beta(std::span<const double> energies, double target) {
    if (energies.size() < 2) throw Error(Errc::invalid_argument, "calibration needs at least two levels");
    const double e0 = energies.front();
    if (std::count_if(energies.begin(), energies.end(), [&](double e) { return e <= e0; }) != 1)
        throw Error(Errc::invalid_argument, "calibration needs a unique ground state at index 0");
    const std::vector<double> copy(energies.begin(), energies.end());
    return calibrate_beta([&copy](double b) { return models::gibbs_ground_probability(copy, b); }, target);
}

double calibrate_beta(const models::LadderModel& model, double target) {
    if (!(model.shell_energies.size() > 1 && model.shell_energies[1] > model.shell_energies[0]))
        throw Error(Errc::invalid_argument, "calibration needs a unique ground state");
    return calibrate_beta([&model](double b) { return models::gibbs_ground_probability(model, b); }, target);
}

RelaxationResult relaxation_time(const reduced::TwoStateSystem& system, double threshold) {
    RelaxationResult r;
    r.initial_ground = system.z0[0];
    r.stationary_ground = reduced::two_state_stationary(system)[0];
    if (r.initial_ground >= threshold) {
        r.time = 0.0;
        return r;
    }
    if (r.stationary_ground < threshold) return r;
    auto above = [&](double t) { return reduced::two_state_at(system, t)[0] >= threshold; };
    const double rate = std::abs(system.M.trace());
    double lo = 0.0, hi = 1.0 / rate;
    while (!above(hi)) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) throw Error(Errc::integration_failure, "crossing not bracketed");
    }
    r.time = bisect_crossing(above, lo, hi);
    return r;
}

RelaxationResult relaxation_time(const reduced::LadderSystem& system, std::span<const double> z0, double threshold,
                                 const reduced::LadderSolveOptions& options) {
    RelaxationResult r;
    r.initial_ground = z0[0];
    r.stationary_ground = reduced::ladder_stationary(system, z0)[0];
    if (r.initial_ground >= threshold) {
        r.time = 0.0;
        return r;
    }
    if (r.stationary_ground < threshold) return r;

    double fastest = 0.0;
    for (double d : system.diag) fastest = std::max(fastest, std::abs(d));
    const reduced::LadderPropagator prop(system, options);
    if (prop.route() == numerics::PropagationRoute::eigendecomposition) {
        auto above = [&](double t) { return prop.at(z0, t)[0] >= threshold; };
        double lo = 0.0, hi = 1.0 / fastest;
        while (!above(hi)) {
            lo = hi;
            hi *= 2.0;
            if (!std::isfinite(hi)) throw Error(Errc::integration_failure, "crossing not bracketed");
        }
        r.time = bisect_crossing(above, lo, hi);
        return r;
    }
    auto rhs = [&system](const numerics::State& x, numerics::State& dx) { system.apply(x.data(), dx.data()); };
    numerics::DenseIntegrator integrator(rhs, numerics::State(z0.begin(), z0.end()), 1e-3 / fastest,
                                         options.integrator);
    while (integrator.state()[0] < threshold) integrator.step();
    r.time = bisect_crossing([&](double t) { return integrator.state_at(t)[0] >= threshold; },
                             integrator.previous_time(), integrator.time());
    return r;
}

RelaxationResult relaxation_time(const Trajectory& trajectory, double threshold, double stationary_ground) {
    RelaxationResult r;
    if (trajectory.size() == 0) throw Error(Errc::insufficient_points, "empty trajectory");
    const auto p = trajectory.ground();
    r.initial_ground = p.front();
    r.stationary_ground = stationary_ground;
    if (p.front() >= threshold) {
        r.time = 0.0;
        return r;
    }
    if (stationary_ground < threshold) return r;
    for (std::size_t i = 1; i < p.size(); ++i) {
        if (p[i] >= threshold) {
            const double t0 = trajectory.times[i - 1], t1 = trajectory.times[i];
            r.time = t0 + (t1 - t0) * (threshold - p[i - 1]) / (p[i] - p[i - 1]);
            return r;
        }
    }
    throw Error(Errc::insufficient_points, "trajectory ends before the threshold is crossed");
}

ScalingResult scaling_exponent(std::span<const ScalingPoint> points) {
    if (points.size() < 4)
        throw Error(Errc::insufficient_points, fmt::format("{} points, at least 4 needed", points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(points[i].size > 0.0) || !(points[i].time > 0.0) || !std::isfinite(points[i].time))
            throw Error(Errc::invalid_argument, "scaling points need positive finite sizes and times");
        if (i > 0 && !(points[i].size > points[i - 1].size))
            throw Error(Errc::invalid_argument, "sizes must be strictly increasing");
    }
    ScalingResult res;
    res.samples.assign(points.begin(), points.end());
    res.window_begin = points.size() / 2;
    const std::size_t m = points.size() - res.window_begin;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = res.window_begin; i < points.size(); ++i) {
        const double x = std::log(points[i].size), y = std::log(points[i].time);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double md = static_cast<double>(m);
    res.exponent = (md * sxy - sx * sy) / (md * sxx - sx * sx);
    res.log_prefactor = (sy - res.exponent * sx) / md;
    double ss = 0;
    for (std::size_t i = res.window_begin; i < points.size(); ++i) {
        const double e = std::log(points[i].time) - res.log_prefactor - res.exponent * std::log(points[i].size);
        ss += e * e;
    }
    res.residual = std::sqrt(ss / md);
    return res;
}

double energy_expectation(std::span<const double> z, reduced::Method method, unsigned n, double omega0,
                          std::size_t* clamped) {
    if (z.size() != n + 1) throw Error(Errc::length_mismatch, "shell vector must have n+1 entries");
    double e = 0.0;
    for (unsigned a = 0; a <= n; ++a) {
        double p = z[a];
        if (method == reduced::Method::quantum) {
            if (p <= 0.0) {
                if (p < 0.0 && clamped) ++*clamped;
                continue;
            }
            p = std::exp(std::log(p) - models::log_shell_degeneracy(n, a));
        }
        e += (static_cast<double>(a) - 0.5 * n) * p;
    }
    return omega0 * e;
}

double intensity(std::span<const double> z, const reduced::LadderSystem& system, double omega0) {
    std::vector<double> dz(system.size());
    system.apply(z.data(), dz.data());
    const unsigned n = system.n;
    double de = 0.0;
    for (unsigned a = 0; a <= n; ++a) {
        const double w = (static_cast<double>(a) - 0.5 * n) * std::exp(system.log_weights[a]);
        de += w * dz[a];
    }
    return -omega0 * de;
}

std::vector<double> intensity(const Trajectory& trajectory, const reduced::LadderSystem& system, double omega0) {
    std::vector<double> out;
    for (const auto& z : trajectory.values) out.push_back(intensity(z, system, omega0));
    return out;
}

std::vector<double> intensity_from_energy(std::span<const double> times, std::span<const double> energy) {
    const std::size_t m = times.size();
    if (energy.size() != m) throw Error(Errc::length_mismatch, "times and energies differ in length");
    if (m < 2) throw Error(Errc::insufficient_points, "need at least two samples");
    std::vector<double> out(m);
    out[0] = -(energy[1] - energy[0]) / (times[1] - times[0]);
    out[m - 1] = -(energy[m - 1] - energy[m - 2]) / (times[m - 1] - times[m - 2]);
    for (std::size_t i = 1; i + 1 < m; ++i) {
        // Second-order difference on a nonuniform grid.
        const double h0 = times[i] - times[i - 1], h1 = times[i + 1] - times[i];
        const double d = (h0 * h0 * energy[i + 1] - h1 * h1 * energy[i - 1] + (h1 * h1 - h0 * h0) * energy[i]) /
                         (h0 * h1 * (h0 + h1));
        out[i] = -d;
    }
    return out;
}

double approx_intensity(unsigned n, double lambda, double g, double omega0, double t) {
    const double rate = lambda * lambda * g * n;
    return std::exp(-2.0 * rate * t) * rate * n * omega0 * std::expm1(rate * t);
}

PeakMetrics approx_peaks(unsigned n, double lambda, double g, double omega0) {
    if (n == 0) throw Error(Errc::out_of_range, "n must be positive");
    const double rate = lambda * lambda * g * n;
    PeakMetrics p;
    p.t_peak = std::numbers::ln2 / rate;
    p.i_peak = 0.25 * omega0 * lambda * lambda * g * n * n;
    p.width = 2.0 * std::log(std::sqrt((std::numbers::sqrt2 + 1.0) / (std::numbers::sqrt2 - 1.0))) / rate;
    p.energy = 0.5 * n * omega0;  // integral of the approximate intensity
    return p;
}

PeakMetrics peak_metrics(std::span<const double> t, std::span<const double> I) {
    const std::size_t m = t.size();
    if (I.size() != m) throw Error(Errc::length_mismatch, "times and intensities differ in length");
    if (m < 3) throw Error(Errc::insufficient_points, "need at least three samples");
    const auto k = static_cast<std::size_t>(std::max_element(I.begin(), I.end()) - I.begin());
    if (k == m - 1) throw Error(Errc::no_peak, "intensity still rising at the end of the grid");
    if (!(I[k] > 0.0)) throw Error(Errc::no_peak, "intensity never positive");

    PeakMetrics p;
    if (k == 0) {
        p.t_peak = t[0];
        p.i_peak = I[0];
    } else {
        // Parabola through the three samples around the maximum.
        const double x0 = t[k - 1], x1 = t[k], x2 = t[k + 1];
        const double d01 = (I[k] - I[k - 1]) / (x1 - x0), d12 = (I[k + 1] - I[k]) / (x2 - x1);
        const double a = (d12 - d01) / (x2 - x0);
        const double b = d01 - a * (x0 + x1);
        if (a < 0.0) {
            p.t_peak = std::clamp(-b / (2.0 * a), x0, x2);
            p.i_peak = I[k - 1] + (p.t_peak - x0) * (d01 + a * (p.t_peak - x1));
        } else {
            p.t_peak = x1;
            p.i_peak = I[k];
        }
        p.i_peak = std::max(p.i_peak, I[k]);
    }

    const double half = 0.5 * p.i_peak;
    auto crossing = [&](std::size_t i, std::size_t j) {  // I[i] and I[j] on opposite sides of half
        return t[i] + (t[j] - t[i]) * (half - I[i]) / (I[j] - I[i]);
    };
    double left = t[0];
    std::size_t lo = k;
    while (lo > 0 && I[lo - 1] >= half) --lo;
    if (lo > 0) left = crossing(lo - 1, lo);
    std::size_t hi = k;
    while (hi + 1 < m && I[hi + 1] >= half) ++hi;
    if (hi + 1 == m) throw Error(Errc::no_peak, "intensity does not fall to half maximum within the grid");
    const double right = crossing(hi, hi + 1);
    if (hi - lo + 1 < kMinPeakSamples)
        throw Error(Errc::grid_too_coarse,
                    fmt::format("{} samples above half maximum, at least {} needed", hi - lo + 1, kMinPeakSamples));
    p.width = right - left;

    double energy = 0.0;
    for (std::size_t i = 1; i < m; ++i) energy += 0.5 * (I[i] + I[i - 1]) * (t[i] - t[i - 1]);
    p.energy = energy;
    return p;
}

std::vector<double> dicke_time_grid(double approx_t_peak, double t_end) {
    if (!(approx_t_peak > 0.0) || !(t_end > approx_t_peak))
        throw Error(Errc::invalid_argument, "Dicke grid needs 0 < t_peak < t_end");
    std::vector<double> grid;
    const double start = approx_t_peak / 50.0;
    for (int i = 0; i < 50; ++i) grid.push_back(start * i / 50.0);
    const double ratio = std::pow(2500.0, 1.0 / 1999.0);
    for (double x = start; x < t_end * ratio; x *= ratio) grid.push_back(std::min(x, t_end));
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

DickeResult dicke_run(const DickeParams& params, reduced::Method method) {
    if (params.n < 1) throw Error(Errc::out_of_range, "Dicke model needs n >= 1");
    const models::DickeModel model(params.n, params.omega0);
    const bath::BathSpectrum bath(params.beta, bath::SpectralDensity::flat(params.g));
    const auto system = reduced::build_ladder(method, model.as_ladder(), bath, params.lambda,
                                              models::DickeModel::coupling_eta);
    // Both methods share one grid, long enough for the slower incoherent decay.
    const auto incoherent = reduced::build_ladder(reduced::Method::rate, model.as_ladder(), bath, params.lambda,
                                                  models::DickeModel::coupling_eta);
    double slowest = std::numeric_limits<double>::infinity();
    for (std::size_t a = 1; a < incoherent.size(); ++a)
        if (incoherent.diag[a] != 0.0) slowest = std::min(slowest, std::abs(incoherent.diag[a]));
    const PeakMetrics approx = approx_peaks(params.n, params.lambda, params.g, params.omega0);

    DickeResult res;
    res.method = method;
    res.times = dicke_time_grid(approx.t_peak, 40.0 / slowest);
    const auto z0 = reduced::ladder_initial(system, reduced::InitialState::top_shell);
    const Trajectory traj = reduced::solve_ladder(system, z0, res.times);
    for (const auto& z : traj.values)
        res.energy.push_back(energy_expectation(z, method, params.n, params.omega0, &res.clamped));
    res.intensity = intensity(traj, system, params.omega0);
    res.peak = peak_metrics(res.times, res.intensity);
    res.energy_drop = res.energy.front() - res.energy.back();
    return res;
}

} // namespace relax::analysis
