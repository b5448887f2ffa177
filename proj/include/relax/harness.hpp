// harness.hpp: sweeps and trajectory dumps behind the CLI subcommands
//
// Each command has a library entry point that returns structured rows (used by
// tests) and a renderer that produces the deterministic CSV text.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "relax/analysis.hpp"
#include "relax/config.hpp"
#include "relax/reduced.hpp"

namespace relax::harness {

// Runs task(0..count-1) on up to `jobs` threads; results come back in index order.
// The first exception (by index) is rethrown after all workers finish.
template <class T>
std::vector<T> run_ordered(std::size_t jobs, std::size_t count, const std::function<T(std::size_t)>& task);

struct SweepRow {
    std::uint64_t size{0};  // N or n
    double beta{0.0};
    reduced::Method method{reduced::Method::rate};
    reduced::InitialState init{reduced::InitialState::uniform_diagonal};
    analysis::RelaxationResult relaxation;
    double time_scale{0.0};  // lambda^2 g(dE): multiplies t into dimensionless units
};

struct SweepFit {
    reduced::Method method;
    std::optional<analysis::ScalingResult> fit;  // empty when a point is unreachable or too few points
    std::size_t unreachable{0};
};

struct SweepResult {
    std::vector<SweepRow> rows;  // grouped by method, sizes ascending
    std::vector<SweepFit> fits;
};

reduced::InitialState default_init(reduced::Method method);

SweepResult sweep_nonlocal(const config::SweepSettings& settings);
SweepResult sweep_ladder(const config::SweepSettings& settings);

struct DickeRow {
    unsigned n{0};
    analysis::DickeResult rate;
    analysis::DickeResult quantum;
    analysis::PeakMetrics approx;
};

std::vector<DickeRow> dicke(const config::DickeSettings& settings);

// Reduced variables along a single trajectory, from the reduced system or the full oracle.
Trajectory simulate(const config::SimulateSettings& settings, double* beta_used = nullptr);

std::string format_double(double x);
std::string csv_header(const config::Config& config);
std::string render_sweep(const config::Config& config, const SweepResult& result);
std::string render_dicke(const config::Config& config, const std::vector<DickeRow>& rows);
std::string render_trajectory(const config::Config& config, const Trajectory& trajectory, double time_scale,
                              double beta);

// Runs the command selected by `config` and returns its CSV text.
std::string run(const config::Config& config);

// ---------------------------------------------------------------------------

template <class T>
std::vector<T> run_ordered(std::size_t jobs, std::size_t count, const std::function<T(std::size_t)>& task) {
    std::vector<std::optional<T>> slots(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                slots[i].emplace(task(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min(std::max<std::size_t>(jobs, 1), std::max<std::size_t>(count, 1));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    std::vector<T> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
        out.push_back(std::move(*slots[i]));
    }
    return out;
}

} // namespace relax::harness
