#include "relax/harness.hpp"

#include <bit>
#include <cmath>

#include <fmt/format.h>

#include "relax/bms.hpp"
#include "relax/error.hpp"

namespace relax::harness {

namespace {

using config::SweepSettings;

double gap_density(const config::BathSettings& b, double delta_e) {
    return b.spectrum(1.0).density()(delta_e);
}

// Oracle Gibbs ground population 1 / (1 + (N-1) e^{-beta dE}) without building the spectrum.
double oracle_ground(std::uint64_t states, double delta_e, double beta) {
    if (std::isinf(beta)) return 1.0;
    return 1.0 / (1.0 + std::exp(std::log(static_cast<double>(states - 1)) - beta * delta_e));
}

std::vector<SweepFit> fit_rows(const std::vector<SweepRow>& rows, const std::vector<reduced::Method>& methods) {
    std::vector<SweepFit> fits;
    for (auto m : methods) {
        SweepFit f{m, std::nullopt, 0};
        std::vector<analysis::ScalingPoint> pts;
        bool usable = true;
        for (const auto& r : rows) {
            if (r.method != m) continue;
            if (!r.relaxation.reachable()) {
                ++f.unreachable;
                usable = false;
                continue;
            }
            if (!(*r.relaxation.time > 0.0)) usable = false;
            pts.push_back({static_cast<double>(r.size), *r.relaxation.time});
        }
        if (usable && pts.size() >= 4) f.fit = analysis::scaling_exponent(pts);
        fits.push_back(f);
    }
    return fits;
}

template <class Task>
SweepResult run_sweep(const SweepSettings& s, Task&& task) {
    const auto ms = config::methods(s.method);
    const std::size_t count = ms.size() * s.sizes.size();
    std::function<SweepRow(std::size_t)> fn = [&](std::size_t i) {
        return task(ms[i / s.sizes.size()], s.sizes[i % s.sizes.size()]);
    };
    SweepResult res;
    res.rows = run_ordered(s.jobs, count, fn);
    res.fits = fit_rows(res.rows, ms);
    return res;
}

std::string join_header(const std::vector<std::string>& cols) {
    std::string out;
    for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
    return out + "\n";
}

} // namespace

reduced::InitialState default_init(reduced::Method method) {
    return method == reduced::Method::rate ? reduced::InitialState::uniform_diagonal
                                           : reduced::InitialState::coherent;
}

SweepResult sweep_nonlocal(const SweepSettings& s) {
    const double g = gap_density(s.bath, s.delta_e);
    return run_sweep(s, [&](reduced::Method method, std::uint64_t N) {
        const auto n = static_cast<unsigned>(std::countr_zero(N));
        SweepRow row;
        row.size = N;
        row.method = method;
        row.init = s.init.value_or(default_init(method));
        row.beta = s.bath.beta ? *s.bath.beta
                               : analysis::calibrate_beta(
                                     [&](double b) { return oracle_ground(N, s.delta_e, b); },
                                     s.calibration.gibbs_target);
        const reduced::TwoStateParams p{s.kind, method, N, row.beta, s.lambda, g, s.delta_e, s.solution.resolve(n)};
        const auto system = reduced::build_two_state(p, row.init);
        row.relaxation = analysis::relaxation_time(system, s.calibration.threshold);
        row.time_scale = s.lambda * s.lambda * g;
        return row;
    });
}

SweepResult sweep_ladder(const SweepSettings& s) {
    const double g = gap_density(s.bath, s.delta_e);
    return run_sweep(s, [&](reduced::Method method, std::uint64_t size) {
        const auto n = static_cast<unsigned>(size);
        const auto model = models::LadderModel::equidistant(n, s.delta_e);
        SweepRow row;
        row.size = n;
        row.method = method;
        row.init = s.init.value_or(default_init(method));
        row.beta = s.bath.beta ? *s.bath.beta : analysis::calibrate_beta(model, s.calibration.gibbs_target);
        const auto system = reduced::build_ladder(method, model, s.bath.spectrum(row.beta), s.lambda);
        const auto z0 = reduced::ladder_initial(system, row.init);
        row.relaxation = analysis::relaxation_time(system, z0, s.calibration.threshold);
        row.time_scale = s.lambda * s.lambda * g;
        return row;
    });
}

std::vector<DickeRow> dicke(const config::DickeSettings& s) {
    std::function<DickeRow(std::size_t)> fn = [&](std::size_t i) {
        const analysis::DickeParams p{s.sizes[i], s.omega0, s.lambda, s.g, s.beta};
        DickeRow row;
        row.n = p.n;
        row.rate = analysis::dicke_run(p, reduced::Method::rate);
        row.quantum = analysis::dicke_run(p, reduced::Method::quantum);
        row.approx = analysis::approx_peaks(p.n, p.lambda, p.g, p.omega0);
        return row;
    };
    return run_ordered(s.jobs, s.sizes.size(), fn);
}

Trajectory simulate(const config::SimulateSettings& s, double* beta_used) {
    using Engine = config::SimulateSettings::Engine;
    const bool ladder = s.model == config::SimulateSettings::Model::ladder;
    const std::uint64_t N = std::uint64_t{1} << s.n;

    std::optional<models::LadderModel> ladder_model;
    if (ladder)
        ladder_model = s.shell_energies.empty() ? models::LadderModel::equidistant(s.n, s.delta_e, s.w)
                                                : models::LadderModel(s.n, s.shell_energies, s.w);
    const models::OracleModel oracle_model(s.n, s.delta_e, s.w);

    double beta = 0.0;
    if (s.bath.beta) {
        beta = *s.bath.beta;
    } else if (ladder) {
        beta = analysis::calibrate_beta(*ladder_model, s.gibbs_target);
    } else {
        beta = analysis::calibrate_beta([&](double b) { return oracle_ground(N, s.delta_e, b); }, s.gibbs_target);
    }
    if (beta_used) *beta_used = beta;
    const auto spectrum = s.bath.spectrum(beta);

    // Reduced system, also used to pick the time span.
    std::optional<reduced::TwoStateSystem> two;
    std::optional<reduced::LadderSystem> shells;
    double slowest = 0.0;
    if (ladder) {
        shells = reduced::build_ladder(s.method, *ladder_model, spectrum, s.lambda);
        double m = std::numeric_limits<double>::infinity();
        for (double ev : reduced::ladder_numerical_eigenvalues(*shells))
            if (std::abs(ev) > 1e-12 * std::abs(shells->diag.back()) && std::abs(ev) < m) m = std::abs(ev);
        slowest = m;
    } else {
        const reduced::TwoStateParams p{s.kind, s.method, N, beta, s.lambda, gap_density(s.bath, s.delta_e),
                                        s.delta_e, s.w};
        two = reduced::build_two_state(p, s.init);
        slowest = std::abs(two->M.trace());
    }
    const double t_end = s.t_end > 0.0 ? s.t_end : 5.0 / slowest;
    std::vector<double> times;
    for (std::size_t i = 0; i < s.points; ++i)
        times.push_back(t_end * static_cast<double>(i) / static_cast<double>(s.points - 1));

    if (s.engine == Engine::reduced) {
        if (two) return reduced::solve_two_state(*two, times);
        const auto z0 = reduced::ladder_initial(*shells, s.init);
        return reduced::solve_ladder(*shells, z0, times);
    }

    const auto model = ladder ? bms::EnergyEigenbasisModel::ladder(*ladder_model, models::eta(
                                                                                      models::CouplingKind::collective_bitflip, s.n))
                              : bms::EnergyEigenbasisModel::oracle(oracle_model, s.kind);
    bms::DensityMatrix rho0;
    switch (s.init) {
        case reduced::InitialState::uniform_diagonal: rho0 = bms::uniform_diagonal(N); break;
        case reduced::InitialState::coherent: rho0 = bms::coherent_superposition(N); break;
        case reduced::InitialState::top_shell: rho0 = bms::top_shell_state(s.n, s.w); break;
    }
    constexpr std::size_t kMaxOracleStates = 256;
    if (s.method == reduced::Method::rate) {
        const auto R = bms::build_rate_generator(model, spectrum, s.lambda, kMaxOracleStates);
        const Eigen::VectorXd p0 = rho0.diagonal().real();
        const auto pops = bms::evolve(R, p0, times);
        Trajectory out;
        out.times = pops.times;
        const auto set = ladder ? bms::VariableSet::shell_populations : bms::VariableSet::rate_pair;
        for (const auto& row : pops.values) {
            const Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(row.data(), static_cast<Eigen::Index>(row.size()));
            out.values.push_back(bms::project_reduced(p, set, s.w, s.n));
        }
        for (std::size_t i = 0; i < out.values.front().size(); ++i)
            out.labels.push_back(ladder ? fmt::format("z{}", i) : fmt::format("z{}", i + 1));
        return out;
    }
    const bms::QuantumGenerator gen(model, spectrum, s.lambda, {s.include_lamb_shift, kMaxOracleStates});
    const auto traj = bms::evolve(gen, rho0, times);
    const auto set = ladder ? bms::VariableSet::shell_coherent
                     : s.kind == models::CouplingKind::hadamard ? bms::VariableSet::hadamard_pair
                                                                : bms::VariableSet::quantum_pair;
    auto out = bms::project_trajectory(traj, set, s.w, s.n);
    if (!ladder) out.labels = {"z1", "z2"};
    return out;
}

std::string format_double(double x) {
    return fmt::format("{:.17g}", x);
}

std::string csv_header(const config::Config& config) {
    std::string out = fmt::format("# relaxsim {}\n", config::to_string(config.command()));
    for (const auto& [k, v] : config.resolved()) out += fmt::format("# {}={}\n", k, v);
    return out;
}

std::string render_sweep(const config::Config& config, const SweepResult& result) {
    const bool ladder = config.command() == config::Command::sweep_ladder;
    std::string out = csv_header(config);
    out += join_header({ladder ? "n" : "N", "beta", "method", "init", "t_relax", "t_scaled", "stationary_ground"});
    for (const auto& r : result.rows) {
        const std::string t = r.relaxation.reachable() ? format_double(*r.relaxation.time) : "UNREACHABLE";
        const std::string ts =
            r.relaxation.reachable() ? format_double(*r.relaxation.time * r.time_scale) : "UNREACHABLE";
        out += fmt::format("{},{},{},{},{},{},{}\n", r.size, format_double(r.beta), reduced::to_string(r.method),
                           reduced::to_string(r.init), t, ts, format_double(r.relaxation.stationary_ground));
    }
    for (const auto& f : result.fits) {
        if (f.fit) {
            const auto& fit = *f.fit;
            out += fmt::format("# fit method={} exponent={} log_prefactor={} window={}..{} residual={}\n",
                               reduced::to_string(f.method), format_double(fit.exponent),
                               format_double(fit.log_prefactor), fit.samples[fit.window_begin].size,
                               fit.samples.back().size, format_double(fit.residual));
        } else {
            out += fmt::format("# fit method={} unavailable unreachable={}\n", reduced::to_string(f.method),
                               f.unreachable);
        }
    }
    return out;
}

std::string render_dicke(const config::Config& config, const std::vector<DickeRow>& rows) {
    const auto s = config::dicke_settings(config);
    const double scale = s.lambda * s.lambda * s.g;
    std::string out = csv_header(config);
    out += join_header({"n", "t", "t_scaled", "E_rate", "I_rate", "E_quantum", "I_quantum"});
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.rate.times.size(); ++i) {
            const double t = r.rate.times[i];
            out += fmt::format("{},{},{},{},{},{},{}\n", r.n, format_double(t), format_double(t * scale),
                               format_double(r.rate.energy[i]), format_double(r.rate.intensity[i]),
                               format_double(r.quantum.energy[i]), format_double(r.quantum.intensity[i]));
        }
    }
    for (const auto& r : rows) {
        for (const auto* d : {&r.rate, &r.quantum}) {
            out += fmt::format("# peak n={} method={} t_peak={} i_peak={} fwhm={} energy={} energy_drop={}\n", r.n,
                               reduced::to_string(d->method), format_double(d->peak.t_peak),
                               format_double(d->peak.i_peak), format_double(d->peak.width),
                               format_double(d->peak.energy), format_double(d->energy_drop));
        }
        out += fmt::format("# approx n={} t_peak={} i_peak={} fwhm={}\n", r.n, format_double(r.approx.t_peak),
                           format_double(r.approx.i_peak), format_double(r.approx.width));
    }
    if (rows.size() >= 4) {
        auto fit = [&](auto get) {
            std::vector<analysis::ScalingPoint> pts;
            for (const auto& r : rows) pts.push_back({static_cast<double>(r.n), get(r.quantum.peak)});
            return analysis::scaling_exponent(pts);
        };
        const auto ip = fit([](const analysis::PeakMetrics& p) { return p.i_peak; });
        const auto tp = fit([](const analysis::PeakMetrics& p) { return p.t_peak; });
        const auto fw = fit([](const analysis::PeakMetrics& p) { return p.width; });
        out += fmt::format("# fit method=quantum i_peak_exponent={} t_peak_exponent={} fwhm_exponent={}\n",
                           format_double(ip.exponent), format_double(tp.exponent), format_double(fw.exponent));
    }
    return out;
}

std::string render_trajectory(const config::Config& config, const Trajectory& trajectory, double time_scale,
                              double beta) {
    std::string out = csv_header(config);
    out += fmt::format("# beta_used={}\n", format_double(beta));
    std::vector<std::string> cols{"t", "t_scaled"};
    cols.insert(cols.end(), trajectory.labels.begin(), trajectory.labels.end());
    out += join_header(cols);
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        out += format_double(trajectory.times[i]) + "," + format_double(trajectory.times[i] * time_scale);
        for (double v : trajectory.values[i]) out += "," + format_double(v);
        out += "\n";
    }
    return out;
}

std::string run(const config::Config& config) {
    switch (config.command()) {
        case config::Command::sweep_nonlocal: {
            const auto s = config::sweep_settings(config);
            return render_sweep(config, sweep_nonlocal(s));
        }
        case config::Command::sweep_ladder: {
            const auto s = config::sweep_settings(config);
            return render_sweep(config, sweep_ladder(s));
        }
        case config::Command::dicke: {
            const auto s = config::dicke_settings(config);
            return render_dicke(config, dicke(s));
        }
        case config::Command::simulate: {
            const auto s = config::simulate_settings(config);
            double beta = 0.0;
            const auto traj = simulate(s, &beta);
            return render_trajectory(config, traj, s.lambda * s.lambda * gap_density(s.bath, s.delta_e), beta);
        }
        case config::Command::validate: break;
    }
    throw ConfigError("validate produces a report, not CSV");
}

} // namespace relax::harness
