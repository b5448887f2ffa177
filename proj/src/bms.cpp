#include "relax/bms.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "relax/error.hpp"

namespace relax::bms {

namespace {

using cd = std::complex<double>;
constexpr cd I{0.0, 1.0};

struct Neighbor {
    std::size_t c;
    double amplitude;  // <a|A|c>
    double omega;      // E_c - E_a
};

std::vector<std::vector<Neighbor>> neighbor_lists(const EnergyEigenbasisModel& model) {
    const std::size_t n = model.size();
    std::vector<std::vector<Neighbor>> out(n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t c = 0; c < n; ++c) {
            const double amp = model.coupling(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c));
            if (amp != 0.0) out[a].push_back({c, amp, model.energies[c] - model.energies[a]});
        }
    return out;
}

void check_scale(std::size_t n, std::size_t max_states) {
    if (n > max_states)
        throw Error(Errc::scale_exceeded, fmt::format("{} states exceed the oracle limit of {}", n, max_states));
}

// Bohr-frequency sector of every vectorized index.
std::vector<Sector> partition_sectors(const EnergyEigenbasisModel& model) {
    const std::size_t n = model.size();
    std::vector<std::pair<double, Eigen::Index>> freqs;
    freqs.reserve(n * n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            freqs.emplace_back(model.energies[a] - model.energies[b], static_cast<Eigen::Index>(a * n + b));
    std::sort(freqs.begin(), freqs.end());
    std::vector<Sector> sectors;
    for (const auto& [omega, p] : freqs) {
        if (sectors.empty() || std::abs(omega - sectors.back().omega) > model.energy_match_tolerance)
            sectors.push_back({omega, {}});
        sectors.back().indices.push_back(p);
    }
    for (auto& s : sectors) std::sort(s.indices.begin(), s.indices.end());
    return sectors;
}

} // namespace

EnergyEigenbasisModel::EnergyEigenbasisModel(std::vector<double> e, Eigen::MatrixXd a, double tolerance)
    : energies(std::move(e)), coupling(std::move(a)), energy_match_tolerance(tolerance) {
    const auto n = static_cast<Eigen::Index>(energies.size());
    if (coupling.rows() != n || coupling.cols() != n)
        throw Error(Errc::length_mismatch, "coupling matrix does not match the number of energies");
    for (double x : energies)
        if (!std::isfinite(x)) throw Error(Errc::non_finite_input, "energies must be finite");
    if ((coupling - coupling.transpose()).cwiseAbs().maxCoeff() > 1e-14 * std::max(1.0, coupling.cwiseAbs().maxCoeff()))
        throw Error(Errc::invalid_argument, "coupling operator must be symmetric");
    if (energy_match_tolerance < 0.0) {
        double scale = 1.0;
        for (double x : energies) scale = std::max(scale, std::abs(x));
        energy_match_tolerance = 1e-9 * scale;
    }
}

EnergyEigenbasisModel EnergyEigenbasisModel::oracle(const models::OracleModel& model, models::CouplingKind kind) {
    if (!models::is_nonlocal(kind)) throw Error(Errc::invalid_argument, "oracle model takes a nonlocal coupling");
    return {model.energies(), models::coupling_matrix(kind, model.n, model.w)};
}

EnergyEigenbasisModel EnergyEigenbasisModel::ladder(const models::LadderModel& model, double eta) {
    if (model.n > 12) throw Error(Errc::scale_exceeded, "ladder oracle limited to n <= 12");
    const auto N = static_cast<Eigen::Index>(model.states());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(N, N);
    for (Eigen::Index x = 0; x < N; ++x)
        for (unsigned bit = 0; bit < model.n; ++bit) a(x, x ^ (Eigen::Index{1} << bit)) = eta;
    return {model.energies(), std::move(a)};
}

bool EnergyEigenbasisModel::same_energy(double x, double y) const noexcept {
    return std::abs(x - y) <= energy_match_tolerance;
}

DampingTensor::DampingTensor(const EnergyEigenbasisModel& model, const bath::BathSpectrum& bath, double lambda)
    : model_(model), bath_(bath), lambda2_(lambda * lambda) {}

double DampingTensor::gamma_bar(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const {
    const auto& e = model_.energies;
    const double omega = e[b] - e[a];
    if (!model_.same_energy(e[d] - e[c], omega)) return 0.0;
    const auto& A = model_.coupling;
    const double amp = A(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) *
                       A(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(d));
    if (amp == 0.0) return 0.0;
    return lambda2_ * bath_.gamma(omega) * amp;
}

double DampingTensor::sigma_bar(std::size_t a, std::size_t b) const {
    const auto& e = model_.energies;
    if (!model_.same_energy(e[a], e[b])) return 0.0;
    const auto& A = model_.coupling;
    double sum = 0.0;
    for (std::size_t c = 0; c < model_.size(); ++c) {
        const double amp = A(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(a)) *
                           A(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(b));
        if (amp != 0.0) sum += bath_.sigma(e[a] - e[c]).imag() * amp;
    }
    return 0.5 * lambda2_ * sum;
}

QuantumGenerator::QuantumGenerator(const EnergyEigenbasisModel& model, const bath::BathSpectrum& bath,
                                   double lambda, GeneratorOptions options)
    : n_(model.size()) {
    check_scale(n_, options.max_states);
    const std::size_t n = n_;
    const auto dim = static_cast<Eigen::Index>(n * n);
    superop_.resize(dim, dim);
    sectors_ = partition_sectors(model);
    if (n <= 1) return;

    const double lambda2 = lambda * lambda;
    const auto& e = model.energies;
    const auto nbrs = neighbor_lists(model);

    // lambda^2 gamma(E_c - E_a) per neighbor pair, indexed like nbrs.
    std::vector<std::vector<double>> rate(n);
    for (std::size_t a = 0; a < n; ++a)
        for (const auto& nb : nbrs[a]) rate[a].push_back(lambda2 * bath.gamma(nb.omega));

    // K_ad = sum_c lambda^2 gamma(E_a - E_c) A_ca A_cd for E_a = E_d (anticommutator part),
    // H_ab = lambda^2/2 sum_c Im sigma(E_a - E_c) A_ca A_cb for E_a = E_b (Lamb shift).
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t c = 0; c < n; ++c) {
        for (const auto& na : nbrs[c]) {
            const std::size_t a = na.c;
            const double g = lambda2 * bath.gamma(e[a] - e[c]);
            const double s = options.include_lamb_shift ? 0.5 * lambda2 * bath.sigma(e[a] - e[c]).imag() : 0.0;
            for (const auto& nd : nbrs[c]) {
                const std::size_t d = nd.c;
                if (!model.same_energy(e[a], e[d])) continue;
                const double amp = na.amplitude * nd.amplitude;
                K(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(d)) += g * amp;
                H(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(d)) += s * amp;
            }
        }
    }

    std::vector<std::vector<std::pair<std::size_t, double>>> k_rows(n), h_rows(n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t d = 0; d < n; ++d) {
            const double k = K(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(d));
            const double h = H(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(d));
            if (k != 0.0) k_rows[a].emplace_back(d, k);
            if (h != 0.0) h_rows[a].emplace_back(d, h);
        }

    std::vector<Eigen::Triplet<cd>> triplets;
    const double tol = model.energy_match_tolerance;
    auto idx = [n](std::size_t x, std::size_t y) { return static_cast<Eigen::Index>(x * n + y); };
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            const Eigen::Index row = idx(a, b);
            triplets.emplace_back(row, row, -I * (e[a] - e[b]));
            // gamma_bar_{ac,bd} rho_cd
            for (std::size_t i = 0; i < nbrs[a].size(); ++i) {
                const auto& nc = nbrs[a][i];
                for (const auto& nd : nbrs[b]) {
                    if (std::abs(nc.omega - nd.omega) > tol) continue;
                    triplets.emplace_back(row, idx(nc.c, nd.c), rate[a][i] * nc.amplitude * nd.amplitude);
                }
            }
            // -1/2 {K, rho}
            for (const auto& [d, k] : k_rows[a]) triplets.emplace_back(row, idx(d, b), -0.5 * k);
            for (const auto& [d, k] : k_rows[b]) triplets.emplace_back(row, idx(a, d), -0.5 * k);
            // -i [H_LS, rho]
            for (const auto& [c, h] : h_rows[a]) triplets.emplace_back(row, idx(c, b), -I * h);
            for (const auto& [c, h] : h_rows[b]) triplets.emplace_back(row, idx(a, c), I * h);
        }
    }
    superop_.setFromTriplets(triplets.begin(), triplets.end());
    superop_.makeCompressed();
}

Eigen::MatrixXcd QuantumGenerator::dense() const {
    if (n_ > 32) throw Error(Errc::scale_exceeded, "dense superoperator only for N <= 32");
    return Eigen::MatrixXcd(superop_);
}

DensityMatrix QuantumGenerator::apply(const DensityMatrix& rho) const {
    const auto n = static_cast<Eigen::Index>(n_);
    if (rho.rows() != n || rho.cols() != n) throw Error(Errc::length_mismatch, "density matrix size");
    Eigen::VectorXcd v(n * n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) v[a * n + b] = rho(a, b);
    const Eigen::VectorXcd dv = superop_ * v;
    DensityMatrix out(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) out(a, b) = dv[a * n + b];
    return out;
}

QuantumGenerator build_quantum_generator(const EnergyEigenbasisModel& model, const bath::BathSpectrum& bath,
                                         double lambda, bool include_lamb_shift, std::size_t max_states) {
    return QuantumGenerator(model, bath, lambda, GeneratorOptions{include_lamb_shift, max_states});
}

Eigen::MatrixXd build_rate_generator(const EnergyEigenbasisModel& model, const bath::BathSpectrum& bath,
                                     double lambda, std::size_t max_states) {
    const std::size_t n = model.size();
    check_scale(n, max_states);
    const auto N = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(N, N);
    const double lambda2 = lambda * lambda;
    // gamma_bar_{ab,ab} = lambda^2 gamma(E_b - E_a) |A_ab|^2 is the rate b -> a. The a = b gain
    // and loss terms cancel identically and are never evaluated.
    for (Eigen::Index a = 0; a < N; ++a)
        for (Eigen::Index b = 0; b < N; ++b) {
            if (a == b) continue;
            const double amp = model.coupling(a, b);
            if (amp == 0.0) continue;
            const double r = lambda2 * bath.gamma(model.energies[static_cast<std::size_t>(b)] -
                                                  model.energies[static_cast<std::size_t>(a)]) * amp * amp;
            R(a, b) += r;
            R(b, b) -= r;
        }
    return R;
}

DensityTrajectory evolve(const QuantumGenerator& generator, const DensityMatrix& rho0,
                         std::span<const double> times, const EvolveOptions& options) {
    numerics::check_time_grid(times);
    const auto n = static_cast<Eigen::Index>(generator.states());
    if (rho0.rows() != n || rho0.cols() != n) throw Error(Errc::length_mismatch, "initial density matrix size");

    const auto& G = generator.superoperator();
    const Eigen::Index dim = n * n;
    Eigen::VectorXcd x0(dim);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) x0[a * n + b] = rho0(a, b);

    std::vector<Eigen::VectorXcd> out(times.size(), Eigen::VectorXcd::Zero(dim));
    std::vector<Eigen::Index> local(static_cast<std::size_t>(dim), -1);

    for (const auto& sector : generator.sectors()) {
        const auto m = static_cast<Eigen::Index>(sector.indices.size());
        Eigen::VectorXcd y0(m);
        for (Eigen::Index i = 0; i < m; ++i) y0[i] = x0[sector.indices[static_cast<std::size_t>(i)]];
        if (y0.cwiseAbs().maxCoeff() == 0.0) continue;  // stays zero

        for (Eigen::Index i = 0; i < m; ++i) local[static_cast<std::size_t>(sector.indices[static_cast<std::size_t>(i)])] = i;
        // Within a sector the unitary part is -i omega times identity and commutes with the
        // rest, so it is factored out as a phase.
        std::vector<Eigen::Triplet<cd>> triplets;
        for (Eigen::Index i = 0; i < m; ++i) {
            const Eigen::Index row = sector.indices[static_cast<std::size_t>(i)];
            for (Superoperator::InnerIterator it(G, row); it; ++it) {
                const Eigen::Index j = local[static_cast<std::size_t>(it.col())];
                if (j < 0 || sector.indices[static_cast<std::size_t>(j)] != it.col())
                    throw Error(Errc::invalid_argument, "generator couples different Bohr sectors");
                triplets.emplace_back(i, j, it.value());
            }
            triplets.emplace_back(i, i, I * sector.omega);
        }
        Eigen::SparseMatrix<cd> block(m, m);
        block.setFromTriplets(triplets.begin(), triplets.end());

        std::vector<Eigen::VectorXcd> ys;
        if (m <= options.max_dense_sector) {
            numerics::DensePropagator prop(Eigen::MatrixXcd(block), options.condition_limit, options.integrator);
            ys = prop.propagate(y0, times);
        } else {
            ys = numerics::propagate_sparse(block, y0, times, options.integrator);
        }
        for (std::size_t k = 0; k < times.size(); ++k) {
            const cd phase = std::exp(-I * sector.omega * times[k]);
            for (Eigen::Index i = 0; i < m; ++i) out[k][sector.indices[static_cast<std::size_t>(i)]] = phase * ys[k][i];
        }
        for (Eigen::Index i = 0; i < m; ++i) local[static_cast<std::size_t>(sector.indices[static_cast<std::size_t>(i)])] = -1;
    }

    DensityTrajectory traj;
    traj.times.assign(times.begin(), times.end());
    for (const auto& v : out) {
        DensityMatrix rho(n, n);
        for (Eigen::Index a = 0; a < n; ++a)
            for (Eigen::Index b = 0; b < n; ++b) rho(a, b) = v[a * n + b];
        traj.states.push_back(std::move(rho));
    }
    return traj;
}

Trajectory evolve(const Eigen::MatrixXd& rate_generator, const Eigen::VectorXd& p0, std::span<const double> times,
                  const EvolveOptions& options) {
    if (rate_generator.rows() != p0.size()) throw Error(Errc::length_mismatch, "population vector size");
    const double sum = p0.sum();
    if (std::abs(sum - 1.0) > 1e-10) throw Error(Errc::invalid_argument, fmt::format("populations sum to {}", sum));
    numerics::DensePropagator prop(rate_generator.cast<cd>(), options.condition_limit, options.integrator);
    const auto states = prop.propagate(p0.cast<cd>(), times);
    Trajectory traj;
    traj.times.assign(times.begin(), times.end());
    for (Eigen::Index a = 0; a < p0.size(); ++a) traj.labels.push_back(fmt::format("p{}", a));
    for (const auto& s : states) {
        std::vector<double> row(static_cast<std::size_t>(s.size()));
        for (Eigen::Index a = 0; a < s.size(); ++a) row[static_cast<std::size_t>(a)] = s[a].real();
        traj.values.push_back(std::move(row));
    }
    return traj;
}

DensityMatrix uniform_diagonal(std::size_t n_states) {
    const auto n = static_cast<Eigen::Index>(n_states);
    DensityMatrix rho = DensityMatrix::Zero(n, n);
    rho.diagonal().setConstant(1.0 / static_cast<double>(n_states));
    return rho;
}

DensityMatrix coherent_superposition(std::size_t n_states) {
    const auto n = static_cast<Eigen::Index>(n_states);
    return DensityMatrix::Constant(n, n, 1.0 / static_cast<double>(n_states));
}

DensityMatrix top_shell_state(unsigned n_qubits, models::StateIndex w) {
    const auto N = models::StateIndex{1} << n_qubits;
    const auto top = static_cast<Eigen::Index>(w ^ (N - 1));
    DensityMatrix rho = DensityMatrix::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    rho(top, top) = 1.0;
    return rho;
}

DensityDiagnostics diagnose(const DensityMatrix& rho) {
    DensityDiagnostics d{};
    d.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    d.trace_error = std::abs(rho.trace() - cd{1.0, 0.0});
    const DensityMatrix herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<DensityMatrix> solver(herm, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = solver.eigenvalues().minCoeff();
    return d;
}

std::vector<double> project_reduced(const DensityMatrix& rho, VariableSet set, models::StateIndex w, unsigned n) {
    const auto N = static_cast<Eigen::Index>(models::StateIndex{1} << n);
    if (rho.rows() != N || rho.cols() != N) throw Error(Errc::length_mismatch, "density matrix does not match n");
    const auto wi = static_cast<Eigen::Index>(w);
    switch (set) {
        case VariableSet::rate_pair: {
            const double z1 = rho(wi, wi).real();
            return {z1, rho.diagonal().real().sum() - z1};
        }
        case VariableSet::quantum_pair: {
            const cd total = rho.sum();
            const cd z2 = total - rho.row(wi).sum() - rho.col(wi).sum() + rho(wi, wi);
            return {rho(wi, wi).real(), z2.real()};
        }
        case VariableSet::hadamard_pair: {
            Eigen::VectorXcd sign(N);
            for (Eigen::Index a = 0; a < N; ++a)
                sign[a] = (a == wi) ? 0.0 : ((std::popcount(w & static_cast<models::StateIndex>(a)) % 2 == 0) ? 1.0 : -1.0);
            const cd z2 = sign.transpose() * rho * sign;
            return {rho(wi, wi).real(), z2.real()};
        }
        case VariableSet::shell_populations:
        case VariableSet::shell_coherent: {
            std::vector<cd> z(n + 1, 0.0);
            for (Eigen::Index a = 0; a < N; ++a) {
                const unsigned da = models::hamming_distance(static_cast<models::StateIndex>(a), w);
                if (set == VariableSet::shell_populations) {
                    z[da] += rho(a, a);
                    continue;
                }
                for (Eigen::Index b = 0; b < N; ++b)
                    if (models::hamming_distance(static_cast<models::StateIndex>(b), w) == da) z[da] += rho(a, b);
            }
            std::vector<double> out;
            for (const auto& v : z) out.push_back(v.real());
            return out;
        }
    }
    return {};
}

std::vector<double> project_reduced(const Eigen::VectorXd& populations, VariableSet set, models::StateIndex w,
                                    unsigned n) {
    if (set != VariableSet::rate_pair && set != VariableSet::shell_populations)
        throw Error(Errc::invalid_argument, "population vectors only project onto population variables");
    DensityMatrix rho = populations.cast<cd>().asDiagonal();
    return project_reduced(rho, set, w, n);
}

Trajectory project_trajectory(const DensityTrajectory& trajectory, VariableSet set, models::StateIndex w,
                              unsigned n) {
    Trajectory out;
    out.times = trajectory.times;
    for (const auto& rho : trajectory.states) out.values.push_back(project_reduced(rho, set, w, n));
    const std::size_t width = out.values.empty() ? 0 : out.values.front().size();
    for (std::size_t i = 0; i < width; ++i) out.labels.push_back(fmt::format("z{}", i));
    return out;
}

double dephasing_decay_rate(double d_a, double d_b, double lambda, double gamma0) {
    if (!std::isfinite(d_a) || !std::isfinite(d_b) || !std::isfinite(lambda) || !std::isfinite(gamma0))
        throw Error(Errc::non_finite_input, "dephasing rate inputs must be finite");
    const double diff = d_a - d_b;
    return 0.5 * lambda * lambda * gamma0 * diff * diff;
}

} // namespace relax::bms
