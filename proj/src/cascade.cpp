#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <fmt/format.h>

#include "relax/error.hpp"
#include "relax/reduced.hpp"

namespace relax::reduced {

namespace {

using Real = boost::multiprecision::cpp_bin_float_100;

constexpr double kClusterTolerance = 1e-8;
constexpr double kSplitting = 1e-6;
constexpr int kRichardsonLevels = 4;

// sum_a e^{beta_a t} / prod_{b != a} (beta_a - beta_b) over a, b in [k, n].
Real laplace_sum(const std::vector<Real>& beta, unsigned k, const Real& t) {
    const std::size_t n = beta.size() - 1;
    Real sum = 0;
    for (std::size_t a = k; a <= n; ++a) {
        Real denom = 1;
        for (std::size_t b = k; b <= n; ++b)
            if (b != a) denom *= beta[a] - beta[b];
        sum += exp(beta[a] * t) / denom;
    }
    return sum;
}

// Offset index for each coefficient: members of a cluster of near-equal values get 0, 1, 2, ...
std::vector<int> cluster_offsets(const std::vector<double>& beta, double tolerance) {
    std::vector<std::size_t> order(beta.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return beta[x] < beta[y]; });
    std::vector<int> offset(beta.size(), 0);
    for (std::size_t i = 1; i < order.size(); ++i)
        if (beta[order[i]] - beta[order[i - 1]] < tolerance) offset[order[i]] = offset[order[i - 1]] + 1;
    return offset;
}

void check(const CascadeCoefficients& coeffs, unsigned k, double t) {
    if (coeffs.beta.empty() || coeffs.gamma.size() != coeffs.beta.size())
        throw Error(Errc::length_mismatch, "cascade needs n+1 decay and feeding coefficients");
    if (k > coeffs.n()) throw Error(Errc::out_of_range, fmt::format("index {} beyond n = {}", k, coeffs.n()));
    if (!std::isfinite(t) || t < 0.0) throw Error(Errc::invalid_argument, "cascade time must be finite and >= 0");
}

} // namespace

CascadeCoefficients CascadeCoefficients::rate(unsigned n, double c) {
    CascadeCoefficients out;
    for (unsigned a = 0; a <= n; ++a) {
        out.beta.push_back(-static_cast<double>(a) * c);
        out.gamma.push_back(static_cast<double>(a + 1) * c);
    }
    return out;
}

CascadeCoefficients CascadeCoefficients::quantum(unsigned n, double c) {
    CascadeCoefficients out;
    for (unsigned a = 0; a <= n; ++a) {
        const double al = a;
        out.beta.push_back(-al * (n - al + 1.0) * c);
        out.gamma.push_back((al + 1.0) * (al + 1.0) * c);
    }
    return out;
}

double cascade_solution(const CascadeCoefficients& coeffs, unsigned k, double t) {
    check(coeffs, k, t);
    const unsigned n = coeffs.n();
    Real feed = 1;
    for (unsigned c = k; c < n; ++c) feed *= Real(coeffs.gamma[c]);
    if (k == n) return std::exp(coeffs.beta[n] * t);
    if (t == 0.0) return 0.0;

    double scale = 0.0;
    for (unsigned a = k; a <= n; ++a) scale = std::max(scale, std::abs(coeffs.beta[a]));
    const Real rt(t);
    if (scale == 0.0) {
        // All decay rates vanish: y_k = feed t^{n-k} / (n-k)!
        Real v = feed;
        for (unsigned j = 1; j <= n - k; ++j) v *= rt / j;
        return static_cast<double>(v);
    }

    const std::vector<double> tail(coeffs.beta.begin() + k, coeffs.beta.end());
    const std::vector<int> offset = cluster_offsets(tail, kClusterTolerance * scale);
    const bool degenerate = std::any_of(offset.begin(), offset.end(), [](int o) { return o > 0; });

    std::vector<Real> beta(coeffs.beta.begin(), coeffs.beta.end());
    if (!degenerate) return static_cast<double>(feed * laplace_sum(beta, k, rt));

    // The solution is analytic in the coefficients, so split the clusters by h, h/2, ...
    // and extrapolate the polynomial in h to zero (Neville).
    std::vector<Real> h(kRichardsonLevels), value(kRichardsonLevels);
    for (int level = 0; level < kRichardsonLevels; ++level) {
        h[level] = Real(kSplitting * scale) / (1 << level);
        for (std::size_t i = 0; i < tail.size(); ++i) beta[k + i] = Real(tail[i]) + offset[i] * h[level];
        value[level] = laplace_sum(beta, k, rt);
    }
    for (int m = 1; m < kRichardsonLevels; ++m)
        for (int i = kRichardsonLevels - 1; i >= m; --i)
            value[i] = (h[i - m] * value[i] - h[i] * value[i - 1]) / (h[i - m] - h[i]);
    return static_cast<double>(feed * value[kRichardsonLevels - 1]);
}

std::vector<double> cascade_solution(const CascadeCoefficients& coeffs, double t) {
    std::vector<double> out;
    for (unsigned k = 0; k <= coeffs.n(); ++k) out.push_back(cascade_solution(coeffs, k, t));
    return out;
}

} // namespace relax::reduced
