#include "itcb/special_functions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "itcb/errors.hpp"

namespace itcb {

namespace {

// Both series are evaluated only for x >= kAsymptoticFloor; smaller arguments
// are shifted up with the recurrences Γ(x+1) = xΓ(x) and ψ(x+1) = ψ(x) + 1/x.
constexpr double kAsymptoticFloor = 8.0;

// B_{2k} / (2k (2k-1)), k = 1..8 (Stirling series for ln Γ).
constexpr std::array<double, 8> kStirling = {
    1.0 / 12.0,        -1.0 / 360.0,   1.0 / 1260.0,    -1.0 / 1680.0,
    1.0 / 1188.0,      -691.0 / 360360.0, 1.0 / 156.0, -3617.0 / 122400.0};

// B_{2k} / (2k), k = 1..8 (asymptotic series for ψ).
constexpr std::array<double, 8> kDigammaSeries = {
    1.0 / 12.0,   -1.0 / 120.0,       1.0 / 252.0, -1.0 / 240.0,
    1.0 / 132.0,  -691.0 / 32760.0,   1.0 / 12.0,  -3617.0 / 8160.0};

void require_positive(double x, const char* name) {
    if (!(x > 0.0)) {
        throw DomainError(std::string(name) + ": argument must be positive, got " +
                          std::to_string(x));
    }
}

// Horner evaluation of sum_k c[k] * z^k for k = 0..n-1.
template <std::size_t N>
double horner(const std::array<double, N>& c, double z) {
    double acc = 0.0;
    for (std::size_t k = N; k-- > 0;) acc = acc * z + c[k];
    return acc;
}

}  // namespace

double log_gamma(double x) {
    require_positive(x, "log_gamma");
    double shift = 1.0;
    while (x < kAsymptoticFloor) {
        shift *= x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double series = inv * horner(kStirling, inv * inv);
    const double stirling = (x - 0.5) * std::log(x) - x +
                            0.5 * std::log(2.0 * std::numbers::pi) + series;
    return stirling - std::log(shift);
}

double digamma(double x) {
    require_positive(x, "digamma");
    double acc = 0.0;
    while (x < kAsymptoticFloor) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    const double inv2 = 1.0 / (x * x);
    const double series = inv2 * horner(kDigammaSeries, inv2);
    return acc + std::log(x) - 0.5 / x - series;
}

double sample_gamma(Rng& rng, double shape) {
    require_positive(shape, "sample_gamma");
    if (shape < 1.0) {
        const double g = sample_gamma(rng, shape + 1.0);
        return g * std::pow(rng.uniform(), 1.0 / shape);
    }
    // Marsaglia & Tsang squeeze.
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = 0.0;
        double v = 0.0;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double sample_log_gamma(Rng& rng, double shape) {
    require_positive(shape, "sample_gamma");
    if (shape < 1.0) {
        const double g = sample_gamma(rng, shape + 1.0);
        return std::log(g) + std::log(rng.uniform()) / shape;
    }
    return std::log(sample_gamma(rng, shape));
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& cov) {
    if (cov.rows() != cov.cols()) throw DomainError("symmetric_sqrt: covariance must be square");
    const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    if (eig.info() != Eigen::Success) throw NumericalError("symmetric_sqrt: eigendecomposition failed");

    Eigen::VectorXd lambda = eig.eigenvalues();
    const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
    // Jitter escalation: rounding loss of up to 1e-12 is routine after rank-one
    // updates; we tolerate up to 1e-8 before declaring the matrix indefinite.
    constexpr std::array<double, 3> kJitter = {1e-12, 1e-10, 1e-8};
    const double min_lambda = lambda.size() ? lambda.minCoeff() : 0.0;
    bool accepted = min_lambda >= 0.0;
    for (double jitter : kJitter) {
        if (accepted) break;
        accepted = min_lambda >= -jitter * scale;
    }
    if (!accepted) {
        throw NumericalError("symmetric_sqrt: covariance is not positive semidefinite (min eigenvalue " +
                             std::to_string(min_lambda) + ")");
    }
    lambda = lambda.cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
}

Eigen::VectorXd sample_gaussian_vec(Rng& rng, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
    if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
        throw DomainError("sample_gaussian_vec: mean/covariance dimension mismatch");
    }
    Eigen::VectorXd z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    if (cov.isZero(0.0)) return mean;
    return mean + symmetric_sqrt(cov) * z;
}

Eigen::VectorXd sample_dirichlet(Rng& rng, std::span<const double> alpha) {
    if (alpha.empty()) throw DomainError("sample_dirichlet: empty parameter vector");
    for (double a : alpha) {
        if (!(a > 0.0)) throw DomainError("sample_dirichlet: every alpha must be positive");
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(alpha.size()));
    for (std::size_t i = 0; i < alpha.size(); ++i) out[static_cast<Eigen::Index>(i)] = sample_log_gamma(rng, alpha[i]);
    const double top = out.maxCoeff();
    out = (out.array() - top).exp();
    out /= out.sum();
    return out;
}

double sample_beta(Rng& rng, double a, double b) {
    const std::array<double, 2> alpha = {a, b};
    return sample_dirichlet(rng, alpha)[0];
}

std::size_t sample_categorical(Rng& rng, std::span<const double> p) {
    if (p.empty()) throw DomainError("sample_categorical: empty probability vector");
    double total = 0.0;
    for (double v : p) {
        if (v < 0.0 || !std::isfinite(v)) throw DomainError("sample_categorical: negative or non-finite probability");
        total += v;
    }
    if (!(total > 0.0)) throw DomainError("sample_categorical: probabilities sum to zero");
    const double u = rng.uniform() * total;
    double cum = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) last_positive = i;
        cum += p[i];
        if (u < cum) return i;
    }
    return last_positive;
}

std::size_t sample_from_cdf(Rng& rng, std::span<const double> cdf) {
    if (cdf.empty()) throw DomainError("sample_from_cdf: empty table");
    const double u = rng.uniform() * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) return cdf.size() - 1;
    return static_cast<std::size_t>(it - cdf.begin());
}

}  // namespace itcb
