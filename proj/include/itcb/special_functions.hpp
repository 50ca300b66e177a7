#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>

#include "itcb/rng.hpp"

namespace itcb {

/// ln Γ(x) for x > 0. Throws DomainError otherwise.
double log_gamma(double x);

/// ψ(x) = d/dx ln Γ(x) for x > 0. Throws DomainError otherwise.
double digamma(double x);

// Samplers. All draw exclusively from the supplied Rng, so an identical call
// sequence against an identically seeded Rng reproduces its outputs exactly.

/// Gamma(shape, 1). Shapes below one use Gamma(a) = Gamma(a + 1) * U^(1/a).
double sample_gamma(Rng& rng, double shape);

/// Natural log of a Gamma(shape, 1) draw, computed without forming the draw.
/// Stays finite for tiny shapes where U^(1/a) underflows.
double sample_log_gamma(Rng& rng, double shape);

/// N(mean, cov) through a symmetric square root of cov.
/// Negative eigenvalues down to -1e-8 (relative) are treated as rounding
/// noise and clipped; anything more negative throws NumericalError.
Eigen::VectorXd sample_gaussian_vec(Rng& rng, const Eigen::VectorXd& mean,
                                    const Eigen::MatrixXd& cov);

/// Symmetric square root S with S*S^T = cov, under the same jitter rules.
Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& cov);

/// Dirichlet(alpha). Output is nonnegative and sums to one.
Eigen::VectorXd sample_dirichlet(Rng& rng, std::span<const double> alpha);

/// Beta(a, b), defined as the first coordinate of Dirichlet((a, b)).
double sample_beta(Rng& rng, double a, double b);

/// Index i with probability p_i. p is renormalized; negative entries throw.
std::size_t sample_categorical(Rng& rng, std::span<const double> p);

/// Same as sample_categorical over a cumulative table built once by the caller.
std::size_t sample_from_cdf(Rng& rng, std::span<const double> cdf);

}  // namespace itcb
