#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "itcb/rng.hpp"

namespace itcb {

/// Dirichlet pseudo-counts with a cached total.
class DirichletParams {
public:
    DirichletParams() = default;
    explicit DirichletParams(std::vector<double> alpha);
    /// N categories, each with pseudo-count `value`.
    static DirichletParams uniform(std::size_t n, double value);

    std::size_t size() const noexcept { return alpha_.size(); }
    double operator[](std::size_t i) const { return alpha_[i]; }
    std::span<const double> alpha() const noexcept { return alpha_; }
    double alpha_bar() const noexcept { return alpha_bar_; }

    /// Posterior after one categorical observation of `category`.
    void observe(std::size_t category, double count = 1.0);

    /// Posterior mean alpha / alpha_bar.
    std::vector<double> mean() const;

    friend bool operator==(const DirichletParams&, const DirichletParams&) = default;

private:
    std::vector<double> alpha_;
    double alpha_bar_ = 0.0;
};

/// Beta pseudo-counts: `a` counts successes (reward 1), `b` failures.
struct BetaParams {
    double a = 1.0;
    double b = 1.0;

    void observe(bool success) noexcept { (success ? a : b) += 1.0; }
    double mean() const noexcept { return a / (a + b); }
    double total() const noexcept { return a + b; }
    DirichletParams as_dirichlet() const { return DirichletParams({a, b}); }

    friend bool operator==(const BetaParams&, const BetaParams&) = default;
};

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

/// I(θ; aᵀθ + w) for θ ~ N(·, cov), w ~ N(0, noise_var): ½ log(1 + aᵀ cov a / noise_var).
double gaussian_linear_mi(const Eigen::MatrixXd& cov, const Eigen::VectorXd& a, double noise_var);

/// Mutual information between p ~ Dirichlet(α) and one draw Y ~ Categorical(p), in nats.
double dirichlet_obs_mi(const DirichletParams& p);
double dirichlet_obs_mi(const BetaParams& p);

/// 1 / (6 ᾱ); a lower bound on dirichlet_obs_mi when every α_i ≥ 2/N.
double dirichlet_mi_lower_bound(const DirichletParams& p);

/// Differential entropy of Dirichlet(α) with respect to Lebesgue measure on the simplex.
double dirichlet_entropy(const DirichletParams& p);
double beta_entropy(const BetaParams& p);

/// h(Dir(α)) − h(Dir(α + counts)). Only the touched coordinates are evaluated.
double dirichlet_entropy_gain(const DirichletParams& p, std::span<const std::int64_t> counts);

/// Same as dirichlet_entropy_gain for a sparse count vector given as (category, count) pairs.
double dirichlet_entropy_gain_sparse(const DirichletParams& p,
                                     std::span<const std::pair<std::size_t, std::int64_t>> counts);

/// Beta counterpart: entropy reduction after `successes` ones and `failures` zeros.
double beta_entropy_gain(const BetaParams& p, std::int64_t successes, std::int64_t failures);

/// N log(ᾱ + n): comparison value for the entropy reduction after n observations.
double dirichlet_gain_bound(const DirichletParams& p, std::int64_t n);

/// Single-observation MI after `extra` further observations chosen adversarially,
/// i.e. an upper bound proxy for min over histories of the in-episode filtered MI.
/// Each extra count goes to the category that minimizes the resulting MI.
double worst_case_obs_mi(const DirichletParams& p, std::size_t extra);
double worst_case_obs_mi(const BetaParams& p, std::size_t extra);

/// Unbiased Monte-Carlo estimate of I(p; s_1..s_n) for p ~ Dirichlet(α), s_i iid ~ p.
/// Each sample contributes the exact entropy reduction h(α) − h(α + counts).
McEstimate mc_sequence_mi(Rng& rng, const DirichletParams& p, std::size_t n, std::size_t samples);

/// Frequency with which pᵀv − E[pᵀv] > t for p ~ Dirichlet(α), one entry per threshold,
/// all thresholds evaluated on the same `draws` samples.
std::vector<double> dirichlet_tail_exceedance(Rng& rng, const DirichletParams& p,
                                              std::span<const double> v,
                                              std::span<const double> thresholds, std::size_t draws);

/// (d/2) log(1 + λ_max L / σ²): information any adapted action sequence can gain in L periods.
double linear_bandit_info_budget(std::size_t d, double lambda_max, double periods, double noise_var);

/// (S + 2) S A log(1 + T / (S A)).
double tabular_info_budget(std::size_t states, std::size_t actions, double steps);

/// K D log(1 + T).
double factored_info_budget(std::size_t max_factor_size, std::size_t domain_total, double steps);

}  // namespace itcb
