#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

#include "itcb/records.hpp"
#include "itcb/rng.hpp"

namespace itcb::linear {

/// Y = θᵀa + w with w ~ N(0, noise_std²) over a fixed finite action set.
struct LinearBanditEnv {
    Eigen::VectorXd theta;
    std::vector<Eigen::VectorXd> actions;
    double noise_std = 1.0;

    /// Checks dimensions, ‖a‖₂ ≤ 1 and a nonempty action set; throws DomainError.
    void validate() const;
    double mean_reward(std::size_t action) const { return theta.dot(actions[action]); }
    std::size_t best_action() const;
};

/// Posterior N(mu, cov) over θ.
struct GaussianBelief {
    Eigen::VectorXd mu;
    Eigen::MatrixXd cov;
};

/// `count` actions drawn uniformly from the unit sphere in R^d.
std::vector<Eigen::VectorXd> random_unit_actions(Rng& rng, std::size_t d, std::size_t count);

/// Conjugate update after observing y at action a. Rank-one form of
/// precision += a aᵀ / noise_var, followed by re-symmetrization.
GaussianBelief posterior_update(const GaussianBelief& belief, const Eigen::VectorXd& a, double y,
                                double noise_var);

/// Thompson sampling: argmax of θ̂ᵀa for θ̂ drawn from the belief; ties go to the lowest index.
std::size_t ts_select(Rng& rng, const GaussianBelief& belief, const std::vector<Eigen::VectorXd>& actions);

/// max_a aᵀ cov a.
double max_action_variance(const GaussianBelief& belief, const std::vector<Eigen::VectorXd>& actions);

/// Γ = 4 sqrt( σ²max / log(1 + σ²max / noise_var) · log(4|A| / δ) ).
/// At σ²max = 0 the ratio is replaced by its limit noise_var.
double it_ucb_width(const GaussianBelief& belief, const std::vector<Eigen::VectorXd>& actions,
                    double noise_var, double delta);

/// argmax_a μᵀa + (Γ/2) sqrt(I(θ; Y_a)); ties go to the lowest index.
std::size_t ucb_select(const GaussianBelief& belief, const std::vector<Eigen::VectorXd>& actions,
                       double noise_var, double delta);

struct LinearConfig {
    std::size_t dim = 5;
    std::size_t num_actions = 30;
    std::size_t periods = 2000;
    double noise_std = 1.0;
    /// Prior N(prior_mean · 1, prior_var · I).
    double prior_mean = 0.0;
    double prior_var = 1.0;
    Agent agent = Agent::ThompsonSampling;
    /// Confidence parameter used by the UCB agent; 0 means 1/L.
    double delta = 0.0;
};

struct LinearRun {
    std::vector<StepRecord> steps;
    LinearBanditEnv env;
    GaussianBelief prior;
    GaussianBelief final_belief;
    /// ½ log det(I + Σ₁ V), V = Σ aₗaₗᵀ / σ², from the accumulated design matrix.
    double logdet_gain = 0.0;
    double lambda_max = 0.0;
    /// max_a θᵀa − min_a θᵀa.
    double reward_range = 0.0;
    /// Γ at period 1 with δ = 1/L.
    double prop_gamma = 0.0;
};

/// Draws θ and the action set from `rng`, then runs `config.periods` periods.
LinearRun run_linear_experiment(const LinearConfig& config, Rng& rng);

/// Γ sqrt(L · budget) + B with Γ = prop_gamma and budget the L-period information budget.
double regret_bound(const LinearRun& run, std::size_t periods, double noise_var);

}  // namespace itcb::linear
