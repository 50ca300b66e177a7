#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "itcb/info_theory.hpp"
#include "itcb/records.hpp"
#include "itcb/rng.hpp"

namespace itcb::tabular {

/// Finite-horizon MDP with Bernoulli rewards. Pair index is s * A + a and
/// transition rows are stored contiguously: P[(s * A + a) * S + s'].
struct TabularMDPModel {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    std::size_t horizon = 0;
    std::vector<double> reward;      // S*A mean rewards in [0, 1]
    std::vector<double> transition;  // S*A*S
    std::vector<double> initial;     // ρ, S entries

    std::size_t pair(std::size_t s, std::size_t a) const noexcept { return s * num_actions + a; }
    std::size_t num_pairs() const noexcept { return num_states * num_actions; }
    std::span<const double> row(std::size_t s, std::size_t a) const {
        return {transition.data() + pair(s, a) * num_states, num_states};
    }
    std::span<double> row(std::size_t s, std::size_t a) {
        return {transition.data() + pair(s, a) * num_states, num_states};
    }

    /// Shapes, reward range, row sums (1e-10) and ρ; throws DomainError.
    void validate() const;
};

/// Prior over TabularMDPModel: independent Beta rewards and Dirichlet transition rows.
struct TabularMDPSpec {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    std::size_t horizon = 0;
    std::vector<double> initial;
    std::vector<BetaParams> prior_reward;           // per pair
    std::vector<DirichletParams> prior_transition;  // per pair, over S

    /// Uniform ρ, Beta(beta_a, beta_b) rewards, Dirichlet(dirichlet, ..., dirichlet) rows.
    static TabularMDPSpec uniform(std::size_t states, std::size_t actions, std::size_t horizon,
                                  double dirichlet, double beta_a = 1.0, double beta_b = 1.0);

    /// Shapes plus the prior floors: Beta components ≥ 1, Dirichlet components ≥ 2/S.
    void validate() const;
};

/// Time-indexed deterministic policy; action(t, s) for t < horizon.
struct Policy {
    std::size_t horizon = 0;
    std::size_t num_states = 0;
    std::vector<std::size_t> actions;

    std::size_t action(std::size_t t, std::size_t s) const { return actions[t * num_states + s]; }
    std::size_t& action(std::size_t t, std::size_t s) { return actions[t * num_states + s]; }
    friend bool operator==(const Policy&, const Policy&) = default;
};

/// Policy plus its value table V_t(s), t = 0..horizon, stored row-major.
struct Plan {
    Policy policy;
    std::vector<double> values;

    double value(std::size_t t, std::size_t s) const { return values[t * policy.num_states + s]; }
};

struct Transition {
    std::size_t state = 0;
    std::size_t action = 0;
    int reward = 0;
    std::size_t next_state = 0;
};

using Trajectory = std::vector<Transition>;

struct TabularPosterior {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    std::vector<BetaParams> reward;
    std::vector<DirichletParams> transition;
    std::vector<std::int64_t> visits;

    static TabularPosterior from_spec(const TabularMDPSpec& spec);
    std::size_t pair(std::size_t s, std::size_t a) const noexcept { return s * num_actions + a; }
    /// Posterior-mean model with the horizon and ρ of `spec`.
    TabularMDPModel mean_model(const TabularMDPSpec& spec) const;

    friend bool operator==(const TabularPosterior&, const TabularPosterior&) = default;
};

/// An environment drawn once per replication, with its optimal value cached.
struct TabularEnv {
    TabularMDPModel model;
    double optimal_value = 0.0;

    static TabularEnv from_model(TabularMDPModel model);
};

struct DecompositionSides {
    double lhs = 0.0;
    double rhs = 0.0;
};

struct UcbOptions {
    double delta = 0.1;
    /// Forces the δ → 1 limit: no bonuses, no unknown pairs.
    bool disable_bonuses = false;
};

struct EpisodeOutcome {
    Trajectory trajectory;
    StepRecord record;
    /// Steps of the episode taken at pairs with fewer than τ−1 (resp. τ−3) prior visits.
    std::int64_t under_visited_conf = 0;
    std::int64_t under_visited_eps = 0;
};

/// Independent Beta / Dirichlet draws; rewards for every pair first, then rows.
TabularMDPModel sample_mdp(Rng& rng, const TabularPosterior& posterior, const TabularMDPSpec& spec);

/// Backward induction with lowest-index tie breaking.
Plan solve_finite_horizon(const TabularMDPModel& model);

/// Backward induction with additive per-pair bonuses and the clip Q_t ≤ τ − t.
/// Pairs flagged in `unknown` (may be empty) take the clip value directly.
Plan optimistic_backward_induction(const TabularMDPModel& model, std::span<const double> bonus,
                                   std::span<const char> unknown);

/// V_{μ,t}(s) for t = 0..horizon.
std::vector<double> policy_values(const TabularMDPModel& model, const Policy& policy);

/// Distribution of s_t under ρ and the policy, t = 0..horizon−1, row-major.
std::vector<double> state_occupancy(const TabularMDPModel& model, const Policy& policy);

/// V̄_μ = E[V_{μ,0}(s₀)] via forward occupancy propagation.
double evaluate_policy(const TabularMDPModel& model, const Policy& policy);

/// lhs = V̄^{M̂}_μ − V̄^M_μ, rhs = sum of on-policy Bellman errors under M's occupancy.
DecompositionSides bellman_error_decomposition(const TabularMDPModel& model_hat, const TabularMDPModel& model_true,
                                               const Policy& policy);

/// One episode in `model` under `policy`.
Trajectory rollout(Rng& rng, const TabularMDPModel& model, const Policy& policy);

/// Conjugate counts update; out-of-range indices throw DomainError.
TabularPosterior update_posterior(TabularPosterior posterior, const Trajectory& trajectory);

/// Σ over pairs of Beta entropy reduction, then Σ over pairs of Dirichlet entropy reduction.
double episode_info_gain(const TabularPosterior& before, const TabularPosterior& after);

/// Optimistic plan from the current posterior.
Plan ucb_policy(const TabularPosterior& posterior, const TabularMDPSpec& spec, const UcbOptions& options);

/// Γ^R = sqrt(24 log(2/δ)) and Γ^P = τ sqrt(24 log(8 S A τ / δ)).
double reward_width_constant(double delta);
double transition_width_constant(std::size_t states, std::size_t actions, std::size_t horizon, double delta);

/// Γ = 4(τ+1) sqrt(6 τ log(8 S A τ / δ)).
double regret_rate(std::size_t states, std::size_t actions, std::size_t horizon, double delta);

/// PSRL: sample, plan, act, update. `posterior` is replaced by the updated posterior.
EpisodeOutcome psrl_episode(Rng& rng, TabularPosterior& posterior, const TabularMDPSpec& spec,
                            const TabularEnv& env);

/// Bonus-based optimistic planning, act, update.
EpisodeOutcome ucb_episode(Rng& rng, TabularPosterior& posterior, const TabularMDPSpec& spec,
                           const TabularEnv& env, const UcbOptions& options);

/// Exact regret V̄*(env) − V̄^μ(env), with rounding noise below 1e-12 clipped to zero.
double policy_regret(const TabularEnv& env, const Policy& policy);

}  // namespace itcb::tabular
