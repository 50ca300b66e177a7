#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "itcb/info_theory.hpp"
#include "itcb/records.hpp"
#include "itcb/rng.hpp"
#include "itcb/tabular_mdp.hpp"

namespace itcb::factored {

/// Sorted coordinate indices into X = S_1 × … × S_n × A_1 × … × A_k.
using Scope = std::vector<std::size_t>;

/// Structure and prior of a factored MDP.
///
/// Coordinates are encoded row-major with the first coordinate most
/// significant, state coordinates before action coordinates. With that
/// convention the full index of (s, a) equals the tabular pair index s·|A| + a.
struct FactoredSpec {
    std::vector<std::size_t> state_sizes;
    std::vector<std::size_t> action_sizes;
    std::vector<Scope> reward_scopes;      // m scopes
    std::vector<Scope> transition_scopes;  // one per state factor
    std::size_t horizon = 0;
    std::vector<double> initial;           // over flattened states
    std::vector<std::vector<BetaParams>> prior_reward;           // [i][x[Z^R_i]]
    std::vector<std::vector<DirichletParams>> prior_transition;  // [j][x[Z^P_j]] over S_j
    std::size_t max_flat_states = 4096;

    /// Uniform ρ, Beta(1, 1) rewards and Dirichlet(2/|S_j|) transition priors.
    static FactoredSpec with_default_priors(std::vector<std::size_t> state_sizes,
                                            std::vector<std::size_t> action_sizes,
                                            std::vector<Scope> reward_scopes,
                                            std::vector<Scope> transition_scopes, std::size_t horizon);

    std::size_t num_coords() const noexcept { return state_sizes.size() + action_sizes.size(); }
    std::size_t coord_size(std::size_t i) const;
    std::size_t num_states() const;
    std::size_t num_actions() const;
    /// |X[Z]|.
    std::size_t scope_size(const Scope& scope) const;
    std::size_t reward_domain() const;      // D_R
    std::size_t transition_domain() const;  // D_P
    std::size_t domain_total() const { return reward_domain() + transition_domain(); }
    /// K: largest |X_i| or |S_j|.
    std::size_t max_factor_size() const;
    /// ζ: largest scope cardinality.
    std::size_t max_scope() const;

    /// Scopes within range and sorted, prior shapes and floors; throws DomainError.
    void validate() const;
};

/// Per-factor mean rewards and transition rows.
struct FactoredModel {
    std::vector<std::vector<double>> reward;      // [i][x^R_i]
    std::vector<std::vector<double>> transition;  // [j][x^P_j * |S_j| + s_j]
};

struct FactoredPosterior {
    std::vector<std::vector<BetaParams>> reward;
    std::vector<std::vector<DirichletParams>> transition;

    static FactoredPosterior from_spec(const FactoredSpec& spec);
    FactoredModel mean_model() const;
    friend bool operator==(const FactoredPosterior&, const FactoredPosterior&) = default;
};

struct FactoredStep {
    std::size_t state = 0;
    std::size_t action = 0;
    std::vector<int> rewards;  // one per reward factor
    std::size_t next_state = 0;
};

using FactoredTrajectory = std::vector<FactoredStep>;

/// Coordinates of a full index x ∈ [0, |S||A|).
std::vector<std::size_t> decode(const FactoredSpec& spec, std::size_t x);

/// Index of x[Z] in X[Z]. Throws DomainError when x is out of range.
std::size_t scope_project(const FactoredSpec& spec, std::size_t x, const Scope& scope);

/// Tabular model on the flattened space. Rewards are Σ_i R_i rescaled by 1/m.
/// Throws CapacityError above spec.max_flat_states.
tabular::TabularMDPModel flatten(const FactoredSpec& spec, const FactoredModel& model);

/// Independent draws: every reward entry (factor by factor), then every transition row.
FactoredModel sample_factored(Rng& rng, const FactoredPosterior& posterior, const FactoredSpec& spec);

FactoredPosterior update_factored_posterior(FactoredPosterior posterior, const FactoredTrajectory& trajectory,
                                            const FactoredSpec& spec);

/// Σ reward-factor entropy reductions, then Σ transition-factor entropy reductions.
double factored_info_gain(const FactoredPosterior& before, const FactoredPosterior& after);

/// One episode in the factored environment, sampling each state factor separately.
FactoredTrajectory rollout_factored(Rng& rng, const FactoredSpec& spec, const FactoredModel& model,
                                    const tabular::Policy& policy);

struct Width {
    double value = 0.0;
    /// ᾱ < τ − 1: the confidence bound does not apply.
    bool unknown = false;
};

/// Γ^P_j sqrt(I_min) with Γ^P_j = 4 sqrt(6 |S_j| log(2/δ)).
Width l1_width(const DirichletParams& p, std::size_t factor_size, double delta, std::size_t horizon);

/// Γ^R sqrt(I_min) with Γ^R = 2 sqrt(6 log(2/δ)).
Width reward_width(const BetaParams& p, double delta, std::size_t horizon);

/// Γ = 2(Γ^R + mτΓ^P) sqrt((m+n)τ) with the constants over log(4Dτ/δ).
double regret_rate(const FactoredSpec& spec, double delta);

/// mτ + τ D_R + 2mτ² D_P, the summed error terms at δ = 1/L.
double error_term_total(const FactoredSpec& spec);

/// Optimistic plan on the flattened posterior-mean model (rescaled units).
tabular::Plan factored_ucb_policy(const FactoredPosterior& posterior, const FactoredSpec& spec, double delta);

struct FactoredEnv {
    FactoredModel model;
    tabular::TabularEnv flat;  // rescaled to [0, 1] rewards
    double reward_scale = 1.0;  // m

    static FactoredEnv from_model(const FactoredSpec& spec, FactoredModel model);
};

struct FactoredEpisode {
    FactoredTrajectory trajectory;
    StepRecord record;  // regret in unscaled reward units
};

FactoredEpisode factored_psrl_episode(Rng& rng, FactoredPosterior& posterior, const FactoredSpec& spec,
                                      const FactoredEnv& env);

FactoredEpisode factored_ucb_episode(Rng& rng, FactoredPosterior& posterior, const FactoredSpec& spec,
                                     const FactoredEnv& env, double delta);

}  // namespace itcb::factored
