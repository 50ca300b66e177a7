#include "itcb/factored_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "itcb/errors.hpp"
#include "itcb/special_functions.hpp"

namespace itcb::factored {

namespace {

std::size_t product(const std::vector<std::size_t>& sizes) {
    std::size_t p = 1;
    for (std::size_t s : sizes) p *= s;
    return p;
}

// Row-major encoding of the listed coordinates of `coords`.
std::size_t encode_scope(const FactoredSpec& spec, const std::vector<std::size_t>& coords, const Scope& scope) {
    std::size_t idx = 0;
    for (std::size_t c : scope) idx = idx * spec.coord_size(c) + coords[c];
    return idx;
}

// Row-major decoding of a flattened state into its factor values.
std::vector<std::size_t> decode_state(const FactoredSpec& spec, std::size_t s) {
    std::vector<std::size_t> out(spec.state_sizes.size());
    for (std::size_t j = spec.state_sizes.size(); j-- > 0;) {
        out[j] = s % spec.state_sizes[j];
        s /= spec.state_sizes[j];
    }
    return out;
}

void check_scopes(const FactoredSpec& spec, const std::vector<Scope>& scopes, const char* what) {
    for (const auto& z : scopes) {
        if (!std::is_sorted(z.begin(), z.end()) || std::adjacent_find(z.begin(), z.end()) != z.end()) {
            throw DomainError(std::string("FactoredSpec: ") + what + " scope must be sorted without repeats");
        }
        for (std::size_t c : z) {
            if (c >= spec.num_coords()) throw DomainError(std::string("FactoredSpec: ") + what + " scope out of range");
        }
    }
}

FactoredEpisode finish_episode(Rng& rng, FactoredPosterior& posterior, const FactoredSpec& spec,
                               const FactoredEnv& env, const tabular::Policy& policy) {
    FactoredEpisode out;
    out.trajectory = rollout_factored(rng, spec, env.model, policy);
    FactoredPosterior next = update_factored_posterior(posterior, out.trajectory, spec);
    out.record.info_gain = factored_info_gain(posterior, next);
    posterior = std::move(next);
    out.record.regret = env.reward_scale * tabular::policy_regret(env.flat, policy);
    out.record.action = out.trajectory.empty() ? 0 : static_cast<std::int64_t>(out.trajectory.front().action);
    double ret = 0.0;
    for (const auto& step : out.trajectory) {
        for (int r : step.rewards) ret += r;
    }
    out.record.outcome = ret;
    return out;
}

}  // namespace

FactoredSpec FactoredSpec::with_default_priors(std::vector<std::size_t> state_sizes,
                                               std::vector<std::size_t> action_sizes,
                                               std::vector<Scope> reward_scopes,
                                               std::vector<Scope> transition_scopes, std::size_t horizon) {
    FactoredSpec spec;
    spec.state_sizes = std::move(state_sizes);
    spec.action_sizes = std::move(action_sizes);
    spec.reward_scopes = std::move(reward_scopes);
    spec.transition_scopes = std::move(transition_scopes);
    spec.horizon = horizon;
    check_scopes(spec, spec.reward_scopes, "reward");
    check_scopes(spec, spec.transition_scopes, "transition");
    const std::size_t S = spec.num_states();
    spec.initial.assign(S, 1.0 / static_cast<double>(S));
    for (const auto& z : spec.reward_scopes) {
        spec.prior_reward.emplace_back(spec.scope_size(z), BetaParams{1.0, 1.0});
    }
    for (std::size_t j = 0; j < spec.transition_scopes.size(); ++j) {
        const std::size_t sj = spec.state_sizes.at(j);
        spec.prior_transition.emplace_back(spec.scope_size(spec.transition_scopes[j]),
                                           DirichletParams::uniform(sj, 2.0 / static_cast<double>(sj)));
    }
    return spec;
}

std::size_t FactoredSpec::coord_size(std::size_t i) const {
    return i < state_sizes.size() ? state_sizes[i] : action_sizes.at(i - state_sizes.size());
}

std::size_t FactoredSpec::num_states() const { return product(state_sizes); }
std::size_t FactoredSpec::num_actions() const { return product(action_sizes); }

std::size_t FactoredSpec::scope_size(const Scope& scope) const {
    std::size_t p = 1;
    for (std::size_t c : scope) p *= coord_size(c);
    return p;
}

std::size_t FactoredSpec::reward_domain() const {
    std::size_t d = 0;
    for (const auto& z : reward_scopes) d += scope_size(z);
    return d;
}

std::size_t FactoredSpec::transition_domain() const {
    std::size_t d = 0;
    for (const auto& z : transition_scopes) d += scope_size(z);
    return d;
}

std::size_t FactoredSpec::max_factor_size() const {
    std::size_t k = 0;
    for (std::size_t s : state_sizes) k = std::max(k, s);
    for (std::size_t s : action_sizes) k = std::max(k, s);
    return k;
}

std::size_t FactoredSpec::max_scope() const {
    std::size_t z = 0;
    for (const auto& s : reward_scopes) z = std::max(z, s.size());
    for (const auto& s : transition_scopes) z = std::max(z, s.size());
    return z;
}

void FactoredSpec::validate() const {
    if (state_sizes.empty()) throw DomainError("FactoredSpec: need at least one state factor");
    if (action_sizes.empty()) throw DomainError("FactoredSpec: need at least one action factor");
    for (std::size_t i = 0; i < num_coords(); ++i) {
        if (coord_size(i) == 0) throw DomainError("FactoredSpec: factor of size zero");
    }
    if (reward_scopes.empty()) throw DomainError("FactoredSpec: need at least one reward factor");
    if (transition_scopes.size() != state_sizes.size()) {
        throw DomainError("FactoredSpec: need exactly one transition scope per state factor");
    }
    check_scopes(*this, reward_scopes, "reward");
    check_scopes(*this, transition_scopes, "transition");
    if (prior_reward.size() != reward_scopes.size() || prior_transition.size() != transition_scopes.size()) {
        throw DomainError("FactoredSpec: prior arrays do not match the scopes");
    }
    for (std::size_t i = 0; i < reward_scopes.size(); ++i) {
        if (prior_reward[i].size() != scope_size(reward_scopes[i])) {
            throw DomainError("FactoredSpec: reward prior " + std::to_string(i) + " has wrong size");
        }
        for (const auto& b : prior_reward[i]) {
            if (b.a < 1.0 - 1e-12 || b.b < 1.0 - 1e-12) throw DomainError("FactoredSpec: Beta prior below 1");
        }
    }
    for (std::size_t j = 0; j < transition_scopes.size(); ++j) {
        if (prior_transition[j].size() != scope_size(transition_scopes[j])) {
            throw DomainError("FactoredSpec: transition prior " + std::to_string(j) + " has wrong size");
        }
        const double floor = 2.0 / static_cast<double>(state_sizes[j]);
        for (const auto& d : prior_transition[j]) {
            if (d.size() != state_sizes[j]) throw DomainError("FactoredSpec: Dirichlet prior has wrong length");
            for (double a : d.alpha()) {
                if (a < floor - 1e-12) throw DomainError("FactoredSpec: Dirichlet prior below 2/|S_j|");
            }
        }
    }
    if (initial.size() != num_states()) throw DomainError("FactoredSpec: initial distribution has wrong length");
}

std::vector<std::size_t> decode(const FactoredSpec& spec, std::size_t x) {
    const std::size_t total = spec.num_states() * spec.num_actions();
    if (x >= total) throw DomainError("decode: index out of range");
    std::vector<std::size_t> coords(spec.num_coords());
    for (std::size_t i = coords.size(); i-- > 0;) {
        coords[i] = x % spec.coord_size(i);
        x /= spec.coord_size(i);
    }
    return coords;
}

std::size_t scope_project(const FactoredSpec& spec, std::size_t x, const Scope& scope) {
    const auto coords = decode(spec, x);
    for (std::size_t c : scope) {
        if (c >= coords.size()) throw DomainError("scope_project: scope coordinate out of range");
    }
    return encode_scope(spec, coords, scope);
}

FactoredPosterior FactoredPosterior::from_spec(const FactoredSpec& spec) {
    return {spec.prior_reward, spec.prior_transition};
}

FactoredModel FactoredPosterior::mean_model() const {
    FactoredModel m;
    for (const auto& factor : reward) {
        auto& out = m.reward.emplace_back();
        for (const auto& b : factor) out.push_back(b.mean());
    }
    for (const auto& factor : transition) {
        auto& out = m.transition.emplace_back();
        for (const auto& d : factor) {
            const auto mean = d.mean();
            out.insert(out.end(), mean.begin(), mean.end());
        }
    }
    return m;
}

tabular::TabularMDPModel flatten(const FactoredSpec& spec, const FactoredModel& model) {
    const std::size_t S = spec.num_states();
    const std::size_t A = spec.num_actions();
    if (S > spec.max_flat_states) {
        throw CapacityError("flatten: " + std::to_string(S) + " flattened states exceed the ceiling of " +
                            std::to_string(spec.max_flat_states));
    }
    if (model.reward.size() != spec.reward_scopes.size() || model.transition.size() != spec.transition_scopes.size()) {
        throw DomainError("flatten: model does not match spec");
    }
    const std::size_t n = spec.state_sizes.size();
    const double m = static_cast<double>(spec.reward_scopes.size());

    tabular::TabularMDPModel flat;
    flat.num_states = S;
    flat.num_actions = A;
    flat.horizon = spec.horizon;
    flat.initial = spec.initial;
    flat.reward.resize(S * A);
    flat.transition.resize(S * A * S);

    std::vector<std::vector<std::size_t>> next_coords(S);
    for (std::size_t s2 = 0; s2 < S; ++s2) next_coords[s2] = decode_state(spec, s2);

    std::vector<const double*> rows(n);
    for (std::size_t x = 0; x < S * A; ++x) {
        const auto coords = decode(spec, x);
        double r = 0.0;
        for (std::size_t i = 0; i < spec.reward_scopes.size(); ++i) {
            r += model.reward[i][encode_scope(spec, coords, spec.reward_scopes[i])];
        }
        flat.reward[x] = std::clamp(r, 0.0, m) / m;
        for (std::size_t j = 0; j < n; ++j) {
            rows[j] = model.transition[j].data() +
                      encode_scope(spec, coords, spec.transition_scopes[j]) * spec.state_sizes[j];
        }
        double* out = flat.transition.data() + x * S;
        for (std::size_t s2 = 0; s2 < S; ++s2) {
            double p = 1.0;
            for (std::size_t j = 0; j < n; ++j) p *= rows[j][next_coords[s2][j]];
            out[s2] = p;
        }
    }
    return flat;
}

FactoredModel sample_factored(Rng& rng, const FactoredPosterior& posterior, const FactoredSpec& spec) {
    FactoredModel m;
    for (const auto& factor : posterior.reward) {
        auto& out = m.reward.emplace_back();
        out.reserve(factor.size());
        for (const auto& b : factor) out.push_back(sample_beta(rng, b.a, b.b));
    }
    for (std::size_t j = 0; j < posterior.transition.size(); ++j) {
        auto& out = m.transition.emplace_back();
        out.reserve(posterior.transition[j].size() * spec.state_sizes[j]);
        for (const auto& d : posterior.transition[j]) {
            const Eigen::VectorXd row = sample_dirichlet(rng, d.alpha());
            out.insert(out.end(), row.begin(), row.end());
        }
    }
    return m;
}

FactoredPosterior update_factored_posterior(FactoredPosterior posterior, const FactoredTrajectory& trajectory,
                                            const FactoredSpec& spec) {
    const std::size_t S = spec.num_states();
    const std::size_t A = spec.num_actions();
    if (posterior.reward.size() != spec.reward_scopes.size() ||
        posterior.transition.size() != spec.transition_scopes.size()) {
        throw DomainError("update_factored_posterior: posterior does not match spec");
    }
    for (const auto& step : trajectory) {
        if (step.state >= S || step.action >= A || step.next_state >= S) {
            throw DomainError("update_factored_posterior: trajectory index out of range");
        }
        if (step.rewards.size() != spec.reward_scopes.size()) {
            throw DomainError("update_factored_posterior: step carries the wrong number of factor rewards");
        }
        const auto coords = decode(spec, step.state * A + step.action);
        for (std::size_t i = 0; i < spec.reward_scopes.size(); ++i) {
            posterior.reward[i][encode_scope(spec, coords, spec.reward_scopes[i])].observe(step.rewards[i] == 1);
        }
        const auto next = decode_state(spec, step.next_state);
        for (std::size_t j = 0; j < spec.transition_scopes.size(); ++j) {
            posterior.transition[j][encode_scope(spec, coords, spec.transition_scopes[j])].observe(next[j]);
        }
    }
    return posterior;
}

double factored_info_gain(const FactoredPosterior& before, const FactoredPosterior& after) {
    if (before.reward.size() != after.reward.size() || before.transition.size() != after.transition.size()) {
        throw DomainError("factored_info_gain: posterior shapes differ");
    }
    double gain = 0.0;
    for (std::size_t i = 0; i < before.reward.size(); ++i) {
        for (std::size_t k = 0; k < before.reward[i].size(); ++k) {
            if (before.reward[i][k] == after.reward[i][k]) continue;
            gain += beta_entropy(before.reward[i][k]) - beta_entropy(after.reward[i][k]);
        }
    }
    for (std::size_t j = 0; j < before.transition.size(); ++j) {
        for (std::size_t k = 0; k < before.transition[j].size(); ++k) {
            if (before.transition[j][k] == after.transition[j][k]) continue;
            gain += dirichlet_entropy(before.transition[j][k]) - dirichlet_entropy(after.transition[j][k]);
        }
    }
    return gain;
}

FactoredTrajectory rollout_factored(Rng& rng, const FactoredSpec& spec, const FactoredModel& model,
                                    const tabular::Policy& policy) {
    const std::size_t A = spec.num_actions();
    const std::size_t n = spec.state_sizes.size();
    FactoredTrajectory traj;
    if (policy.horizon != spec.horizon || policy.num_states != spec.num_states()) {
        throw DomainError("rollout_factored: policy shape does not match spec");
    }
    if (spec.horizon == 0) return traj;
    traj.reserve(spec.horizon);
    std::size_t s = sample_categorical(rng, spec.initial);
    for (std::size_t t = 0; t < spec.horizon; ++t) {
        FactoredStep step;
        step.state = s;
        step.action = policy.action(t, s);
        const auto coords = decode(spec, s * A + step.action);
        step.rewards.resize(spec.reward_scopes.size());
        for (std::size_t i = 0; i < spec.reward_scopes.size(); ++i) {
            const double mean = model.reward[i][encode_scope(spec, coords, spec.reward_scopes[i])];
            step.rewards[i] = rng.uniform() < mean ? 1 : 0;
        }
        std::size_t next = 0;
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t sj = spec.state_sizes[j];
            const std::size_t row = encode_scope(spec, coords, spec.transition_scopes[j]);
            const std::span<const double> probs(model.transition[j].data() + row * sj, sj);
            next = next * sj + sample_categorical(rng, probs);
        }
        step.next_state = next;
        traj.push_back(std::move(step));
        s = next;
    }
    return traj;
}

Width l1_width(const DirichletParams& p, std::size_t factor_size, double delta, std::size_t horizon) {
    if (!(delta > 0.0 && delta < 2.0)) throw DomainError("l1_width: delta must lie in (0, 2)");
    const double threshold = static_cast<double>(horizon) - 1.0;
    if (p.alpha_bar() < threshold) return {0.0, true};
    const double gamma = 4.0 * std::sqrt(6.0 * static_cast<double>(factor_size) * std::log(2.0 / delta));
    const std::size_t extra = horizon > 0 ? horizon - 1 : 0;
    return {gamma * std::sqrt(worst_case_obs_mi(p, extra)), false};
}

Width reward_width(const BetaParams& p, double delta, std::size_t horizon) {
    if (!(delta > 0.0 && delta < 2.0)) throw DomainError("reward_width: delta must lie in (0, 2)");
    const double threshold = static_cast<double>(horizon) - 1.0;
    if (p.total() < threshold) return {0.0, true};
    const double gamma = 2.0 * std::sqrt(6.0 * std::log(2.0 / delta));
    const std::size_t extra = horizon > 0 ? horizon - 1 : 0;
    return {gamma * std::sqrt(worst_case_obs_mi(p, extra)), false};
}

double regret_rate(const FactoredSpec& spec, double delta) {
    const double m = static_cast<double>(spec.reward_scopes.size());
    const double n = static_cast<double>(spec.transition_scopes.size());
    const double tau = static_cast<double>(spec.horizon);
    const double log_term = std::log(4.0 * static_cast<double>(spec.domain_total()) * tau / delta);
    const double gamma_r = 2.0 * std::sqrt(6.0 * log_term);
    const double gamma_p = 4.0 * std::sqrt(6.0 * static_cast<double>(spec.max_factor_size()) * log_term);
    return 2.0 * (gamma_r + m * tau * gamma_p) * std::sqrt((m + n) * tau);
}

double error_term_total(const FactoredSpec& spec) {
    const double m = static_cast<double>(spec.reward_scopes.size());
    const double tau = static_cast<double>(spec.horizon);
    return m * tau + tau * static_cast<double>(spec.reward_domain()) +
           2.0 * m * tau * tau * static_cast<double>(spec.transition_domain());
}

tabular::Plan factored_ucb_policy(const FactoredPosterior& posterior, const FactoredSpec& spec, double delta) {
    const tabular::TabularMDPModel mean = flatten(spec, posterior.mean_model());
    const std::size_t S = spec.num_states();
    const std::size_t A = spec.num_actions();
    const double m = static_cast<double>(spec.reward_scopes.size());
    const double tau = static_cast<double>(spec.horizon);

    // Widths per factor entry, computed once and shared by every pair that projects onto it.
    std::vector<std::vector<Width>> rw(spec.reward_scopes.size());
    for (std::size_t i = 0; i < rw.size(); ++i) {
        for (const auto& b : posterior.reward[i]) rw[i].push_back(reward_width(b, delta, spec.horizon));
    }
    std::vector<std::vector<Width>> pw(spec.transition_scopes.size());
    for (std::size_t j = 0; j < pw.size(); ++j) {
        for (const auto& d : posterior.transition[j]) {
            pw[j].push_back(l1_width(d, spec.state_sizes[j], delta, spec.horizon));
        }
    }

    std::vector<double> bonus(S * A, 0.0);
    std::vector<char> unknown(S * A, 0);
    for (std::size_t x = 0; x < S * A; ++x) {
        const auto coords = decode(spec, x);
        double reward_bonus = 0.0;
        double l1 = 0.0;
        bool flagged = false;
        for (std::size_t i = 0; i < rw.size(); ++i) {
            const Width& w = rw[i][encode_scope(spec, coords, spec.reward_scopes[i])];
            flagged |= w.unknown;
            reward_bonus += w.value;
        }
        for (std::size_t j = 0; j < pw.size(); ++j) {
            const Width& w = pw[j][encode_scope(spec, coords, spec.transition_scopes[j])];
            flagged |= w.unknown;
            l1 += w.value;
        }
        unknown[x] = flagged ? 1 : 0;
        // Unscaled bonus: reward widths plus mτ times the L1 transition width, then rescaled by 1/m.
        bonus[x] = (reward_bonus + m * tau * l1) / m;
    }
    return tabular::optimistic_backward_induction(mean, bonus, unknown);
}

FactoredEnv FactoredEnv::from_model(const FactoredSpec& spec, FactoredModel model) {
    FactoredEnv env;
    env.flat = tabular::TabularEnv::from_model(flatten(spec, model));
    env.model = std::move(model);
    env.reward_scale = static_cast<double>(spec.reward_scopes.size());
    return env;
}

FactoredEpisode factored_psrl_episode(Rng& rng, FactoredPosterior& posterior, const FactoredSpec& spec,
                                      const FactoredEnv& env) {
    const FactoredModel sampled = sample_factored(rng, posterior, spec);
    const tabular::Plan plan = tabular::solve_finite_horizon(flatten(spec, sampled));
    return finish_episode(rng, posterior, spec, env, plan.policy);
}

FactoredEpisode factored_ucb_episode(Rng& rng, FactoredPosterior& posterior, const FactoredSpec& spec,
                                     const FactoredEnv& env, double delta) {
    const tabular::Plan plan = factored_ucb_policy(posterior, spec, delta);
    return finish_episode(rng, posterior, spec, env, plan.policy);
}

}  // namespace itcb::factored
