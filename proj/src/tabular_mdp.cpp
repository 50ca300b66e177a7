#include "itcb/tabular_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "itcb/errors.hpp"
#include "itcb/special_functions.hpp"

namespace itcb::tabular {

namespace {

constexpr double kRowTolerance = 1e-10;
constexpr double kFloorSlack = 1e-12;

double dot(std::span<const double> a, const double* b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

void check_policy(const TabularMDPModel& model, const Policy& policy) {
    if (policy.horizon != model.horizon || policy.num_states != model.num_states ||
        policy.actions.size() != model.horizon * model.num_states) {
        throw DomainError("policy shape does not match model");
    }
    for (std::size_t a : policy.actions) {
        if (a >= model.num_actions) throw DomainError("policy action out of range");
    }
}

std::int64_t count_under(const TabularPosterior& posterior, const Trajectory& traj, std::int64_t threshold) {
    std::int64_t n = 0;
    for (const auto& step : traj) {
        if (posterior.visits[posterior.pair(step.state, step.action)] < threshold) ++n;
    }
    return n;
}

EpisodeOutcome finish_episode(Rng& rng, TabularPosterior& posterior, const TabularMDPSpec& spec,
                              const TabularEnv& env, const Policy& policy) {
    EpisodeOutcome out;
    out.trajectory = rollout(rng, env.model, policy);
    const auto tau = static_cast<std::int64_t>(spec.horizon);
    out.under_visited_conf = count_under(posterior, out.trajectory, tau - 1);
    out.under_visited_eps = count_under(posterior, out.trajectory, tau - 3);

    TabularPosterior next = update_posterior(posterior, out.trajectory);
    out.record.info_gain = episode_info_gain(posterior, next);
    posterior = std::move(next);

    out.record.regret = policy_regret(env, policy);
    out.record.action = out.trajectory.empty() ? 0 : static_cast<std::int64_t>(out.trajectory.front().action);
    double ret = 0.0;
    for (const auto& step : out.trajectory) ret += step.reward;
    out.record.outcome = ret;
    return out;
}

}  // namespace

void TabularMDPModel::validate() const {
    const std::size_t pairs = num_pairs();
    if (num_states == 0 || num_actions == 0) throw DomainError("TabularMDPModel: empty state or action space");
    if (reward.size() != pairs || transition.size() != pairs * num_states || initial.size() != num_states) {
        throw DomainError("TabularMDPModel: array sizes do not match S and A");
    }
    for (double r : reward) {
        if (!(r >= 0.0 && r <= 1.0)) throw DomainError("TabularMDPModel: mean reward outside [0, 1]");
    }
    for (std::size_t p = 0; p < pairs; ++p) {
        double sum = 0.0;
        for (std::size_t s = 0; s < num_states; ++s) {
            const double v = transition[p * num_states + s];
            if (v < 0.0) throw DomainError("TabularMDPModel: negative transition probability");
            sum += v;
        }
        if (std::abs(sum - 1.0) > kRowTolerance) throw DomainError("TabularMDPModel: transition row does not sum to 1");
    }
    const double rho = std::accumulate(initial.begin(), initial.end(), 0.0);
    if (std::abs(rho - 1.0) > kRowTolerance) throw DomainError("TabularMDPModel: initial distribution does not sum to 1");
}

TabularMDPSpec TabularMDPSpec::uniform(std::size_t states, std::size_t actions, std::size_t horizon,
                                       double dirichlet, double beta_a, double beta_b) {
    TabularMDPSpec spec;
    spec.num_states = states;
    spec.num_actions = actions;
    spec.horizon = horizon;
    spec.initial.assign(states, states ? 1.0 / static_cast<double>(states) : 0.0);
    spec.prior_reward.assign(states * actions, BetaParams{beta_a, beta_b});
    spec.prior_transition.assign(states * actions, DirichletParams::uniform(states, dirichlet));
    return spec;
}

void TabularMDPSpec::validate() const {
    if (num_states == 0 || num_actions == 0) throw DomainError("TabularMDPSpec: empty state or action space");
    const std::size_t pairs = num_states * num_actions;
    if (prior_reward.size() != pairs || prior_transition.size() != pairs || initial.size() != num_states) {
        throw DomainError("TabularMDPSpec: prior arrays do not match S and A");
    }
    for (const auto& b : prior_reward) {
        if (b.a < 1.0 - kFloorSlack || b.b < 1.0 - kFloorSlack) {
            throw DomainError("TabularMDPSpec: Beta prior components must be at least 1");
        }
    }
    const double floor = 2.0 / static_cast<double>(num_states);
    for (const auto& d : prior_transition) {
        if (d.size() != num_states) throw DomainError("TabularMDPSpec: Dirichlet prior has wrong length");
        for (double a : d.alpha()) {
            if (a < floor - kFloorSlack) throw DomainError("TabularMDPSpec: Dirichlet prior components must be at least 2/S");
        }
    }
    double rho = 0.0;
    for (double v : initial) {
        if (v < 0.0) throw DomainError("TabularMDPSpec: negative initial probability");
        rho += v;
    }
    if (std::abs(rho - 1.0) > kRowTolerance) throw DomainError("TabularMDPSpec: initial distribution does not sum to 1");
}

TabularPosterior TabularPosterior::from_spec(const TabularMDPSpec& spec) {
    TabularPosterior p;
    p.num_states = spec.num_states;
    p.num_actions = spec.num_actions;
    p.reward = spec.prior_reward;
    p.transition = spec.prior_transition;
    p.visits.assign(spec.num_states * spec.num_actions, 0);
    return p;
}

TabularMDPModel TabularPosterior::mean_model(const TabularMDPSpec& spec) const {
    TabularMDPModel m;
    m.num_states = num_states;
    m.num_actions = num_actions;
    m.horizon = spec.horizon;
    m.initial = spec.initial;
    m.reward.resize(reward.size());
    m.transition.resize(transition.size() * num_states);
    for (std::size_t p = 0; p < reward.size(); ++p) {
        m.reward[p] = reward[p].mean();
        const auto mean = transition[p].mean();
        std::copy(mean.begin(), mean.end(), m.transition.begin() + static_cast<std::ptrdiff_t>(p * num_states));
    }
    return m;
}

TabularEnv TabularEnv::from_model(TabularMDPModel model) {
    TabularEnv env;
    env.model = std::move(model);
    env.optimal_value = evaluate_policy(env.model, solve_finite_horizon(env.model).policy);
    return env;
}

TabularMDPModel sample_mdp(Rng& rng, const TabularPosterior& posterior, const TabularMDPSpec& spec) {
    TabularMDPModel m;
    m.num_states = posterior.num_states;
    m.num_actions = posterior.num_actions;
    m.horizon = spec.horizon;
    m.initial = spec.initial;
    m.reward.resize(posterior.reward.size());
    for (std::size_t p = 0; p < posterior.reward.size(); ++p) {
        m.reward[p] = sample_beta(rng, posterior.reward[p].a, posterior.reward[p].b);
    }
    m.transition.resize(posterior.transition.size() * m.num_states);
    for (std::size_t p = 0; p < posterior.transition.size(); ++p) {
        const Eigen::VectorXd row = sample_dirichlet(rng, posterior.transition[p].alpha());
        std::copy(row.begin(), row.end(), m.transition.begin() + static_cast<std::ptrdiff_t>(p * m.num_states));
    }
    return m;
}

Plan optimistic_backward_induction(const TabularMDPModel& model, std::span<const double> bonus,
                                   std::span<const char> unknown) {
    const std::size_t S = model.num_states;
    const std::size_t A = model.num_actions;
    const std::size_t tau = model.horizon;
    const bool clip = !bonus.empty() || !unknown.empty();
    if (!bonus.empty() && bonus.size() != model.num_pairs()) throw DomainError("bonus array has wrong length");
    if (!unknown.empty() && unknown.size() != model.num_pairs()) throw DomainError("unknown mask has wrong length");

    Plan plan;
    plan.policy.horizon = tau;
    plan.policy.num_states = S;
    plan.policy.actions.assign(tau * S, 0);
    plan.values.assign((tau + 1) * S, 0.0);
    for (std::size_t t = tau; t-- > 0;) {
        const double* next = plan.values.data() + (t + 1) * S;
        const double cap = static_cast<double>(tau - t);
        for (std::size_t s = 0; s < S; ++s) {
            std::size_t best_a = 0;
            double best_q = 0.0;
            for (std::size_t a = 0; a < A; ++a) {
                const std::size_t p = model.pair(s, a);
                double q;
                if (!unknown.empty() && unknown[p]) {
                    q = cap;
                } else {
                    q = model.reward[p] + dot(model.row(s, a), next);
                    if (!bonus.empty()) q += bonus[p];
                    if (clip) q = std::min(q, cap);
                }
                if (a == 0 || q > best_q) {
                    best_a = a;
                    best_q = q;
                }
            }
            plan.policy.action(t, s) = best_a;
            plan.values[t * S + s] = best_q;
        }
    }
    return plan;
}

Plan solve_finite_horizon(const TabularMDPModel& model) { return optimistic_backward_induction(model, {}, {}); }

std::vector<double> policy_values(const TabularMDPModel& model, const Policy& policy) {
    check_policy(model, policy);
    const std::size_t S = model.num_states;
    std::vector<double> v((model.horizon + 1) * S, 0.0);
    for (std::size_t t = model.horizon; t-- > 0;) {
        const double* next = v.data() + (t + 1) * S;
        for (std::size_t s = 0; s < S; ++s) {
            const std::size_t a = policy.action(t, s);
            v[t * S + s] = model.reward[model.pair(s, a)] + dot(model.row(s, a), next);
        }
    }
    return v;
}

std::vector<double> state_occupancy(const TabularMDPModel& model, const Policy& policy) {
    check_policy(model, policy);
    const std::size_t S = model.num_states;
    std::vector<double> occ(model.horizon * S, 0.0);
    if (model.horizon == 0) return occ;
    std::copy(model.initial.begin(), model.initial.end(), occ.begin());
    for (std::size_t t = 0; t + 1 < model.horizon; ++t) {
        for (std::size_t s = 0; s < S; ++s) {
            const double mass = occ[t * S + s];
            if (mass == 0.0) continue;
            const auto row = model.row(s, policy.action(t, s));
            for (std::size_t s2 = 0; s2 < S; ++s2) occ[(t + 1) * S + s2] += mass * row[s2];
        }
    }
    return occ;
}

double evaluate_policy(const TabularMDPModel& model, const Policy& policy) {
    const auto occ = state_occupancy(model, policy);
    const std::size_t S = model.num_states;
    double total = 0.0;
    for (std::size_t t = 0; t < model.horizon; ++t) {
        for (std::size_t s = 0; s < S; ++s) {
            total += occ[t * S + s] * model.reward[model.pair(s, policy.action(t, s))];
        }
    }
    return total;
}

DecompositionSides bellman_error_decomposition(const TabularMDPModel& model_hat, const TabularMDPModel& model_true,
                                               const Policy& policy) {
    if (model_hat.num_states != model_true.num_states || model_hat.num_actions != model_true.num_actions ||
        model_hat.horizon != model_true.horizon || model_hat.initial != model_true.initial) {
        throw DomainError("bellman_error_decomposition: models do not share S, A, horizon and initial distribution");
    }
    DecompositionSides out;
    out.lhs = evaluate_policy(model_hat, policy) - evaluate_policy(model_true, policy);

    const std::size_t S = model_true.num_states;
    const auto occ = state_occupancy(model_true, policy);
    const auto v_hat = policy_values(model_hat, policy);
    double rhs = 0.0;
    for (std::size_t t = 0; t < model_true.horizon; ++t) {
        const double* next = v_hat.data() + (t + 1) * S;
        for (std::size_t s = 0; s < S; ++s) {
            const double mass = occ[t * S + s];
            if (mass == 0.0) continue;
            const std::size_t a = policy.action(t, s);
            const std::size_t p = model_true.pair(s, a);
            const auto row_hat = model_hat.row(s, a);
            const auto row_true = model_true.row(s, a);
            double err = model_hat.reward[p] - model_true.reward[p];
            for (std::size_t s2 = 0; s2 < S; ++s2) err += (row_hat[s2] - row_true[s2]) * next[s2];
            rhs += mass * err;
        }
    }
    out.rhs = rhs;
    return out;
}

Trajectory rollout(Rng& rng, const TabularMDPModel& model, const Policy& policy) {
    check_policy(model, policy);
    Trajectory traj;
    traj.reserve(model.horizon);
    if (model.horizon == 0) return traj;
    std::size_t s = sample_categorical(rng, model.initial);
    for (std::size_t t = 0; t < model.horizon; ++t) {
        Transition step;
        step.state = s;
        step.action = policy.action(t, s);
        step.reward = rng.uniform() < model.reward[model.pair(s, step.action)] ? 1 : 0;
        step.next_state = sample_categorical(rng, model.row(s, step.action));
        traj.push_back(step);
        s = step.next_state;
    }
    return traj;
}

TabularPosterior update_posterior(TabularPosterior posterior, const Trajectory& trajectory) {
    for (const auto& step : trajectory) {
        if (step.state >= posterior.num_states || step.action >= posterior.num_actions ||
            step.next_state >= posterior.num_states) {
            throw DomainError("update_posterior: trajectory index out of range");
        }
        if (step.reward != 0 && step.reward != 1) throw DomainError("update_posterior: reward must be 0 or 1");
        const std::size_t p = posterior.pair(step.state, step.action);
        posterior.reward[p].observe(step.reward == 1);
        posterior.transition[p].observe(step.next_state);
        ++posterior.visits[p];
    }
    return posterior;
}

double episode_info_gain(const TabularPosterior& before, const TabularPosterior& after) {
    if (before.reward.size() != after.reward.size() || before.transition.size() != after.transition.size()) {
        throw DomainError("episode_info_gain: posterior shapes differ");
    }
    double gain = 0.0;
    for (std::size_t p = 0; p < before.reward.size(); ++p) {
        if (before.reward[p] == after.reward[p]) continue;
        gain += beta_entropy(before.reward[p]) - beta_entropy(after.reward[p]);
    }
    for (std::size_t p = 0; p < before.transition.size(); ++p) {
        if (before.transition[p] == after.transition[p]) continue;
        gain += dirichlet_entropy(before.transition[p]) - dirichlet_entropy(after.transition[p]);
    }
    return gain;
}

double reward_width_constant(double delta) { return std::sqrt(24.0 * std::log(2.0 / delta)); }

double transition_width_constant(std::size_t states, std::size_t actions, std::size_t horizon, double delta) {
    const double sat = static_cast<double>(states * actions * horizon);
    return static_cast<double>(horizon) * std::sqrt(24.0 * std::log(8.0 * sat / delta));
}

double regret_rate(std::size_t states, std::size_t actions, std::size_t horizon, double delta) {
    const double tau = static_cast<double>(horizon);
    const double sat = static_cast<double>(states * actions * horizon);
    return 4.0 * (tau + 1.0) * std::sqrt(6.0 * tau * std::log(8.0 * sat / delta));
}

Plan ucb_policy(const TabularPosterior& posterior, const TabularMDPSpec& spec, const UcbOptions& options) {
    const TabularMDPModel mean = posterior.mean_model(spec);
    const std::size_t pairs = mean.num_pairs();
    if (options.disable_bonuses) return solve_finite_horizon(mean);
    if (!(options.delta > 0.0 && options.delta < 1.0)) throw DomainError("ucb_policy: delta must lie in (0, 1)");

    const double gamma_r = reward_width_constant(options.delta);
    const double gamma_p = transition_width_constant(spec.num_states, spec.num_actions, spec.horizon, options.delta);
    const double threshold = static_cast<double>(spec.horizon) - 1.0;
    const std::size_t extra = spec.horizon > 0 ? spec.horizon - 1 : 0;

    std::vector<double> bonus(pairs, 0.0);
    std::vector<char> unknown(pairs, 0);
    for (std::size_t p = 0; p < pairs; ++p) {
        const BetaParams& r = posterior.reward[p];
        const DirichletParams& d = posterior.transition[p];
        if (r.total() < threshold || d.alpha_bar() < threshold) {
            unknown[p] = 1;
            continue;
        }
        bonus[p] = gamma_r * std::sqrt(worst_case_obs_mi(r, extra)) + gamma_p * std::sqrt(worst_case_obs_mi(d, extra));
    }
    return optimistic_backward_induction(mean, bonus, unknown);
}

double policy_regret(const TabularEnv& env, const Policy& policy) {
    const double gap = env.optimal_value - evaluate_policy(env.model, policy);
    return std::abs(gap) < 1e-12 ? 0.0 : gap;
}

EpisodeOutcome psrl_episode(Rng& rng, TabularPosterior& posterior, const TabularMDPSpec& spec,
                            const TabularEnv& env) {
    const TabularMDPModel sampled = sample_mdp(rng, posterior, spec);
    const Plan plan = solve_finite_horizon(sampled);
    return finish_episode(rng, posterior, spec, env, plan.policy);
}

EpisodeOutcome ucb_episode(Rng& rng, TabularPosterior& posterior, const TabularMDPSpec& spec,
                           const TabularEnv& env, const UcbOptions& options) {
    const Plan plan = ucb_policy(posterior, spec, options);
    return finish_episode(rng, posterior, spec, env, plan.policy);
}

}  // namespace itcb::tabular
