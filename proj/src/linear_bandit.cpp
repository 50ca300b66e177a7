#include "itcb/linear_bandit.hpp"

#include <cmath>
#include <string>

#include "itcb/errors.hpp"
#include "itcb/info_theory.hpp"
#include "itcb/special_functions.hpp"

namespace itcb::linear {

namespace {

constexpr double kNormSlack = 1e-12;

std::size_t argmax_lowest(const std::vector<double>& score) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < score.size(); ++i) {
        if (score[i] > score[best]) best = i;
    }
    return best;
}

void require_actions(const std::vector<Eigen::VectorXd>& actions) {
    if (actions.empty()) throw DomainError("linear bandit: empty action set");
}

}  // namespace

void LinearBanditEnv::validate() const {
    require_actions(actions);
    for (std::size_t i = 0; i < actions.size(); ++i) {
        if (actions[i].size() != theta.size()) {
            throw DomainError("LinearBanditEnv: action " + std::to_string(i) + " has wrong dimension");
        }
        if (actions[i].norm() > 1.0 + kNormSlack) {
            throw DomainError("LinearBanditEnv: action " + std::to_string(i) + " has norm above 1");
        }
    }
    if (!(noise_std > 0.0)) throw DomainError("LinearBanditEnv: noise_std must be positive");
}

std::size_t LinearBanditEnv::best_action() const {
    std::vector<double> score(actions.size());
    for (std::size_t i = 0; i < actions.size(); ++i) score[i] = mean_reward(i);
    return argmax_lowest(score);
}

std::vector<Eigen::VectorXd> random_unit_actions(Rng& rng, std::size_t d, std::size_t count) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(count);
    while (out.size() < count) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(d));
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
        const double n = v.norm();
        if (n > 0.0) out.push_back(v / n);
    }
    return out;
}

GaussianBelief posterior_update(const GaussianBelief& belief, const Eigen::VectorXd& a, double y,
                                double noise_var) {
    if (!(noise_var > 0.0)) throw DomainError("posterior_update: noise variance must be positive");
    if (a.size() != belief.mu.size()) throw DomainError("posterior_update: action dimension mismatch");
    if (a.isZero(0.0)) return belief;

    const Eigen::VectorXd s = belief.cov * a;
    const double q = a.dot(s) + noise_var;
    if (!(q > 0.0) || !std::isfinite(q)) throw NumericalError("posterior_update: degenerate innovation variance");

    GaussianBelief next;
    next.mu = belief.mu + s * ((y - a.dot(belief.mu)) / q);
    Eigen::MatrixXd cov = belief.cov - (s * s.transpose()) / q;
    next.cov = 0.5 * (cov + cov.transpose());
    return next;
}

std::size_t ts_select(Rng& rng, const GaussianBelief& belief, const std::vector<Eigen::VectorXd>& actions) {
    require_actions(actions);
    const Eigen::VectorXd sample = sample_gaussian_vec(rng, belief.mu, belief.cov);
    std::vector<double> score(actions.size());
    for (std::size_t i = 0; i < actions.size(); ++i) score[i] = sample.dot(actions[i]);
    return argmax_lowest(score);
}

double max_action_variance(const GaussianBelief& belief, const std::vector<Eigen::VectorXd>& actions) {
    require_actions(actions);
    double best = 0.0;
    for (const auto& a : actions) best = std::max(best, a.dot(belief.cov * a));
    return best;
}

double it_ucb_width(const GaussianBelief& belief, const std::vector<Eigen::VectorXd>& actions, double noise_var,
                    double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("it_ucb_width: delta must lie in (0, 1)");
    if (!(noise_var > 0.0)) throw DomainError("it_ucb_width: noise variance must be positive");
    const double var_max = max_action_variance(belief, actions);
    const double ratio = var_max > 0.0 ? var_max / std::log1p(var_max / noise_var) : noise_var;
    const double log_term = std::log(4.0 * static_cast<double>(actions.size()) / delta);
    return 4.0 * std::sqrt(ratio * log_term);
}

std::size_t ucb_select(const GaussianBelief& belief, const std::vector<Eigen::VectorXd>& actions, double noise_var,
                       double delta) {
    const double gamma = it_ucb_width(belief, actions, noise_var, delta);
    std::vector<double> score(actions.size());
    for (std::size_t i = 0; i < actions.size(); ++i) {
        const double info = gaussian_linear_mi(belief.cov, actions[i], noise_var);
        score[i] = belief.mu.dot(actions[i]) + 0.5 * gamma * std::sqrt(info);
    }
    return argmax_lowest(score);
}

LinearRun run_linear_experiment(const LinearConfig& config, Rng& rng) {
    if (config.dim == 0) throw ConfigError("dim", "must be positive");
    if (config.num_actions == 0) throw ConfigError("num_actions", "must be positive");
    if (!(config.noise_std > 0.0)) throw ConfigError("noise_std", "must be positive");
    if (!(config.prior_var >= 0.0)) throw ConfigError("prior_var", "must be nonnegative");

    const auto d = static_cast<Eigen::Index>(config.dim);
    const double noise_var = config.noise_std * config.noise_std;
    const double horizon = static_cast<double>(std::max<std::size_t>(config.periods, 2));
    // δ = 1/L for reported widths; L < 2 would leave (0, 1).
    const double report_delta = 1.0 / horizon;
    const double agent_delta = config.delta > 0.0 ? config.delta : report_delta;

    LinearRun run;
    run.prior.mu = Eigen::VectorXd::Constant(d, config.prior_mean);
    run.prior.cov = Eigen::MatrixXd::Identity(d, d) * config.prior_var;
    run.env.theta = sample_gaussian_vec(rng, run.prior.mu, run.prior.cov);
    run.env.actions = random_unit_actions(rng, config.dim, config.num_actions);
    run.env.noise_std = config.noise_std;
    run.env.validate();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> prior_eig(run.prior.cov, Eigen::EigenvaluesOnly);
    run.lambda_max = std::max(0.0, prior_eig.eigenvalues().maxCoeff());

    double lo = run.env.mean_reward(0);
    double hi = lo;
    for (std::size_t i = 1; i < run.env.actions.size(); ++i) {
        lo = std::min(lo, run.env.mean_reward(i));
        hi = std::max(hi, run.env.mean_reward(i));
    }
    run.reward_range = hi - lo;
    run.prop_gamma = it_ucb_width(run.prior, run.env.actions, noise_var, report_delta);

    const std::size_t best = run.env.best_action();
    const double best_reward = run.env.mean_reward(best);

    Eigen::MatrixXd design = Eigen::MatrixXd::Zero(d, d);
    GaussianBelief belief = run.prior;
    run.steps.reserve(config.periods);
    for (std::size_t period = 1; period <= config.periods; ++period) {
        StepRecord rec;
        rec.period = static_cast<std::int64_t>(period);
        rec.width = it_ucb_width(belief, run.env.actions, noise_var, report_delta);

        const std::size_t choice = config.agent == Agent::ThompsonSampling
                                       ? ts_select(rng, belief, run.env.actions)
                                       : ucb_select(belief, run.env.actions, noise_var, agent_delta);
        const Eigen::VectorXd& a = run.env.actions[choice];
        const double y = run.env.mean_reward(choice) + config.noise_std * rng.normal();

        rec.action = static_cast<std::int64_t>(choice);
        rec.outcome = y;
        rec.regret = best_reward - run.env.mean_reward(choice);
        rec.info_gain = gaussian_linear_mi(belief.cov, a, noise_var);
        rec.budget = linear_bandit_info_budget(config.dim, run.lambda_max, static_cast<double>(period), noise_var);
        run.steps.push_back(rec);

        design.noalias() += a * a.transpose() / noise_var;
        belief = posterior_update(belief, a, y, noise_var);
    }
    run.final_belief = belief;

    // det(Σ₁ Σ_{L+1}^{-1}) = det(I + Σ₁^{1/2} V Σ₁^{1/2}), evaluated without the update path.
    const Eigen::MatrixXd root = symmetric_sqrt(run.prior.cov);
    const Eigen::MatrixXd inner =
        Eigen::MatrixXd::Identity(d, d) + root * design * root;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (inner + inner.transpose()), Eigen::EigenvaluesOnly);
    run.logdet_gain = 0.5 * eig.eigenvalues().array().log().sum();
    return run;
}

double regret_bound(const LinearRun& run, std::size_t periods, double noise_var) {
    const double budget = linear_bandit_info_budget(static_cast<std::size_t>(run.prior.mu.size()), run.lambda_max,
                                                    static_cast<double>(periods), noise_var);
    return run.prop_gamma * std::sqrt(static_cast<double>(periods) * budget) + run.reward_range;
}

}  // namespace itcb::linear
