#include "itcb/info_theory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "itcb/errors.hpp"
#include "itcb/special_functions.hpp"

namespace itcb {

namespace {

// ψ(x + 1) − log x, the per-category term of the single-draw MI.
double obs_term(double x) { return digamma(x + 1.0) - std::log(x); }

// Contribution of one coordinate to the Dirichlet entropy: ln Γ(α) − (α − 1) ψ(α).
double coord_entropy(double a) { return log_gamma(a) - (a - 1.0) * digamma(a); }

// Contribution of the total: −ln Γ(ᾱ) + (ᾱ − N) ψ(ᾱ).
double total_entropy(double abar, double n) { return -log_gamma(abar) + (abar - n) * digamma(abar); }

}  // namespace

DirichletParams::DirichletParams(std::vector<double> alpha) : alpha_(std::move(alpha)) {
    if (alpha_.empty()) throw DomainError("DirichletParams: need at least one category");
    for (double a : alpha_) {
        if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("DirichletParams: pseudo-counts must be positive");
    }
    alpha_bar_ = std::accumulate(alpha_.begin(), alpha_.end(), 0.0);
}

DirichletParams DirichletParams::uniform(std::size_t n, double value) {
    return DirichletParams(std::vector<double>(n, value));
}

void DirichletParams::observe(std::size_t category, double count) {
    if (category >= alpha_.size()) throw DomainError("DirichletParams::observe: category out of range");
    alpha_[category] += count;
    alpha_bar_ += count;
}

std::vector<double> DirichletParams::mean() const {
    std::vector<double> m(alpha_.size());
    for (std::size_t i = 0; i < alpha_.size(); ++i) m[i] = alpha_[i] / alpha_bar_;
    return m;
}

double gaussian_linear_mi(const Eigen::MatrixXd& cov, const Eigen::VectorXd& a, double noise_var) {
    if (!(noise_var > 0.0)) throw DomainError("gaussian_linear_mi: noise variance must be positive");
    const double var = std::max(0.0, a.dot(cov * a));
    return 0.5 * std::log1p(var / noise_var);
}

double dirichlet_obs_mi(const DirichletParams& p) {
    double acc = 0.0;
    for (double a : p.alpha()) acc += a * obs_term(a);
    const double abar = p.alpha_bar();
    return std::max(0.0, acc / abar - obs_term(abar));
}

double dirichlet_obs_mi(const BetaParams& p) { return dirichlet_obs_mi(p.as_dirichlet()); }

double dirichlet_mi_lower_bound(const DirichletParams& p) { return 1.0 / (6.0 * p.alpha_bar()); }

double dirichlet_entropy(const DirichletParams& p) {
    double acc = 0.0;
    for (double a : p.alpha()) acc += coord_entropy(a);
    return acc + total_entropy(p.alpha_bar(), static_cast<double>(p.size()));
}

double beta_entropy(const BetaParams& p) { return dirichlet_entropy(p.as_dirichlet()); }

double dirichlet_entropy_gain_sparse(const DirichletParams& p,
                                     std::span<const std::pair<std::size_t, std::int64_t>> counts) {
    const double n_cat = static_cast<double>(p.size());
    double total = 0.0;
    double gain = 0.0;
    for (const auto& [i, c] : counts) {
        if (c < 0) throw DomainError("dirichlet_entropy_gain: negative count");
        if (i >= p.size()) throw DomainError("dirichlet_entropy_gain: category out of range");
        if (c == 0) continue;
        const double a = p[i];
        gain += coord_entropy(a) - coord_entropy(a + static_cast<double>(c));
        total += static_cast<double>(c);
    }
    if (total == 0.0) return 0.0;
    const double abar = p.alpha_bar();
    return gain + total_entropy(abar, n_cat) - total_entropy(abar + total, n_cat);
}

double dirichlet_entropy_gain(const DirichletParams& p, std::span<const std::int64_t> counts) {
    if (counts.size() != p.size()) throw DomainError("dirichlet_entropy_gain: count vector has wrong length");
    std::vector<std::pair<std::size_t, std::int64_t>> sparse;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] < 0) throw DomainError("dirichlet_entropy_gain: negative count");
        if (counts[i] > 0) sparse.emplace_back(i, counts[i]);
    }
    return dirichlet_entropy_gain_sparse(p, sparse);
}

double beta_entropy_gain(const BetaParams& p, std::int64_t successes, std::int64_t failures) {
    const std::array<std::int64_t, 2> counts = {successes, failures};
    return dirichlet_entropy_gain(p.as_dirichlet(), counts);
}

double dirichlet_gain_bound(const DirichletParams& p, std::int64_t n) {
    return static_cast<double>(p.size()) * std::log(p.alpha_bar() + static_cast<double>(n));
}

double worst_case_obs_mi(const DirichletParams& p, std::size_t extra) {
    std::vector<double> alpha(p.alpha().begin(), p.alpha().end());
    std::vector<double> weighted(alpha.size());
    double sum_weighted = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        weighted[i] = alpha[i] * obs_term(alpha[i]);
        sum_weighted += weighted[i];
    }
    double abar = p.alpha_bar();
    for (std::size_t step = 0; step < extra; ++step) {
        // The total term is common to every candidate, so minimizing the MI is
        // minimizing the weighted sum after the increment.
        std::size_t best = 0;
        double best_value = 0.0;
        double best_weighted = 0.0;
        for (std::size_t k = 0; k < alpha.size(); ++k) {
            const double next = (alpha[k] + 1.0) * obs_term(alpha[k] + 1.0);
            const double value = sum_weighted - weighted[k] + next;
            if (k == 0 || value < best_value) {
                best = k;
                best_value = value;
                best_weighted = next;
            }
        }
        alpha[best] += 1.0;
        sum_weighted = best_value;
        weighted[best] = best_weighted;
        abar += 1.0;
    }
    return std::max(0.0, sum_weighted / abar - obs_term(abar));
}

double worst_case_obs_mi(const BetaParams& p, std::size_t extra) {
    return worst_case_obs_mi(p.as_dirichlet(), extra);
}

McEstimate mc_sequence_mi(Rng& rng, const DirichletParams& p, std::size_t n, std::size_t samples) {
    if (n == 0) throw DomainError("mc_sequence_mi: need at least one observation");
    if (samples == 0) throw DomainError("mc_sequence_mi: need at least one sample");

    std::vector<double> cdf(p.size());
    std::vector<std::size_t> draws(n);
    std::vector<std::pair<std::size_t, std::int64_t>> counts;
    counts.reserve(n);

    // Welford accumulation of the per-sample entropy reductions.
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        const Eigen::VectorXd prob = sample_dirichlet(rng, p.alpha());
        std::partial_sum(prob.begin(), prob.end(), cdf.begin());
        for (auto& d : draws) d = sample_from_cdf(rng, cdf);
        std::sort(draws.begin(), draws.end());
        counts.clear();
        for (std::size_t d : draws) {
            if (!counts.empty() && counts.back().first == d) {
                ++counts.back().second;
            } else {
                counts.emplace_back(d, 1);
            }
        }
        const double gain = dirichlet_entropy_gain_sparse(p, counts);
        const double delta = gain - mean;
        mean += delta / static_cast<double>(k + 1);
        m2 += delta * (gain - mean);
    }
    const double var = samples > 1 ? m2 / static_cast<double>(samples - 1) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(samples))};
}

std::vector<double> dirichlet_tail_exceedance(Rng& rng, const DirichletParams& p, std::span<const double> v,
                                              std::span<const double> thresholds, std::size_t draws) {
    if (v.size() != p.size()) throw DomainError("dirichlet_tail_exceedance: v has wrong length");
    if (draws == 0) throw DomainError("dirichlet_tail_exceedance: need at least one draw");
    double expected = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) expected += p[i] * v[i];
    expected /= p.alpha_bar();

    std::vector<std::size_t> hits(thresholds.size(), 0);
    for (std::size_t k = 0; k < draws; ++k) {
        const Eigen::VectorXd prob = sample_dirichlet(rng, p.alpha());
        double x = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) x += prob[static_cast<Eigen::Index>(i)] * v[i];
        for (std::size_t j = 0; j < thresholds.size(); ++j) {
            if (x - expected > thresholds[j]) ++hits[j];
        }
    }
    std::vector<double> freq(thresholds.size());
    for (std::size_t j = 0; j < thresholds.size(); ++j) {
        freq[j] = static_cast<double>(hits[j]) / static_cast<double>(draws);
    }
    return freq;
}

double linear_bandit_info_budget(std::size_t d, double lambda_max, double periods, double noise_var) {
    if (!(noise_var > 0.0)) throw DomainError("linear_bandit_info_budget: noise variance must be positive");
    return 0.5 * static_cast<double>(d) * std::log1p(lambda_max * periods / noise_var);
}

double tabular_info_budget(std::size_t states, std::size_t actions, double steps) {
    const double s = static_cast<double>(states);
    const double sa = s * static_cast<double>(actions);
    if (sa <= 0.0) throw DomainError("tabular_info_budget: empty state-action space");
    return (s + 2.0) * sa * std::log1p(steps / sa);
}

double factored_info_budget(std::size_t max_factor_size, std::size_t domain_total, double steps) {
    return static_cast<double>(max_factor_size) * static_cast<double>(domain_total) * std::log1p(steps);
}

}  // namespace itcb
