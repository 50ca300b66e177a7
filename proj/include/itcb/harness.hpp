#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "itcb/factored_mdp.hpp"
#include "itcb/records.hpp"

namespace itcb::harness {

enum class ExperimentKind { Linear, Tabular, Factored, MiScaling };

std::string_view kind_name(ExperimentKind kind) noexcept;

/// One experiment, parsed from a flat key=value file. Keys that do not apply to
/// the chosen kind are rejected so that typos do not pass silently.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Linear;
    std::string name;  // value of the `experiment` CSV column; defaults to "<kind>_<agent>"
    Agent agent = Agent::ThompsonSampling;
    std::size_t periods = 0;
    std::size_t seeds = 1;
    std::uint64_t base_seed = 0;
    std::string output;
    /// Confidence parameter for the UCB agents; 0 means 1/L.
    double delta = 0.0;

    // linear
    std::size_t dim = 5;
    std::size_t num_actions = 30;
    double noise_std = 1.0;
    double prior_var = 1.0;

    // tabular, and factored with model=single
    std::size_t states = 5;
    std::size_t actions = 2;
    std::size_t horizon = 10;
    /// Dirichlet prior pseudo-count per category; 0 means 2/S.
    double dirichlet = 0.0;

    // factored
    std::string model = "ring";  // ring | single
    std::size_t ring_factors = 4;
    std::size_t factor_size = 3;
    std::size_t action_size = 3;
    std::size_t max_flat_states = 4096;

    // mi_scaling
    std::vector<std::size_t> categories{2, 8, 32, 128, 800};
    std::vector<std::size_t> observations{1, 10, 100, 1000};
    std::size_t samples = 100000;
    std::size_t fixed_n = 1;
    std::size_t fixed_categories = 800;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Parses key=value lines; `#` starts a comment. Throws ConfigError.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// The factored structure described by a factored config.
factored::FactoredSpec factored_spec(const ExperimentConfig& config);

/// Full result of one seeded replication.
struct Replication {
    std::uint64_t seed = 0;
    std::vector<StepRecord> steps;
    /// Γ of the regret bound, at δ = 1/L.
    double gamma = 0.0;
    /// Additive term of the bound: reward range B (linear) or summed error terms (MDPs).
    double additive = 0.0;
    double cum_regret = 0.0;
    double cum_info_gain = 0.0;
    double budget = 0.0;  // for all L periods
    /// Steps at pairs with fewer than τ−1 and τ−3 visits (tabular only).
    std::int64_t eps_conf = 0;
    std::int64_t eps_count = 0;
    /// Linear bandits: per-period MI total minus ½ log det(Σ₁ Σ_{L+1}^{-1}).
    double chain_rule_residual = 0.0;
};

/// Runs replication `index`, i.e. seed base_seed + index. Depends on nothing else.
Replication run_replication(const ExperimentConfig& config, std::size_t index);

/// All replications, fanned out over `jobs` threads. Output order is by seed.
std::vector<Replication> run_all(const ExperimentConfig& config, std::size_t jobs = 1);

inline constexpr const char* kCsvHeader =
    "experiment,seed,period,action,regret,cum_regret,info_gain,cum_info_gain,width_gamma,bound_budget";

/// %.17g formatting.
std::string format_double(double v);

void write_csv(std::ostream& out, const std::string& experiment, const std::vector<Replication>& runs);

struct BoundReport {
    std::string experiment;
    std::size_t seeds = 0;
    std::size_t periods = 0;
    double mean_cum_regret = 0.0;
    /// Γ sqrt(L · budget).
    double bound_leading = 0.0;
    /// Mean additive term; unavailable when the report is recomputed from a CSV.
    std::optional<double> bound_additive;
    double mean_cum_info_gain = 0.0;
    double max_cum_info_gain = 0.0;
    double info_budget = 0.0;
    /// Runs whose realized information exceeded the budget at some period.
    std::size_t budget_violations = 0;
    double first_half_regret = 0.0;   // mean over seeds
    double second_half_regret = 0.0;  // mean over seeds
    std::optional<std::int64_t> eps_conf;
    std::optional<std::int64_t> eps_count;

    double bound() const { return bound_leading + bound_additive.value_or(0.0); }
    /// Budget violated on some run, or (when the additive term is known) mean regret above the bound.
    bool flagged() const;
};

BoundReport summarize(const std::string& experiment, const std::vector<Replication>& runs);

/// Rebuilds the report from CSV text produced by write_csv. Throws ConfigError("csv", ...) on schema errors.
BoundReport report_from_csv(std::istream& in);

void write_report(std::ostream& out, const BoundReport& report);

struct MiCell {
    std::size_t categories = 0;
    std::size_t observations = 0;
    McEstimate mi;
};

struct MiScalingResult {
    std::vector<MiCell> cells;  // N sweep at fixed n, then n sweep at fixed N
    double fitted_c = 0.0;
    bool monotone_in_categories = true;
    bool monotone_in_observations = true;
    bool concave_in_log_categories = true;
    bool concave_in_log_observations = true;
    /// Largest slope increase against the log abscissa, in combined standard errors.
    /// Concavity within 3 SE means this is at most 3.
    double category_curvature = 0.0;
    double observation_curvature = 0.0;
};

MiScalingResult mi_scaling(const ExperimentConfig& config);

void write_mi_csv(std::ostream& out, const MiScalingResult& result);
void write_mi_summary(std::ostream& out, const MiScalingResult& result);

}  // namespace itcb::harness
