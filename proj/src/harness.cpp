#include "itcb/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "itcb/errors.hpp"
#include "itcb/info_theory.hpp"
#include "itcb/linear_bandit.hpp"
#include "itcb/tabular_mdp.hpp"

namespace itcb::harness {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* first = value.data();
    const char* last = value.data() + value.size();
    if constexpr (std::is_unsigned_v<T>) {
        if (!value.empty() && value[0] == '-') throw ConfigError(key, "must be nonnegative, got '" + value + "'");
    }
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) throw ConfigError(key, "not a valid number: '" + value + "'");
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(out)) throw ConfigError(key, "must be finite");
    }
    return out;
}

std::vector<std::size_t> parse_list(const std::string& key, const std::string& value) {
    std::vector<std::size_t> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number<std::size_t>(key, trim(item)));
    if (out.empty()) throw ConfigError(key, "empty list");
    return out;
}

const std::set<std::string>& allowed_keys(ExperimentKind kind) {
    static const std::set<std::string> linear{"experiment", "name",      "agent",       "periods",
                                              "seeds",      "base_seed", "out",         "delta",
                                              "dim",        "num_actions", "noise_std", "prior_var"};
    static const std::set<std::string> tabular{"experiment", "name",  "agent",   "periods", "seeds",    "base_seed",
                                               "out",        "delta", "states",  "actions", "horizon",  "dirichlet"};
    static const std::set<std::string> factored{"experiment",  "name",         "agent",       "periods",
                                                "seeds",       "base_seed",    "out",         "delta",
                                                "model",       "states",       "actions",     "horizon",
                                                "ring_factors", "factor_size", "action_size", "max_flat_states"};
    static const std::set<std::string> mi{"experiment", "name",      "base_seed", "out",
                                          "categories", "observations", "samples", "fixed_n",
                                          "fixed_categories"};
    switch (kind) {
        case ExperimentKind::Linear: return linear;
        case ExperimentKind::Tabular: return tabular;
        case ExperimentKind::Factored: return factored;
        case ExperimentKind::MiScaling: return mi;
    }
    return linear;
}

double report_delta(const ExperimentConfig& c) {
    return 1.0 / static_cast<double>(std::max<std::size_t>(c.periods, 2));
}

double agent_delta(const ExperimentConfig& c) { return c.delta > 0.0 ? c.delta : report_delta(c); }

double dirichlet_value(const ExperimentConfig& c) {
    return c.dirichlet > 0.0 ? c.dirichlet : 2.0 / static_cast<double>(c.states);
}

void require_positive(const char* field, std::size_t v) {
    if (v == 0) throw ConfigError(field, "must be positive");
}

void require_increasing(const char* field, const std::vector<std::size_t>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] <= v[i - 1]) throw ConfigError(field, "values must be strictly increasing");
    }
}

Replication run_linear(const ExperimentConfig& config, std::uint64_t seed) {
    linear::LinearConfig lc;
    lc.dim = config.dim;
    lc.num_actions = config.num_actions;
    lc.periods = config.periods;
    lc.noise_std = config.noise_std;
    lc.prior_var = config.prior_var;
    lc.agent = config.agent;
    lc.delta = config.delta;
    Rng rng(seed);
    const linear::LinearRun run = linear::run_linear_experiment(lc, rng);

    const double noise_var = config.noise_std * config.noise_std;
    Replication rep;
    rep.seed = seed;
    rep.steps = run.steps;
    rep.gamma = run.prop_gamma;
    rep.additive = run.reward_range;
    rep.budget = linear_bandit_info_budget(config.dim, run.lambda_max, static_cast<double>(config.periods), noise_var);
    double total = 0.0;
    for (const auto& s : run.steps) total += s.info_gain;
    rep.chain_rule_residual = total - run.logdet_gain;
    return rep;
}

Replication run_tabular(const ExperimentConfig& config, std::uint64_t seed) {
    using namespace tabular;
    const auto spec = TabularMDPSpec::uniform(config.states, config.actions, config.horizon, dirichlet_value(config));
    TabularPosterior posterior = TabularPosterior::from_spec(spec);
    Rng rng(seed);
    const TabularEnv env = TabularEnv::from_model(sample_mdp(rng, posterior, spec));
    const UcbOptions options{agent_delta(config), false};

    Replication rep;
    rep.seed = seed;
    rep.gamma = regret_rate(config.states, config.actions, config.horizon, report_delta(config));
    const double sa = static_cast<double>(config.states * config.actions);
    const double tau = static_cast<double>(config.horizon);
    rep.additive = sa * tau * tau + tau;
    rep.budget = tabular_info_budget(config.states, config.actions, tau * static_cast<double>(config.periods));
    rep.steps.reserve(config.periods);
    for (std::size_t ell = 1; ell <= config.periods; ++ell) {
        EpisodeOutcome out = config.agent == Agent::ThompsonSampling ? psrl_episode(rng, posterior, spec, env)
                                                                      : ucb_episode(rng, posterior, spec, env, options);
        out.record.period = static_cast<std::int64_t>(ell);
        out.record.width = rep.gamma;
        out.record.budget = tabular_info_budget(config.states, config.actions, tau * static_cast<double>(ell));
        rep.eps_conf += out.under_visited_conf;
        rep.eps_count += out.under_visited_eps;
        rep.steps.push_back(out.record);
    }
    return rep;
}

Replication run_factored(const ExperimentConfig& config, std::uint64_t seed) {
    using namespace factored;
    const FactoredSpec spec = factored_spec(config);
    FactoredPosterior posterior = FactoredPosterior::from_spec(spec);
    Rng rng(seed);
    const FactoredEnv env = FactoredEnv::from_model(spec, sample_factored(rng, posterior, spec));
    const double delta = agent_delta(config);

    Replication rep;
    rep.seed = seed;
    rep.gamma = regret_rate(spec, report_delta(config));
    rep.additive = error_term_total(spec);
    const double tau = static_cast<double>(spec.horizon);
    const std::size_t K = spec.max_factor_size();
    const std::size_t D = spec.domain_total();
    rep.budget = factored_info_budget(K, D, tau * static_cast<double>(config.periods));
    rep.steps.reserve(config.periods);
    for (std::size_t ell = 1; ell <= config.periods; ++ell) {
        FactoredEpisode out = config.agent == Agent::ThompsonSampling
                                  ? factored_psrl_episode(rng, posterior, spec, env)
                                  : factored_ucb_episode(rng, posterior, spec, env, delta);
        out.record.period = static_cast<std::int64_t>(ell);
        out.record.width = rep.gamma;
        out.record.budget = factored_info_budget(K, D, tau * static_cast<double>(ell));
        rep.steps.push_back(out.record);
    }
    return rep;
}

struct CsvRow {
    std::string experiment;
    std::uint64_t seed = 0;
    std::int64_t period = 0;
    double regret = 0.0;
    double cum_info_gain = 0.0;
    double width = 0.0;
    double budget = 0.0;
};

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

std::string_view kind_name(ExperimentKind kind) noexcept {
    switch (kind) {
        case ExperimentKind::Linear: return "linear";
        case ExperimentKind::Tabular: return "tabular";
        case ExperimentKind::Factored: return "factored";
        case ExperimentKind::MiScaling: return "mi_scaling";
    }
    return "linear";
}

void ExperimentConfig::validate() const {
    require_positive("seeds", seeds);
    if (!(delta == 0.0 || (delta > 0.0 && delta < 1.0))) throw ConfigError("delta", "must be 0 (meaning 1/L) or lie in (0, 1)");
    switch (kind) {
        case ExperimentKind::Linear:
            require_positive("dim", dim);
            require_positive("num_actions", num_actions);
            if (!(noise_std > 0.0)) throw ConfigError("noise_std", "must be positive");
            if (!(prior_var >= 0.0)) throw ConfigError("prior_var", "must be nonnegative");
            break;
        case ExperimentKind::Tabular:
            require_positive("states", states);
            require_positive("actions", actions);
            require_positive("horizon", horizon);
            if (dirichlet < 0.0) throw ConfigError("dirichlet", "must be nonnegative");
            if (dirichlet > 0.0 && dirichlet < 2.0 / static_cast<double>(states) - 1e-12) {
                throw ConfigError("dirichlet", "must be at least 2/states");
            }
            break;
        case ExperimentKind::Factored:
            require_positive("horizon", horizon);
            if (model == "ring") {
                require_positive("ring_factors", ring_factors);
                require_positive("factor_size", factor_size);
                require_positive("action_size", action_size);
            } else if (model == "single") {
                require_positive("states", states);
                require_positive("actions", actions);
            } else {
                throw ConfigError("model", "expected 'ring' or 'single', got '" + model + "'");
            }
            require_positive("max_flat_states", max_flat_states);
            break;
        case ExperimentKind::MiScaling:
            if (categories.empty()) throw ConfigError("categories", "empty list");
            if (observations.empty()) throw ConfigError("observations", "empty list");
            for (std::size_t n : categories) {
                if (n < 2) throw ConfigError("categories", "every entry must be at least 2");
            }
            for (std::size_t n : observations) require_positive("observations", n);
            require_increasing("categories", categories);
            require_increasing("observations", observations);
            if (samples < 2) throw ConfigError("samples", "must be at least 2");
            require_positive("fixed_n", fixed_n);
            if (fixed_categories < 2) throw ConfigError("fixed_categories", "must be at least 2");
            break;
    }
}

ExperimentConfig parse_config(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno), "expected key=value, got '" + body + "'");
        }
        std::string key = trim(std::string_view(body).substr(0, eq));
        std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno), "empty key");
        if (!kv.emplace(key, value).second) throw ConfigError(key, "given more than once");
    }

    ExperimentConfig c;
    const auto kind_it = kv.find("experiment");
    if (kind_it == kv.end()) throw ConfigError("experiment", "missing");
    const std::string& kind = kind_it->second;
    if (kind == "linear") c.kind = ExperimentKind::Linear;
    else if (kind == "tabular") c.kind = ExperimentKind::Tabular;
    else if (kind == "factored") c.kind = ExperimentKind::Factored;
    else if (kind == "mi_scaling") c.kind = ExperimentKind::MiScaling;
    else throw ConfigError("experiment", "unknown kind '" + kind + "'");

    const auto& allowed = allowed_keys(c.kind);
    for (const auto& [key, value] : kv) {
        if (!allowed.count(key)) throw ConfigError(key, "not a recognized key for experiment=" + kind);
    }
    if (c.kind != ExperimentKind::MiScaling && !kv.count("periods")) throw ConfigError("periods", "missing");

    for (const auto& [key, value] : kv) {
        if (key == "experiment") continue;
        else if (key == "name") c.name = value;
        else if (key == "out") c.output = value;
        else if (key == "model") c.model = value;
        else if (key == "agent") {
            if (value == "ts") c.agent = Agent::ThompsonSampling;
            else if (value == "ucb") c.agent = Agent::Ucb;
            else throw ConfigError("agent", "expected 'ts' or 'ucb', got '" + value + "'");
        }
        else if (key == "periods") c.periods = parse_number<std::size_t>(key, value);
        else if (key == "seeds") c.seeds = parse_number<std::size_t>(key, value);
        else if (key == "base_seed") c.base_seed = parse_number<std::uint64_t>(key, value);
        else if (key == "delta") c.delta = parse_number<double>(key, value);
        else if (key == "dim") c.dim = parse_number<std::size_t>(key, value);
        else if (key == "num_actions") c.num_actions = parse_number<std::size_t>(key, value);
        else if (key == "noise_std") c.noise_std = parse_number<double>(key, value);
        else if (key == "prior_var") c.prior_var = parse_number<double>(key, value);
        else if (key == "states") c.states = parse_number<std::size_t>(key, value);
        else if (key == "actions") c.actions = parse_number<std::size_t>(key, value);
        else if (key == "horizon") c.horizon = parse_number<std::size_t>(key, value);
        else if (key == "dirichlet") c.dirichlet = parse_number<double>(key, value);
        else if (key == "ring_factors") c.ring_factors = parse_number<std::size_t>(key, value);
        else if (key == "factor_size") c.factor_size = parse_number<std::size_t>(key, value);
        else if (key == "action_size") c.action_size = parse_number<std::size_t>(key, value);
        else if (key == "max_flat_states") c.max_flat_states = parse_number<std::size_t>(key, value);
        else if (key == "categories") c.categories = parse_list(key, value);
        else if (key == "observations") c.observations = parse_list(key, value);
        else if (key == "samples") c.samples = parse_number<std::size_t>(key, value);
        else if (key == "fixed_n") c.fixed_n = parse_number<std::size_t>(key, value);
        else if (key == "fixed_categories") c.fixed_categories = parse_number<std::size_t>(key, value);
    }
    if (c.name.empty()) {
        c.name = std::string(kind_name(c.kind));
        if (c.kind != ExperimentKind::MiScaling) c.name += "_" + std::string(agent_name(c.agent));
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    return parse_config(in);
}

factored::FactoredSpec factored_spec(const ExperimentConfig& config) {
    using factored::Scope;
    factored::FactoredSpec spec;
    if (config.model == "single") {
        spec = factored::FactoredSpec::with_default_priors({config.states}, {config.actions}, {{0, 1}}, {{0, 1}},
                                                           config.horizon);
    } else if (config.model == "ring") {
        const std::size_t n = config.ring_factors;
        std::vector<Scope> reward, transition;
        for (std::size_t i = 0; i < n; ++i) reward.push_back({i, n});
        for (std::size_t j = 0; j < n; ++j) transition.push_back({(j + n - 1) % n, n});
        spec = factored::FactoredSpec::with_default_priors(std::vector<std::size_t>(n, config.factor_size),
                                                           {config.action_size}, reward, transition, config.horizon);
    } else {
        throw ConfigError("model", "expected 'ring' or 'single', got '" + config.model + "'");
    }
    spec.max_flat_states = config.max_flat_states;
    spec.validate();
    return spec;
}

Replication run_replication(const ExperimentConfig& config, std::size_t index) {
    const std::uint64_t seed = config.base_seed + index;
    Replication rep;
    switch (config.kind) {
        case ExperimentKind::Linear: rep = run_linear(config, seed); break;
        case ExperimentKind::Tabular: rep = run_tabular(config, seed); break;
        case ExperimentKind::Factored: rep = run_factored(config, seed); break;
        case ExperimentKind::MiScaling: throw ConfigError("experiment", "mi_scaling is run with mi-scaling, not run");
    }
    for (const auto& s : rep.steps) {
        rep.cum_regret += s.regret;
        rep.cum_info_gain += s.info_gain;
    }
    return rep;
}

std::vector<Replication> run_all(const ExperimentConfig& config, std::size_t jobs) {
    config.validate();
    std::vector<Replication> out(config.seeds);
    jobs = std::clamp<std::size_t>(jobs, 1, config.seeds);
    if (jobs == 1) {
        for (std::size_t r = 0; r < config.seeds; ++r) out[r] = run_replication(config, r);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (std::size_t r = next++; r < config.seeds; r = next++) {
                try {
                    out[r] = run_replication(config, r);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = config.seeds;
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (error) std::rethrow_exception(error);
    return out;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(std::ostream& out, const std::string& experiment, const std::vector<Replication>& runs) {
    out << kCsvHeader << '\n';
    for (const auto& run : runs) {
        double cum_regret = 0.0;
        double cum_gain = 0.0;
        for (const auto& s : run.steps) {
            cum_regret += s.regret;
            cum_gain += s.info_gain;
            out << experiment << ',' << run.seed << ',' << s.period << ',' << s.action << ',' << format_double(s.regret)
                << ',' << format_double(cum_regret) << ',' << format_double(s.info_gain) << ','
                << format_double(cum_gain) << ',' << format_double(s.width) << ',' << format_double(s.budget) << '\n';
        }
    }
}

bool BoundReport::flagged() const {
    if (budget_violations > 0) return true;
    return bound_additive.has_value() && mean_cum_regret > bound();
}

BoundReport summarize(const std::string& experiment, const std::vector<Replication>& runs) {
    BoundReport r;
    r.experiment = experiment;
    r.seeds = runs.size();
    if (runs.empty()) return r;
    r.periods = runs.front().steps.size();
    const std::size_t half = r.periods / 2;
    double leading = 0.0, additive = 0.0, budget = 0.0;
    std::int64_t eps_conf = 0, eps_count = 0;
    for (const auto& run : runs) {
        r.mean_cum_regret += run.cum_regret;
        r.mean_cum_info_gain += run.cum_info_gain;
        r.max_cum_info_gain = std::max(r.max_cum_info_gain, run.cum_info_gain);
        leading += run.gamma * std::sqrt(static_cast<double>(run.steps.size()) * run.budget);
        additive += run.additive;
        budget += run.budget;
        eps_conf += run.eps_conf;
        eps_count += run.eps_count;
        double gain = 0.0;
        bool violated = false;
        for (std::size_t t = 0; t < run.steps.size(); ++t) {
            gain += run.steps[t].info_gain;
            violated |= gain > run.steps[t].budget;
            (t < half ? r.first_half_regret : r.second_half_regret) += run.steps[t].regret;
        }
        if (violated) ++r.budget_violations;
    }
    const double n = static_cast<double>(runs.size());
    r.mean_cum_regret /= n;
    r.mean_cum_info_gain /= n;
    r.bound_leading = leading / n;
    r.bound_additive = additive / n;
    r.info_budget = budget / n;
    r.first_half_regret /= n;
    r.second_half_regret /= n;
    r.eps_conf = eps_conf;
    r.eps_count = eps_count;
    return r;
}

BoundReport report_from_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("csv", "empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw ConfigError("csv", "header does not match the expected columns");

    // seed -> rows in file order
    std::map<std::uint64_t, std::vector<CsvRow>> by_seed;
    std::vector<std::uint64_t> order;
    std::string experiment;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_csv(line);
        const std::string where = "csv line " + std::to_string(lineno);
        if (f.size() != 10) throw ConfigError(where, "expected 10 columns, got " + std::to_string(f.size()));
        CsvRow row;
        row.experiment = f[0];
        row.seed = parse_number<std::uint64_t>(where, f[1]);
        row.period = parse_number<std::int64_t>(where, f[2]);
        row.regret = parse_number<double>(where, f[4]);
        row.cum_info_gain = parse_number<double>(where, f[7]);
        row.width = parse_number<double>(where, f[8]);
        row.budget = parse_number<double>(where, f[9]);
        if (experiment.empty()) experiment = row.experiment;
        auto [it, inserted] = by_seed.try_emplace(row.seed);
        if (inserted) order.push_back(row.seed);
        it->second.push_back(row);
    }

    BoundReport r;
    r.experiment = experiment;
    r.seeds = by_seed.size();
    if (by_seed.empty()) return r;
    r.periods = by_seed.begin()->second.size();
    const std::size_t half = r.periods / 2;
    double leading = 0.0;
    for (const auto& seed : order) {
        const auto& rows = by_seed.at(seed);
        if (rows.size() != r.periods) throw ConfigError("csv", "seeds have different numbers of periods");
        double cum_regret = 0.0;
        bool violated = false;
        for (std::size_t t = 0; t < rows.size(); ++t) {
            if (rows[t].period != static_cast<std::int64_t>(t + 1)) throw ConfigError("csv", "periods out of order");
            cum_regret += rows[t].regret;
            violated |= rows[t].cum_info_gain > rows[t].budget;
            (t < half ? r.first_half_regret : r.second_half_regret) += rows[t].regret;
        }
        const double gain = rows.back().cum_info_gain;
        r.mean_cum_regret += cum_regret;
        r.mean_cum_info_gain += gain;
        r.max_cum_info_gain = std::max(r.max_cum_info_gain, gain);
        r.info_budget += rows.back().budget;
        leading += rows.front().width * std::sqrt(static_cast<double>(rows.size()) * rows.back().budget);
        if (violated) ++r.budget_violations;
    }
    const double n = static_cast<double>(r.seeds);
    r.mean_cum_regret /= n;
    r.mean_cum_info_gain /= n;
    r.info_budget /= n;
    r.bound_leading = leading / n;
    r.first_half_regret /= n;
    r.second_half_regret /= n;
    return r;
}

void write_report(std::ostream& out, const BoundReport& r) {
    out << "experiment=" << r.experiment << '\n'
        << "seeds=" << r.seeds << '\n'
        << "periods=" << r.periods << '\n'
        << "mean_cum_regret=" << format_double(r.mean_cum_regret) << '\n'
        << "bound_leading=" << format_double(r.bound_leading) << '\n';
    if (r.bound_additive) {
        out << "bound_additive=" << format_double(*r.bound_additive) << '\n'
            << "bound=" << format_double(r.bound()) << '\n';
    }
    out << "mean_cum_info_gain=" << format_double(r.mean_cum_info_gain) << '\n'
        << "max_cum_info_gain=" << format_double(r.max_cum_info_gain) << '\n'
        << "info_budget=" << format_double(r.info_budget) << '\n'
        << "budget_violations=" << r.budget_violations << '\n'
        << "first_half_regret=" << format_double(r.first_half_regret) << '\n'
        << "second_half_regret=" << format_double(r.second_half_regret) << '\n';
    if (r.eps_conf) out << "eps_count_tau_minus_1=" << *r.eps_conf << '\n';
    if (r.eps_count) out << "eps_count_tau_minus_3=" << *r.eps_count << '\n';
    out << "flagged=" << (r.flagged() ? "true" : "false") << '\n';
}

MiScalingResult mi_scaling(const ExperimentConfig& config) {
    config.validate();
    MiScalingResult res;
    auto cell = [&](std::size_t N, std::size_t n) {
        Rng rng(config.base_seed, (static_cast<std::uint64_t>(N) << 32) | static_cast<std::uint64_t>(n));
        const auto prior = DirichletParams::uniform(N, 2.0 / static_cast<double>(N));
        return MiCell{N, n, mc_sequence_mi(rng, prior, n, config.samples)};
    };
    for (std::size_t N : config.categories) res.cells.push_back(cell(N, config.fixed_n));
    for (std::size_t n : config.observations) res.cells.push_back(cell(config.fixed_categories, n));

    double num = 0.0, den = 0.0;
    for (const auto& c : res.cells) {
        const double g = std::log(static_cast<double>(c.categories)) * std::log(static_cast<double>(c.observations));
        num += g * c.mi.estimate;
        den += g * g;
    }
    res.fitted_c = den > 0.0 ? num / den : 0.0;

    const std::size_t nc = config.categories.size();
    auto monotone = [](const MiCell* c, std::size_t count) {
        for (std::size_t i = 1; i < count; ++i) {
            const double se = std::hypot(c[i].mi.std_error, c[i - 1].mi.std_error);
            if (c[i].mi.estimate - c[i - 1].mi.estimate < -3.0 * se) return false;
        }
        return true;
    };
    // Largest (slope_{k+1} − slope_k) / SE against the log of `coord`.
    auto curvature = [](const MiCell* c, std::size_t count, bool by_categories) {
        double worst = -INFINITY;
        auto x = [&](std::size_t i) {
            return std::log(static_cast<double>(by_categories ? c[i].categories : c[i].observations));
        };
        for (std::size_t i = 1; i + 1 < count; ++i) {
            const double h0 = x(i) - x(i - 1);
            const double h1 = x(i + 1) - x(i);
            const double diff = (c[i + 1].mi.estimate - c[i].mi.estimate) / h1 -
                                (c[i].mi.estimate - c[i - 1].mi.estimate) / h0;
            const double w0 = 1.0 / h0, w1 = 1.0 / h1;
            const double se = std::sqrt(std::pow(w1 * c[i + 1].mi.std_error, 2) +
                                        std::pow((w0 + w1) * c[i].mi.std_error, 2) +
                                        std::pow(w0 * c[i - 1].mi.std_error, 2));
            worst = std::max(worst, se > 0.0 ? diff / se : (diff > 0.0 ? INFINITY : -INFINITY));
        }
        return worst;
    };
    const MiCell* by_n = res.cells.data();
    const MiCell* by_obs = res.cells.data() + nc;
    res.monotone_in_categories = monotone(by_n, nc);
    res.monotone_in_observations = monotone(by_obs, config.observations.size());
    res.category_curvature = curvature(by_n, nc, true);
    res.observation_curvature = curvature(by_obs, config.observations.size(), false);
    res.concave_in_log_categories = res.category_curvature <= 3.0;
    res.concave_in_log_observations = res.observation_curvature <= 3.0;
    return res;
}

void write_mi_csv(std::ostream& out, const MiScalingResult& result) {
    out << "N,n,estimate,std_error\n";
    for (const auto& c : result.cells) {
        out << c.categories << ',' << c.observations << ',' << format_double(c.mi.estimate) << ','
            << format_double(c.mi.std_error) << '\n';
    }
}

void write_mi_summary(std::ostream& out, const MiScalingResult& result) {
    out << "fitted_c=" << format_double(result.fitted_c) << '\n'
        << "monotone_in_N=" << (result.monotone_in_categories ? "true" : "false") << '\n'
        << "monotone_in_n=" << (result.monotone_in_observations ? "true" : "false") << '\n'
        << "concave_in_log_N=" << (result.concave_in_log_categories ? "true" : "false") << '\n'
        << "concave_in_log_n=" << (result.concave_in_log_observations ? "true" : "false") << '\n'
        << "curvature_log_N_se=" << format_double(result.category_curvature) << '\n'
        << "curvature_log_n_se=" << format_double(result.observation_curvature) << '\n';
}

}  // namespace itcb::harness
