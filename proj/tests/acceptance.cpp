// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "itcb/harness.hpp"
#include "itcb/info_theory.hpp"
#include "itcb/special_functions.hpp"
#include "itcb/tabular_mdp.hpp"

using namespace itcb;
using namespace itcb::harness;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string config_path(const std::string& name) { return std::string(ITCB_SOURCE_DIR) + "/configs/" + name; }

std::size_t jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string csv_text(const ExperimentConfig& c, const std::vector<Replication>& runs) {
    std::ostringstream out;
    write_csv(out, c.name, runs);
    return out.str();
}

// CSV text of every shipped run config from its first run, for the determinism check.
std::map<std::string, std::string> g_first_csv;

struct Loaded {
    ExperimentConfig config;
    std::vector<Replication> runs;
    BoundReport report;
};

Loaded load_and_run(const std::string& file) {
    Loaded l;
    l.config = load_config(config_path(file));
    l.runs = run_all(l.config, jobs());
    l.report = summarize(l.config.name, l.runs);
    g_first_csv[file] = csv_text(l.config, l.runs);
    return l;
}

std::string halves(const BoundReport& r) {
    return "halves " + fmt("%.4g", r.first_half_regret) + " / " + fmt("%.4g", r.second_half_regret);
}

Loaded g_linear_ts, g_linear_ucb;

// Runs the two 100-seed linear sets that criteria 2 and 3 reuse; the time limit applies to a single run.
Outcome criterion1() {
    g_linear_ts = load_and_run("linear_ts.conf");
    g_linear_ucb = load_and_run("linear_ucb.conf");
    double worst = 0.0, slowest = 0.0;
    std::size_t runs = 0;
    for (const Loaded* l : {&g_linear_ts, &g_linear_ucb}) {
        if (l->config.periods != 2000 || l->config.dim != 5) return {false, "unexpected linear config"};
        for (const auto& r : l->runs) {
            worst = std::max(worst, std::abs(r.chain_rule_residual));
            ++runs;
        }
        const auto start = std::chrono::steady_clock::now();
        run_replication(l->config, 0);
        slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    return {worst <= 1e-8 && slowest < 1.0, std::to_string(runs) + " runs, max |sum MI - logdet gain| = " +
                                                fmt("%.3g", worst) + ", single run " + fmt("%.3f", slowest) + " s"};
}

Outcome criterion2() {
    const auto& a = g_linear_ts.report;
    const auto& b = g_linear_ucb.report;
    const bool ok = a.seeds == 100 && b.seeds == 100 && a.budget_violations == 0 && b.budget_violations == 0;
    return {ok, "violations ts " + std::to_string(a.budget_violations) + ", ucb " + std::to_string(b.budget_violations) +
                    "; max gain " + fmt("%.4g", std::max(a.max_cum_info_gain, b.max_cum_info_gain)) + " vs budget " +
                    fmt("%.4g", std::min(a.info_budget, b.info_budget))};
}

Outcome criterion3() {
    bool ok = true;
    std::string detail;
    for (const Loaded* l : {&g_linear_ts, &g_linear_ucb}) {
        const auto& r = l->report;
        const bool below = r.mean_cum_regret <= r.bound();
        const bool sublinear = r.second_half_regret < r.first_half_regret;
        ok = ok && below && sublinear && r.seeds == 100 && r.periods == 2000;
        detail += std::string(agent_name(l->config.agent)) + ": regret " + fmt("%.4g", r.mean_cum_regret) +
                  " <= bound " + fmt("%.4g", r.bound()) + ", " + halves(r) + "; ";
    }
    return {ok, detail};
}

Outcome criterion4() {
    const double closed = dirichlet_obs_mi(DirichletParams({1.0, 1.0}));
    bool ok = std::abs(closed - (std::log(2.0) - 0.5)) <= 1e-10;
    std::mt19937_64 gen(4);
    Rng rng(4);
    int agree = 0;
    double worst_se = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        // Log-uniform α_i on [2/N, 10], the range allowed by the prior floors.
        const std::size_t n = 2 + trial % 5;
        std::uniform_real_distribution<double> u(std::log(2.0 / static_cast<double>(n)), std::log(10.0));
        std::vector<double> a(n);
        for (auto& v : a) v = std::exp(u(gen));
        const DirichletParams p(a);
        const auto est = mc_sequence_mi(rng, p, 1, 1000000);
        worst_se = std::max(worst_se, est.std_error);
        if (std::abs(est.estimate - dirichlet_obs_mi(p)) <= 3.0 * est.std_error && est.std_error < 1e-3) ++agree;
    }
    ok = ok && agree == 50;
    return {ok, "closed form err " + fmt("%.2g", std::abs(closed - (std::log(2.0) - 0.5))) + ", " +
                    std::to_string(agree) + "/50 within 3 SE, max SE " + fmt("%.3g", worst_se)};
}

Outcome criterion5() {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> lu(std::log(1e-3), std::log(1e3));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int bound_violations = 0, digamma_violations = 0;
    for (int i = 0; i < 10000; ++i) {
        const std::size_t n = 2 + i % 30;
        std::vector<double> a(n);
        for (auto& v : a) v = 2.0 / static_cast<double>(n) + 10.0 * u(gen) * u(gen);
        const DirichletParams p(a);
        if (dirichlet_obs_mi(p) < 1.0 / (6.0 * p.alpha_bar())) ++bound_violations;

        const double x = std::exp(lu(gen));
        const double psi = digamma(x + 1.0);
        if (std::log(x + 0.5) > psi || psi > std::log(x) + 1.0 / (2.0 * x)) ++digamma_violations;
    }
    return {bound_violations == 0 && digamma_violations == 0,
            "MI lower bound violations " + std::to_string(bound_violations) + ", digamma inequality violations " +
                std::to_string(digamma_violations) + " (10^4 inputs each)"};
}

Outcome criterion6() {
    const auto c = load_config(config_path("mi_scaling.conf"));
    const auto r = mi_scaling(c);
    const bool ok = r.monotone_in_categories && r.monotone_in_observations && r.concave_in_log_categories &&
                    r.concave_in_log_observations;
    std::string cells;
    for (const auto& cell : r.cells) {
        cells += "(" + std::to_string(cell.categories) + "," + std::to_string(cell.observations) + ")=" +
                 fmt("%.4g", cell.mi.estimate) + " ";
    }
    return {ok, std::string("monotone N/n ") + (r.monotone_in_categories ? "yes" : "no") + "/" +
                    (r.monotone_in_observations ? "yes" : "no") + ", concave in log N/n " +
                    (r.concave_in_log_categories ? "yes" : "no") + "/" + (r.concave_in_log_observations ? "yes" : "no") +
                    " (max slope increase " + fmt("%.3g", r.category_curvature) + " / " +
                    fmt("%.3g", r.observation_curvature) + " SE), fitted c " + fmt("%.4g", r.fitted_c) + "; " + cells};
}

tabular::TabularMDPModel random_model(std::mt19937_64& gen, std::size_t S, std::size_t A, std::size_t tau) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::gamma_distribution<double> g(1.0, 1.0);
    tabular::TabularMDPModel m;
    m.num_states = S;
    m.num_actions = A;
    m.horizon = tau;
    m.reward.resize(S * A);
    for (auto& r : m.reward) r = u(gen);
    m.transition.resize(S * A * S);
    for (std::size_t p = 0; p < S * A; ++p) {
        double sum = 0.0;
        for (std::size_t s = 0; s < S; ++s) sum += m.transition[p * S + s] = g(gen);
        for (std::size_t s = 0; s < S; ++s) m.transition[p * S + s] /= sum;
    }
    m.initial.resize(S);
    double sum = 0.0;
    for (auto& v : m.initial) sum += v = g(gen);
    for (auto& v : m.initial) v /= sum;
    return m;
}

Outcome criterion7() {
    std::mt19937_64 gen(7);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        auto hat = random_model(gen, 3, 2, 4);
        const auto truth = random_model(gen, 3, 2, 4);
        hat.initial = truth.initial;
        tabular::Policy pol{4, 3, std::vector<std::size_t>(12)};
        for (auto& a : pol.actions) a = gen() % 2;
        const auto d = tabular::bellman_error_decomposition(hat, truth, pol);
        worst = std::max(worst, std::abs(d.lhs - d.rhs));
    }
    return {worst <= 1e-10, "100 triples, max |lhs - rhs| = " + fmt("%.3g", worst)};
}

// Fraction of checkpoints at which the optimistic root value is at least the true optimal value.
Outcome optimism_frequency(const ExperimentConfig& c) {
    using namespace tabular;
    const auto spec = TabularMDPSpec::uniform(c.states, c.actions, c.horizon, 2.0 / static_cast<double>(c.states));
    const UcbOptions options{0.1, false};
    std::size_t total = 0, hits = 0;
    for (std::size_t seed = 0; seed < c.seeds; ++seed) {
        Rng rng(c.base_seed + seed);
        auto post = TabularPosterior::from_spec(spec);
        const TabularEnv env = TabularEnv::from_model(sample_mdp(rng, post, spec));
        for (std::size_t ell = 0; ell < c.periods; ++ell) {
            if (ell % 20 == 0) {
                const Plan plan = ucb_policy(post, spec, options);
                double root = 0.0;
                for (std::size_t s = 0; s < spec.num_states; ++s) root += spec.initial[s] * plan.value(0, s);
                ++total;
                if (root >= env.optimal_value) ++hits;
            }
            ucb_episode(rng, post, spec, env, options);
        }
    }
    const double freq = static_cast<double>(hits) / static_cast<double>(total);
    const double sigma = std::sqrt(0.9 * 0.1 / static_cast<double>(total));
    return {freq >= 0.9 - 3.0 * sigma, "optimism frequency " + fmt("%.4f", freq) + " over " + std::to_string(total) +
                                           " checkpoints (need >= " + fmt("%.4f", 0.9 - 3.0 * sigma) + ")"};
}

Outcome criterion8() {
    const auto ts = load_and_run("tabular_psrl.conf");
    const auto ucb = load_and_run("tabular_ucb.conf");
    bool ok = true;
    std::string detail;
    for (const Loaded* l : {&ts, &ucb}) {
        const auto& r = l->report;
        const bool sublinear = r.second_half_regret < r.first_half_regret;
        ok = ok && sublinear && r.budget_violations == 0 && r.seeds == 50 && r.periods == 1000;
        detail += std::string(agent_name(l->config.agent)) + ": " + halves(r) + (sublinear ? "" : " (not sublinear)") +
                  ", budget violations " + std::to_string(r.budget_violations) + "; ";
    }
    const auto opt = optimism_frequency(ucb.config);
    return {ok && opt.pass, detail + opt.detail};
}

double brute_force(const tabular::TabularMDPModel& m) {
    const std::size_t slots = m.horizon * m.num_states;
    std::size_t total = 1;
    for (std::size_t i = 0; i < slots; ++i) total *= m.num_actions;
    double best = -INFINITY;
    tabular::Policy pol{m.horizon, m.num_states, std::vector<std::size_t>(slots)};
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        for (auto& a : pol.actions) {
            a = c % m.num_actions;
            c /= m.num_actions;
        }
        // Direct expectation over all state paths.
        std::function<double(std::size_t, std::size_t)> value = [&](std::size_t t, std::size_t s) -> double {
            if (t == m.horizon) return 0.0;
            const std::size_t p = m.pair(s, pol.action(t, s));
            double v = m.reward[p];
            for (std::size_t s2 = 0; s2 < m.num_states; ++s2) v += m.transition[p * m.num_states + s2] * value(t + 1, s2);
            return v;
        };
        double v = 0.0;
        for (std::size_t s = 0; s < m.num_states; ++s) v += m.initial[s] * value(0, s);
        best = std::max(best, v);
    }
    return best;
}

Outcome criterion9() {
    std::mt19937_64 gen(9);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = random_model(gen, 2, 2, 2);
        const auto plan = tabular::solve_finite_horizon(m);
        double v = 0.0;
        for (std::size_t s = 0; s < 2; ++s) v += m.initial[s] * plan.value(0, s);
        worst = std::max(worst, std::abs(v - brute_force(m)));
    }
    return {worst <= 1e-12, "50 instances, max |planner - enumeration| = " + fmt("%.3g", worst)};
}

// Comma-separated columns [from, to) of every line.
std::string columns(const std::string& csv, std::size_t from, std::size_t to) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) {
        std::size_t col = 0, start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                if (col >= from && col < to) out += line.substr(start, i - start) + (col + 1 < to ? "," : "");
                ++col;
                start = i + 1;
            }
        }
        out += '\n';
    }
    return out;
}

Outcome criterion10() {
    const auto single = load_and_run("factored_single.conf");
    const auto twin = load_and_run("tabular_twin.conf");
    const std::string a = columns(g_first_csv["factored_single.conf"], 1, 8);
    const std::string b = columns(g_first_csv["tabular_twin.conf"], 1, 8);
    const bool identical = a == b && single.runs.size() == twin.runs.size();

    const auto ring = load_and_run("factored_ring.conf");
    const auto& r = ring.report;
    const auto spec = factored_spec(ring.config);
    const double tau_l = static_cast<double>(spec.horizon * ring.config.periods);
    const double flat_budget = tabular_info_budget(spec.num_states(), spec.num_actions(), tau_l);
    const bool sublinear = r.second_half_regret < r.first_half_regret;
    const bool shape = spec.max_factor_size() == 3 && spec.reward_scopes.size() == 4 &&
                       spec.transition_scopes.size() == 4 && spec.max_scope() == 2 && spec.horizon == 8 &&
                       ring.config.periods == 500 && ring.config.seeds == 30;
    const bool ok = identical && sublinear && r.budget_violations == 0 && r.info_budget < flat_budget && shape;
    return {ok, std::string("single-factor model ") + (identical ? "byte-identical" : "DIFFERS") +
                    " to tabular (seed..cum_info_gain columns); ring " + halves(r) + ", max gain " +
                    fmt("%.4g", r.max_cum_info_gain) + " <= budget " + fmt("%.5g", r.info_budget) + " < flat budget " +
                    fmt("%.5g", flat_budget) + ", violations " + std::to_string(r.budget_violations)};
}

Outcome criterion11() {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Rng rng(11);
    const std::vector<double> t{0.1, 0.2, 0.3};
    const std::size_t draws = 100000;
    int failures = 0;
    std::string detail;
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t n = 2 + trial;
        std::vector<double> a(n);
        for (auto& x : a) x = 0.1 + 3.0 * u(gen);
        double sum = 0.0;
        for (double x : a) sum += x;
        if (sum < 2.0) {
            for (auto& x : a) x *= 2.0 / sum;
        }
        const DirichletParams p(a);
        std::vector<double> v(n);
        for (auto& x : v) x = u(gen);
        const auto freq = dirichlet_tail_exceedance(rng, p, v, t, draws);
        for (std::size_t j = 0; j < t.size(); ++j) {
            const double bound = std::exp(-p.alpha_bar() * t[j] * t[j] / 2.0);
            const double se = std::sqrt(bound * (1.0 - bound) / static_cast<double>(draws));
            if (freq[j] > bound + 3.0 * se) ++failures;
        }
        detail += fmt("%.3g", freq[0]) + "<=" + fmt("%.3g", std::exp(-p.alpha_bar() * 0.005)) + " ";
    }
    return {failures == 0, std::to_string(failures) + " of 15 exceedances above bound + 3 SE; t=0.1: " + detail};
}

Outcome criterion12() {
    std::size_t checked = 0;
    std::string differing;
    for (const auto& [file, first] : g_first_csv) {
        const auto c = load_config(config_path(file));
        if (csv_text(c, run_all(c, jobs())) != first) differing += file + " ";
        ++checked;
    }
    const auto mi = load_config(config_path("mi_scaling.conf"));
    auto small = mi;
    small.samples = 2000;
    std::ostringstream a, b;
    write_mi_csv(a, mi_scaling(small));
    write_mi_csv(b, mi_scaling(small));
    if (a.str() != b.str()) differing += "mi_scaling.conf ";
    return {differing.empty() && checked >= 7, std::to_string(checked + 1) + " configs rerun" +
                                                   (differing.empty() ? ", all byte-identical" : ", differ: " + differing)};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        double limit_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, 30, criterion1},  {2, 30, criterion2},  {3, 120, criterion3},  {4, 120, criterion4},
        {5, 5, criterion5},            {6, 300, criterion6}, {7, 5, criterion7},    {8, 300, criterion8},
        {9, 5, criterion9},            {10, 300, criterion10}, {11, 60, criterion11}, {12, 60, criterion12},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= c.limit_s;
        const bool pass = out.pass && in_time;
        if (!pass) ++failed;
        std::printf("[%s] criterion %d: %s [%.1f s%s]\n", pass ? "PASS" : "FAIL", c.id, out.detail.c_str(), secs,
                    in_time ? "" : ", over the time limit");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
