#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "itcb/errors.hpp"
#include "itcb/harness.hpp"

using namespace itcb;
using namespace itcb::harness;

namespace {

ExperimentConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

std::string field_of(const std::string& text) {
    try {
        parse(text);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "";
}

std::string csv_of(const ExperimentConfig& c, std::size_t jobs = 1) {
    std::ostringstream out;
    write_csv(out, c.name, run_all(c, jobs));
    return out.str();
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    return f;
}

}  // namespace

TEST_CASE("parse_config") {
    const auto c = parse("# comment\nexperiment = tabular\nagent=ucb\nperiods=12 # trailing\nseeds=3\nbase_seed=7\n"
                         "states=4\nactions=3\nhorizon=5\ndelta=0.2\n\n");
    CHECK(c.kind == ExperimentKind::Tabular);
    CHECK(c.agent == Agent::Ucb);
    CHECK(c.periods == 12);
    CHECK(c.seeds == 3);
    CHECK(c.base_seed == 7);
    CHECK(c.states == 4);
    CHECK(c.actions == 3);
    CHECK(c.horizon == 5);
    CHECK(c.delta == 0.2);
    CHECK(c.name == "tabular_ucb");

    const auto mi = parse("experiment=mi_scaling\ncategories=2,8\nobservations=1,10\nsamples=100\n");
    CHECK(mi.categories == std::vector<std::size_t>{2, 8});
    CHECK(mi.observations == std::vector<std::size_t>{1, 10});

    CHECK(field_of("periods=3\n") == "experiment");
    CHECK(field_of("experiment=quantum\nperiods=3\n") == "experiment");
    CHECK(field_of("experiment=linear\n") == "periods");
    CHECK(field_of("experiment=linear\nperiods=3\ndim=0\n") == "dim");
    CHECK(field_of("experiment=linear\nperiods=3\nseeds=0\n") == "seeds");
    CHECK(field_of("experiment=linear\nperiods=3\nnoise_std=-1\n") == "noise_std");
    CHECK(field_of("experiment=linear\nperiods=x\n") == "periods");
    CHECK(field_of("experiment=linear\nperiods=3\nperiods=4\n") == "periods");
    CHECK(field_of("experiment=linear\nperiods=3\nstates=4\n") == "states");
    CHECK(field_of("experiment=linear\nperiods=3\nagent=greedy\n") == "agent");
    CHECK(field_of("experiment=linear\nperiods=3\ndelta=1.5\n") == "delta");
    CHECK(field_of("experiment=tabular\nperiods=3\nstates=4\ndirichlet=0.1\n") == "dirichlet");
    CHECK(field_of("experiment=factored\nperiods=3\nmodel=star\n") == "model");
    CHECK(field_of("experiment=mi_scaling\ncategories=8,2\n") == "categories");
    CHECK(field_of("experiment=linear\nperiods\n") == "line 2");
    CHECK_THROWS_AS(load_config("/nonexistent/config.conf"), ConfigError);
}

TEST_CASE("zero periods give a header-only CSV") {
    const auto c = parse("experiment=linear\nperiods=0\nseeds=3\n");
    CHECK(csv_of(c) == std::string(kCsvHeader) + "\n");
}

TEST_CASE("runs are deterministic and independent of the worker count") {
    for (const char* text : {"experiment=linear\nperiods=40\nseeds=4\nagent=ucb\n",
                             "experiment=tabular\nperiods=15\nseeds=4\nstates=3\nhorizon=4\n",
                             "experiment=factored\nperiods=6\nseeds=3\nring_factors=3\nfactor_size=2\nhorizon=4\n"}) {
        const auto c = parse(text);
        const std::string a = csv_of(c, 1);
        CHECK(a == csv_of(c, 1));
        CHECK(a == csv_of(c, 3));
    }
}

TEST_CASE("a replication depends only on its seed") {
    auto c = parse("experiment=tabular\nperiods=20\nseeds=5\nbase_seed=10\nstates=3\nhorizon=4\n");
    const auto all = run_all(c);
    for (std::size_t i = 0; i < 5; ++i) {
        auto single = c;
        single.base_seed = 10 + i;
        single.seeds = 1;
        const auto rep = run_replication(single, 0);
        CHECK(rep.seed == all[i].seed);
        CHECK(rep.cum_regret == all[i].cum_regret);
        CHECK(rep.cum_info_gain == all[i].cum_info_gain);
        REQUIRE(rep.steps.size() == all[i].steps.size());
        for (std::size_t t = 0; t < rep.steps.size(); ++t) CHECK(rep.steps[t].regret == all[i].steps[t].regret);
    }
}

TEST_CASE("CSV schema") {
    const auto c = parse("experiment=factored\nname=ring3\nperiods=5\nseeds=2\nbase_seed=4\nring_factors=3\n"
                         "factor_size=2\nhorizon=4\n");
    std::istringstream in(csv_of(c));
    std::string line;
    std::getline(in, line);
    CHECK(line == kCsvHeader);
    std::size_t rows = 0;
    double cum_r = 0.0, cum_i = 0.0;
    while (std::getline(in, line)) {
        const auto f = split(line);
        REQUIRE(f.size() == 10);
        CHECK(f[0] == "ring3");
        const std::size_t seed = std::stoul(f[1]);
        const std::size_t period = std::stoul(f[2]);
        CHECK(seed == 4 + rows / 5);
        CHECK(period == rows % 5 + 1);
        if (period == 1) cum_r = cum_i = 0.0;
        std::vector<double> v;
        for (std::size_t k = 4; k < 10; ++k) {
            v.push_back(std::stod(f[k]));
            CHECK(std::isfinite(v.back()));
        }
        cum_r += v[0];
        cum_i += v[2];
        CHECK(v[0] >= 0.0);
        CHECK(v[1] == cum_r);
        CHECK(v[3] == cum_i);
        CHECK(v[4] > 0.0);
        CHECK(v[5] >= v[3]);
        ++rows;
    }
    CHECK(rows == 10);
    CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("report recomputed from the CSV matches the summary") {
    for (const char* text : {"experiment=linear\nperiods=30\nseeds=3\n",
                             "experiment=tabular\nperiods=12\nseeds=3\nstates=3\nhorizon=4\nagent=ucb\n"}) {
        const auto c = parse(text);
        const auto runs = run_all(c);
        const auto direct = summarize(c.name, runs);
        std::ostringstream csv;
        write_csv(csv, c.name, runs);
        std::istringstream in(csv.str());
        const auto back = report_from_csv(in);
        CHECK(back.experiment == direct.experiment);
        CHECK(back.seeds == direct.seeds);
        CHECK(back.periods == direct.periods);
        CHECK(back.mean_cum_regret == doctest::Approx(direct.mean_cum_regret).epsilon(1e-12));
        CHECK(back.bound_leading == doctest::Approx(direct.bound_leading).epsilon(1e-12));
        CHECK(back.mean_cum_info_gain == doctest::Approx(direct.mean_cum_info_gain).epsilon(1e-12));
        CHECK(back.max_cum_info_gain == direct.max_cum_info_gain);
        CHECK(back.info_budget == direct.info_budget);
        CHECK(back.budget_violations == direct.budget_violations);
        CHECK(back.first_half_regret == doctest::Approx(direct.first_half_regret).epsilon(1e-12));
        CHECK(back.second_half_regret == doctest::Approx(direct.second_half_regret).epsilon(1e-12));
        CHECK_FALSE(back.bound_additive.has_value());
        CHECK(direct.bound_additive.has_value());
    }

    std::istringstream bad_header("experiment,seed\n");
    CHECK_THROWS_AS(report_from_csv(bad_header), ConfigError);
    std::istringstream short_row(std::string(kCsvHeader) + "\nx,0,1,0\n");
    CHECK_THROWS_AS(report_from_csv(short_row), ConfigError);
}

TEST_CASE("report flags budget violations") {
    auto c = parse("experiment=tabular\nperiods=5\nseeds=2\nstates=3\nhorizon=4\n");
    auto runs = run_all(c);
    CHECK(summarize(c.name, runs).budget_violations == 0);
    runs[1].steps[2].info_gain += 1e6;
    std::ostringstream csv;
    write_csv(csv, c.name, runs);
    std::istringstream in(csv.str());
    const auto report = report_from_csv(in);
    CHECK(report.budget_violations == 1);
    CHECK(report.flagged());
}

TEST_CASE("tabular report carries both under-visit counts") {
    const auto c = parse("experiment=tabular\nperiods=10\nseeds=2\nstates=3\nhorizon=6\nagent=ucb\ndelta=0.1\n");
    const auto report = summarize(c.name, run_all(c));
    REQUIRE(report.eps_conf.has_value());
    REQUIRE(report.eps_count.has_value());
    CHECK(*report.eps_conf >= *report.eps_count);
    CHECK(*report.eps_count > 0);
}

TEST_CASE("mi_scaling small grid") {
    const auto c = parse("experiment=mi_scaling\ncategories=2,8\nobservations=1,5\nsamples=20000\n"
                         "fixed_n=1\nfixed_categories=2\n");
    const auto result = mi_scaling(c);
    REQUIRE(result.cells.size() == 4);
    CHECK(result.cells[0].categories == 2);
    CHECK(result.cells[0].observations == 1);
    // Uniform prior, one observation: the gain is ln 2 − ½ whatever the outcome.
    CHECK(std::abs(result.cells[0].mi.estimate - 0.19314718055994531) <= 1e-12);
    CHECK(result.cells[3].categories == 2);
    CHECK(result.cells[3].observations == 5);
    CHECK(std::abs(result.cells[3].mi.estimate - 0.59576713770410369) <= 3.0 * result.cells[3].mi.std_error);
    CHECK(std::abs(result.cells[1].mi.estimate - 0.92920367320510338) <= 1e-12);
    CHECK(result.monotone_in_categories);
    CHECK(result.monotone_in_observations);
    CHECK(result.fitted_c > 0.0);

    std::ostringstream csv;
    write_mi_csv(csv, result);
    CHECK(csv.str().rfind("N,n,estimate,std_error\n", 0) == 0);
    std::ostringstream summary;
    write_mi_summary(summary, result);
    CHECK(summary.str().find("fitted_c=") != std::string::npos);

    // Same config twice: identical estimates.
    const auto again = mi_scaling(c);
    for (std::size_t i = 0; i < 4; ++i) CHECK(again.cells[i].mi.estimate == result.cells[i].mi.estimate);
}
