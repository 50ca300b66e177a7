#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "itcb/errors.hpp"
#include "itcb/harness.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kFlagged = 2;

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

std::string output_path(const itcb::harness::ExperimentConfig& config, const std::string& cli_out) {
    if (!cli_out.empty()) return cli_out;
    if (!config.output.empty()) return config.output;
    return config.name + ".csv";
}

int cmd_run(const std::string& config_path, std::optional<std::size_t> seeds, const std::string& out,
            std::size_t jobs) {
    using namespace itcb::harness;
    ExperimentConfig config = load_config(config_path);
    if (config.kind == ExperimentKind::MiScaling) {
        throw itcb::ConfigError("experiment", "mi_scaling configs are run with the mi-scaling command");
    }
    if (seeds) config.seeds = *seeds;
    config.validate();
    const auto runs = run_all(config, jobs);

    const std::string path = output_path(config, out);
    {
        auto csv = open_output(path);
        write_csv(csv, config.name, runs);
    }
    const BoundReport report = summarize(config.name, runs);
    {
        auto summary = open_output(path + ".summary");
        write_report(summary, report);
    }
    write_report(std::cout, report);
    return report.flagged() ? kFlagged : kOk;
}

int cmd_mi(const std::string& config_path, const std::string& out) {
    using namespace itcb::harness;
    const ExperimentConfig config = load_config(config_path);
    if (config.kind != ExperimentKind::MiScaling) {
        throw itcb::ConfigError("experiment", "mi-scaling expects experiment=mi_scaling");
    }
    const MiScalingResult result = mi_scaling(config);
    const std::string path = output_path(config, out);
    {
        auto csv = open_output(path);
        write_mi_csv(csv, result);
    }
    {
        auto summary = open_output(path + ".summary");
        write_mi_summary(summary, result);
    }
    write_mi_summary(std::cout, result);
    return kOk;
}

int cmd_report(const std::string& csv_path) {
    using namespace itcb::harness;
    std::ifstream in(csv_path);
    if (!in) throw itcb::ConfigError("csv", "cannot open '" + csv_path + "'");
    const BoundReport report = report_from_csv(in);
    write_report(std::cout, report);
    return report.flagged() ? kFlagged : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Seeded bandit and MDP experiments with information-theoretic regret bounds"};
    app.require_subcommand(1);

    std::string config_path;
    std::string csv_path;
    std::string out;
    std::size_t seeds = 0;
    std::size_t jobs = 1;

    auto* run = app.add_subcommand("run", "Run all seeds of an experiment, write CSV and summary");
    run->add_option("config", config_path, "Config file (key=value)")->required();
    auto* seeds_opt = run->add_option("--seeds", seeds, "Override the number of seeds")->check(CLI::PositiveNumber);
    run->add_option("--out", out, "CSV output path");
    run->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

    auto* mi = app.add_subcommand("mi-scaling", "Monte-Carlo Dirichlet mutual information over a grid");
    mi->add_option("config", config_path, "Config file (key=value)")->required();
    mi->add_option("--out", out, "CSV output path");

    auto* report = app.add_subcommand("report", "Recompute the bound report from a CSV");
    report->add_option("csv", csv_path, "CSV written by run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInvalid;
    }

    try {
        if (run->parsed()) {
            return cmd_run(config_path, seeds_opt->count() ? std::optional(seeds) : std::nullopt, out, jobs);
        }
        if (mi->parsed()) return cmd_mi(config_path, out);
        return cmd_report(csv_path);
    } catch (const itcb::ConfigError& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
    }
}
