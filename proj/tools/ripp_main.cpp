// Command-line front end: flag parsing only, all behavior lives in ripp::run.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ripp/cli.hpp"
#include "ripp/errors.hpp"

namespace {

ripp::TailConvention parse_tail(const std::string& name) {
    if (name == "two") return ripp::TailConvention::two_sided_abs;
    if (name == "right") return ripp::TailConvention::right_tail;
    if (name == "left") return ripp::TailConvention::left_tail;
    throw ripp::config_error("unknown tail convention: " + name);
}

ripp::StatisticKind parse_statistic(const std::string& name) {
    if (name == "itt") return ripp::StatisticKind::itt;
    if (name == "cace") return ripp::StatisticKind::cace;
    throw ripp::config_error("unknown statistic: " + name);
}

std::vector<ripp::AdjustmentMethod> parse_methods(const std::string& text) {
    if (text == "all")
        return {ripp::AdjustmentMethod::bonferroni, ripp::AdjustmentMethod::holm,
                ripp::AdjustmentMethod::hochberg, ripp::AdjustmentMethod::hommel,
                ripp::AdjustmentMethod::randomization};
    std::vector<ripp::AdjustmentMethod> methods;
    std::string item;
    std::istringstream ss(text);
    while (std::getline(ss, item, ',')) {
        const auto method = ripp::parse_adjustment(item);
        if (!method) throw ripp::config_error("unknown adjustment method: " + item);
        methods.push_back(*method);
    }
    if (methods.empty()) throw ripp::config_error("no adjustment methods given");
    return methods;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Randomization inference with posterior-predictive compliance imputation"};
    app.require_subcommand(1);

    ripp::RunConfig config;
    std::string statistic = "cace";
    std::string tail = "two";
    std::string adjust = "all";
    std::string format = "tsv";
    std::uint64_t seed = 0;
    bool seed_given = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--m", config.m_iterations, "Imputation-randomization iterations");
        cmd->add_option("--alpha", config.alpha, "Familywise significance level");
        cmd->add_option("--seed", seed, "Master seed (generated and reported when absent)")
            ->each([&](const std::string&) { seed_given = true; });
        cmd->add_option("--tail", tail, "Extremity convention: two|right|left");
        cmd->add_option("--burn-in", config.burn_in, "Gibbs sweeps per imputation");
        cmd->add_option("--workers", config.workers,
                        "Worker threads (0: RIPP_WORKERS env or hardware)");
        cmd->add_option("--format", format, "Output format: tsv|jsonl");
        cmd->add_option("--adjust", adjust,
                        "Comma list of bonferroni,holm,hochberg,hommel,randomization or 'all'");
    };

    auto* analyze = app.add_subcommand("analyze", "Test a dataset and adjust for multiplicity");
    analyze->add_option("--input", config.input_path, "CSV/TSV file, or - for stdin")->required();
    analyze->add_option("--schema", config.schema, "id=COL,cell=COL,z=COL,d=COL,y=C1:C2:...")
        ->required();
    analyze->add_option("--statistic", statistic, "itt|cace");
    analyze->add_option("--estimands", config.estimands,
                        "Comma list of CELL:OUTCOME ('*' cell = unfiltered); default all pairs");
    add_common(analyze);

    auto* simulate = app.add_subcommand("simulate", "Emit a synthetic observed dataset");
    simulate->add_option("--scenario", config.scenario,
                         "family/hypothesis[/correlation][/omega=X]")
        ->required();
    simulate->add_option("--n", config.scenario_n, "Units");
    simulate->add_option("--n-treated", config.scenario_treated, "Treated units");
    simulate->add_option("--seed", seed, "Master seed")->each([&](const std::string&) {
        seed_given = true;
    });

    auto* exact = app.add_subcommand("exact", "Enumerate the assignment space exactly");
    exact->add_option("--input", config.input_path, "CSV/TSV file, or - for stdin")->required();
    exact->add_option("--schema", config.schema, "id=COL,cell=COL,z=COL,d=COL,y=C1:C2:...")
        ->required();
    exact->add_option("--statistic", statistic, "itt|cace");
    exact->add_option("--estimands", config.estimands, "Comma list of CELL:OUTCOME");
    exact->add_option("--tail", tail, "Extremity convention: two|right|left");
    exact->add_option("--enum-limit", config.enum_limit, "Assignment-space cap");
    exact->add_option("--format", format, "Output format: tsv|jsonl");

    auto* replicate = app.add_subcommand("replicate", "Rejection-rate grid over replications");
    replicate->add_option("--scenario", config.scenario,
                          "family/hypothesis[/correlation][/omega=X]")
        ->required();
    replicate->add_option("--reps", config.reps, "Replications");
    replicate->add_option("--statistic", statistic, "itt|cace|both");
    replicate->add_option("--n", config.scenario_n, "Units");
    replicate->add_option("--n-treated", config.scenario_treated, "Treated units");
    add_common(replicate);

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) config.command = ripp::Command::analyze;
        if (simulate->parsed()) config.command = ripp::Command::simulate;
        if (exact->parsed()) config.command = ripp::Command::exact;
        if (replicate->parsed()) config.command = ripp::Command::replicate;

        if (seed_given) config.seed = seed;
        config.tail = parse_tail(tail);
        config.methods = parse_methods(adjust);
        if (statistic == "both") {
            if (!replicate->parsed())
                throw ripp::config_error("--statistic both applies to replicate only");
            config.replicate_statistics = {ripp::StatisticKind::itt, ripp::StatisticKind::cace};
        } else {
            config.statistic = parse_statistic(statistic);
            config.replicate_statistics = {config.statistic};
        }
        if (replicate->parsed() && !replicate->count("--statistic"))
            config.replicate_statistics = {ripp::StatisticKind::itt, ripp::StatisticKind::cace};
        if (format == "tsv") config.format = ripp::OutputFormat::tsv;
        else if (format == "jsonl") config.format = ripp::OutputFormat::jsonl;
        else throw ripp::config_error("unknown format: " + format);
    } catch (const ripp::config_error& e) {
        std::cerr << "error: config: " << e.what() << '\n';
        return ripp::kExitConfig;
    }

    return ripp::run(config, std::cout, std::cerr);
}
