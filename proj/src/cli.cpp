#include "ripp/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ripp/engine.hpp"
#include "ripp/errors.hpp"
#include "ripp/simgen.hpp"

namespace ripp {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<std::string> split(const std::string& text, char delim) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(text);
    while (std::getline(ss, item, delim)) out.push_back(item);
    return out;
}

// p-values are printed with enough decimals to recover the count out of M.
std::string format_p(double p, int m_iterations) {
    const int digits =
        std::max(6, static_cast<int>(std::ceil(std::log10(static_cast<double>(m_iterations)))) + 1);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, p);
    return buf;
}

std::string format_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::uint64_t fresh_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

struct LabeledEstimands {
    std::vector<EstimandDef> defs;
};

// Estimand labels use the schema's outcome column names so reports read like
// the input file.
LabeledEstimands schema_estimands(const ObservedDataset& obs, const ColumnSchema& schema) {
    LabeledEstimands out;
    for (int c = 0; c < obs.cell_count; ++c) {
        for (int j = 0; j < obs.j_outcomes; ++j) {
            EstimandDef e;
            e.outcome_index = j;
            if (obs.cell_count > 1) {
                e.cell_filter = c;
                e.label = schema.cell + "=" + std::to_string(c) + ":" + schema.outcomes[j];
            } else {
                e.label = schema.outcomes[j];
            }
            out.defs.push_back(std::move(e));
        }
    }
    return out;
}

std::ifstream open_file(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw input_error("cannot open input file: " + path);
    return file;
}

ObservedDataset load_from(const RunConfig& config, const ColumnSchema& schema) {
    if (config.input_path.empty()) throw config_error("--input is required");
    if (config.input_path == "-") return load_dataset(std::cin, schema);
    auto file = open_file(config.input_path);
    return load_dataset(file, schema);
}

void emit_config_comment(std::ostream& out, const RunConfig& config, std::uint64_t seed,
                         const std::string& command) {
    out << "# ripp " << command << '\n';
    out << "# statistic=" << to_string(config.statistic) << " tail=" << to_string(config.tail)
        << " m=" << config.m_iterations << " alpha=" << format_num(config.alpha)
        << " burn_in=" << config.burn_in << " seed=" << seed << '\n';
}

ordered_json metadata_json(const RunConfig& config, std::uint64_t seed,
                           const std::string& command) {
    ordered_json meta;
    meta["kind"] = "metadata";
    meta["command"] = command;
    meta["statistic"] = to_string(config.statistic);
    meta["tail"] = to_string(config.tail);
    meta["m"] = config.m_iterations;
    meta["alpha"] = config.alpha;
    meta["burn_in"] = config.burn_in;
    meta["seed"] = seed;
    return meta;
}

int run_analyze(const RunConfig& config, std::ostream& out) {
    const ColumnSchema schema = parse_schema(config.schema);
    const ObservedDataset obs = load_from(config, schema);

    std::vector<EstimandDef> estimands = config.estimands.empty()
                                             ? schema_estimands(obs, schema).defs
                                             : parse_estimands(config.estimands, schema);

    EngineConfig engine;
    engine.kind = config.statistic;
    engine.tail = config.tail;
    engine.m_iterations = config.m_iterations;
    engine.alpha = config.alpha;
    engine.burn_in = config.burn_in;
    engine.seed = config.seed.value_or(fresh_seed());
    engine.workers = resolve_workers(config.workers);

    const AnalysisResult result = analyze(obs, estimands, engine);

    long total_degenerate = 0;
    for (long c : result.degenerate_counts) total_degenerate += c;

    if (config.format == OutputFormat::tsv) {
        emit_config_comment(out, config, engine.seed, "analyze");
        out << "# familywise_cutoff=" << format_p(result.familywise_cutoff, result.m_iterations)
            << " achieved_alpha=" << format_p(result.achieved_alpha, result.m_iterations)
            << " degenerate_iterations=" << total_degenerate << '\n';
        out << "label\teffect\tp_nominal";
        for (const auto method : config.methods) out << "\tp_" << to_string(method);
        out << '\n';
        for (std::size_t j = 0; j < estimands.size(); ++j) {
            out << estimands[j].label << '\t' << format_num(result.t_obs[j]) << '\t'
                << format_p(result.nominal_p[j], result.m_iterations);
            for (const auto method : config.methods)
                out << '\t' << format_p(result.adjusted_p.at(method)[j], result.m_iterations);
            out << '\n';
        }
    } else {
        for (std::size_t j = 0; j < estimands.size(); ++j) {
            ordered_json row;
            row["label"] = estimands[j].label;
            row["effect"] = result.t_obs[j];
            row["p_nominal"] = result.nominal_p[j];
            row["p_bonferroni"] = result.adjusted_p.at(AdjustmentMethod::bonferroni)[j];
            row["p_holm"] = result.adjusted_p.at(AdjustmentMethod::holm)[j];
            row["p_hochberg"] = result.adjusted_p.at(AdjustmentMethod::hochberg)[j];
            row["p_hommel"] = result.adjusted_p.at(AdjustmentMethod::hommel)[j];
            row["p_randomization"] = result.adjusted_p.at(AdjustmentMethod::randomization)[j];
            out << row.dump() << '\n';
        }
        ordered_json meta = metadata_json(config, engine.seed, "analyze");
        meta["familywise_cutoff"] = result.familywise_cutoff;
        meta["achieved_alpha"] = result.achieved_alpha;
        meta["degenerate_iterations"] = total_degenerate;
        out << meta.dump() << '\n';
    }
    return kExitOk;
}

ScenarioSpec scenario_from(const RunConfig& config) {
    if (config.scenario.empty()) throw config_error("--scenario is required");
    ScenarioSpec spec = parse_scenario(config.scenario);
    if (config.scenario_n) spec.n_units = *config.scenario_n;
    if (config.scenario_treated) spec.n_treated = *config.scenario_treated;
    spec.validate();
    return spec;
}

int run_simulate(const RunConfig& config, std::ostream& out) {
    const ScenarioSpec spec = scenario_from(config);
    const std::uint64_t seed = config.seed.value_or(fresh_seed());

    Rng rng(derive_key(seed, 0x5151));
    const ScienceTable truth = generate(spec, rng);
    const CompleteRandomization mech(spec.n_units, spec.n_treated);
    std::vector<std::uint8_t> z;
    mech.draw_into(z, rng);
    const ObservedDataset obs = reobserve(truth, z);

    out << "# ripp simulate scenario=" << spec.name() << " n=" << spec.n_units
        << " treated=" << spec.n_treated << " seed=" << seed << '\n';
    out << "id,cell,z,d";
    for (int j = 0; j < obs.j_outcomes; ++j) out << ",y" << (j + 1);
    out << '\n';
    for (const auto& u : obs.units) {
        out << u.id << ',' << u.cell << ',' << int(u.z) << ',' << int(u.d_obs);
        for (int y : u.y_obs) out << ',' << y;
        out << '\n';
    }
    return kExitOk;
}

int run_exact(const RunConfig& config, std::ostream& out) {
    const ColumnSchema schema = parse_schema(config.schema);
    const ObservedDataset obs = load_from(config, schema);
    std::vector<EstimandDef> estimands = config.estimands.empty()
                                             ? schema_estimands(obs, schema).defs
                                             : parse_estimands(config.estimands, schema);

    // The enumeration oracle needs known compliance.  ITT never reads receipt;
    // CACE requires a fully compliant dataset so every stratum is determined.
    if (config.statistic == StatisticKind::cace)
        for (const auto& u : obs.units)
            if (u.z == 1 && u.d_obs == 0)
                throw input_error(
                    "exact cace p-values require a fully compliant dataset (unit " + u.id +
                    " has z=1, d=0)");
    std::vector<ComplianceStatus> compliance(obs.units.size(), ComplianceStatus::complier);
    const CompleteNullTable table = impute_sharp_null(obs, compliance);

    const std::vector<double> t_obs = statistic_vector(obs, config.statistic, estimands);
    const CompleteRandomization mech = CompleteRandomization::from_observed(obs);
    const std::vector<double> p = exact_pvalue(table.table, t_obs, config.statistic, estimands,
                                               mech, config.tail, config.enum_limit);
    const auto n_assignments = mech.space_size(config.enum_limit);

    if (config.format == OutputFormat::tsv) {
        out << "# ripp exact statistic=" << to_string(config.statistic)
            << " tail=" << to_string(config.tail) << " assignments=" << n_assignments << '\n';
        out << "label\teffect\tp_exact\n";
        for (std::size_t j = 0; j < estimands.size(); ++j)
            out << estimands[j].label << '\t' << format_num(t_obs[j]) << '\t'
                << format_p(p[j], static_cast<int>(n_assignments)) << '\n';
    } else {
        for (std::size_t j = 0; j < estimands.size(); ++j) {
            ordered_json row;
            row["label"] = estimands[j].label;
            row["effect"] = t_obs[j];
            row["p_exact"] = p[j];
            out << row.dump() << '\n';
        }
        ordered_json meta;
        meta["kind"] = "metadata";
        meta["command"] = "exact";
        meta["statistic"] = to_string(config.statistic);
        meta["tail"] = to_string(config.tail);
        meta["assignments"] = n_assignments;
        out << meta.dump() << '\n';
    }
    return kExitOk;
}

int run_replicate(const RunConfig& config, std::ostream& out) {
    const ScenarioSpec spec = scenario_from(config);
    const std::uint64_t seed = config.seed.value_or(fresh_seed());

    std::vector<MethodCombo> combos;
    for (const auto kind : config.replicate_statistics)
        for (const auto method : config.methods) combos.push_back({kind, method});

    const RejectionRates rates =
        replicate(spec, combos, config.reps, config.m_iterations, config.alpha, config.burn_in,
                  seed, resolve_workers(config.workers));

    if (config.format == OutputFormat::tsv) {
        out << "# ripp replicate scenario=" << spec.name() << " reps=" << config.reps
            << " m=" << config.m_iterations << " alpha=" << format_num(config.alpha)
            << " burn_in=" << config.burn_in << " n=" << spec.n_units
            << " treated=" << spec.n_treated << " seed=" << seed << '\n';
        out << "statistic\tmethod\trejection_rate\tmc_se\n";
        for (std::size_t c = 0; c < combos.size(); ++c)
            out << to_string(combos[c].kind) << '\t' << to_string(combos[c].method) << '\t'
                << format_num(rates.rate[c]) << '\t' << format_num(rates.mc_se[c]) << '\n';
    } else {
        for (std::size_t c = 0; c < combos.size(); ++c) {
            ordered_json row;
            row["statistic"] = to_string(combos[c].kind);
            row["method"] = to_string(combos[c].method);
            row["rejection_rate"] = rates.rate[c];
            row["mc_se"] = rates.mc_se[c];
            out << row.dump() << '\n';
        }
        ordered_json meta;
        meta["kind"] = "metadata";
        meta["command"] = "replicate";
        meta["scenario"] = spec.name();
        meta["reps"] = config.reps;
        meta["m"] = config.m_iterations;
        meta["alpha"] = config.alpha;
        meta["burn_in"] = config.burn_in;
        meta["seed"] = seed;
        out << meta.dump() << '\n';
    }
    return kExitOk;
}

}  // namespace

ColumnSchema parse_schema(const std::string& text) {
    if (text.empty())
        throw config_error("--schema is required (id=COL,cell=COL,z=COL,d=COL,y=C1:C2:...)");
    ColumnSchema schema;
    for (const auto& part : split(text, ',')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos) throw config_error("bad schema token: " + part);
        const std::string key = part.substr(0, eq);
        const std::string value = part.substr(eq + 1);
        if (value.empty()) throw config_error("empty column name in schema token: " + part);
        if (key == "id") schema.id = value;
        else if (key == "cell") schema.cell = value;
        else if (key == "z") schema.z = value;
        else if (key == "d") schema.d = value;
        else if (key == "y") schema.outcomes = split(value, ':');
        else throw config_error("unknown schema key: " + key);
    }
    if (schema.id.empty() || schema.cell.empty() || schema.z.empty() || schema.d.empty() ||
        schema.outcomes.empty())
        throw config_error("schema must name id, cell, z, d and at least one outcome column");
    return schema;
}

std::vector<EstimandDef> parse_estimands(const std::string& text, const ColumnSchema& schema) {
    std::vector<EstimandDef> out;
    for (const auto& token : split(text, ',')) {
        const auto colon = token.find(':');
        if (colon == std::string::npos)
            throw config_error("bad estimand token (want CELL:OUTCOME): " + token);
        const std::string cell = token.substr(0, colon);
        const std::string outcome = token.substr(colon + 1);
        EstimandDef e;
        try {
            e.outcome_index = std::stoi(outcome);
        } catch (const std::exception&) {
            throw config_error("bad outcome index in estimand token: " + token);
        }
        if (e.outcome_index < 0 || e.outcome_index >= static_cast<int>(schema.outcomes.size()))
            throw config_error("outcome index out of schema range in token: " + token);
        if (cell == "*") {
            e.label = schema.outcomes[e.outcome_index];
        } else {
            try {
                e.cell_filter = std::stoi(cell);
            } catch (const std::exception&) {
                throw config_error("bad cell index in estimand token: " + token);
            }
            e.label = schema.cell + "=" + cell + ":" + schema.outcomes[e.outcome_index];
        }
        out.push_back(std::move(e));
    }
    if (out.empty()) throw config_error("no estimands given");
    return out;
}

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("RIPP_WORKERS")) {
        try {
            const int value = std::stoi(env);
            if (value > 0) return value;
        } catch (const std::exception&) {
            // fall through to the hardware default
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        switch (config.command) {
            case Command::analyze: return run_analyze(config, out);
            case Command::simulate: return run_simulate(config, out);
            case Command::exact: return run_exact(config, out);
            case Command::replicate: return run_replicate(config, out);
        }
        throw config_error("unknown command");
    } catch (const limit_error& e) {
        err << "error: limit: " << e.what() << '\n';
        return kExitLimit;
    } catch (const config_error& e) {
        err << "error: config: " << e.what() << '\n';
        return kExitConfig;
    } catch (const input_error& e) {
        err << "error: input: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace ripp
