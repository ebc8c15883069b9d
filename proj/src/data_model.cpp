#include "ripp/data_model.hpp"

#include <algorithm>
#include <istream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "ripp/errors.hpp"

namespace ripp {

const char* to_string(ComplianceStatus status) {
    switch (status) {
        case ComplianceStatus::complier: return "complier";
        case ComplianceStatus::never_taker: return "never_taker";
        case ComplianceStatus::always_taker: return "always_taker";
        case ComplianceStatus::defier: return "defier";
        case ComplianceStatus::unknown: return "unknown";
    }
    return "?";
}

ComplianceStatus observed_compliance(std::uint8_t z, std::uint8_t d_obs) {
    if (z == 0) return ComplianceStatus::unknown;
    return d_obs == 1 ? ComplianceStatus::complier : ComplianceStatus::never_taker;
}

std::vector<ComplianceStatus> derived_compliance(const ObservedDataset& obs) {
    std::vector<ComplianceStatus> out;
    out.reserve(obs.units.size());
    for (const auto& u : obs.units) out.push_back(observed_compliance(u.z, u.d_obs));
    return out;
}

void ObservedDataset::validate() const {
    if (j_outcomes < 1) throw input_error("dataset must have at least one outcome");
    if (k_categories < 2) throw input_error("dataset must have at least two outcome categories");
    if (cell_count < 1) throw input_error("dataset must have at least one covariate cell");
    int n1 = 0;
    std::unordered_set<std::string> seen_ids;
    seen_ids.reserve(units.size());
    for (std::size_t i = 0; i < units.size(); ++i) {
        const auto& u = units[i];
        const std::string where = "unit " + u.id + " (index " + std::to_string(i) + ")";
        if (!seen_ids.insert(u.id).second) throw input_error("duplicate unit id: " + u.id);
        if (u.z > 1 || u.d_obs > 1) throw input_error(where + ": z and d must be 0 or 1");
        if (u.z == 0 && u.d_obs == 1)
            throw input_error(where + ": one-sided violation (z=0 but d=1)");
        if (u.cell < 0 || u.cell >= cell_count) throw input_error(where + ": cell out of range");
        if (static_cast<int>(u.y_obs.size()) != j_outcomes)
            throw input_error(where + ": expected " + std::to_string(j_outcomes) + " outcomes");
        for (int y : u.y_obs)
            if (y < 0 || y >= k_categories)
                throw input_error(where + ": outcome category out of range");
        n1 += u.z;
    }
    if (n1 != n_treated)
        throw input_error("n_treated=" + std::to_string(n_treated) + " but counted " +
                          std::to_string(n1) + " treated units");
}

void ScienceTable::validate() const {
    if (j_outcomes < 1) throw input_error("science table must have at least one outcome");
    for (std::size_t i = 0; i < units.size(); ++i) {
        const auto& u = units[i];
        const std::string where = "science unit index " + std::to_string(i);
        if (u.compliance != ComplianceStatus::complier &&
            u.compliance != ComplianceStatus::never_taker)
            throw input_error(where + ": one-sided table requires complier or never_taker");
        if (u.cell < 0 || u.cell >= cell_count) throw input_error(where + ": cell out of range");
        if (static_cast<int>(u.y0.size()) != j_outcomes ||
            static_cast<int>(u.y1.size()) != j_outcomes)
            throw input_error(where + ": potential outcome length mismatch");
        for (int j = 0; j < j_outcomes; ++j)
            if (u.y0[j] < 0 || u.y0[j] >= k_categories || u.y1[j] < 0 || u.y1[j] >= k_categories)
                throw input_error(where + ": outcome category out of range");
    }
}

CompleteNullTable CompleteNullTable::from_science(ScienceTable table) {
    table.validate();
    for (std::size_t i = 0; i < table.units.size(); ++i)
        if (table.units[i].y0 != table.units[i].y1)
            throw input_error("unit index " + std::to_string(i) +
                              ": y0 != y1, table is not a sharp-null completion");
    return CompleteNullTable{std::move(table)};
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, delim)) fields.push_back(field);
    if (!line.empty() && line.back() == delim) fields.emplace_back();
    return fields;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \r\n");
    return s.substr(begin, end - begin + 1);
}

int parse_int_field(const std::string& raw, const std::string& column, int line_no) {
    const std::string s = trim(raw);
    if (s.empty())
        throw input_error("row " + std::to_string(line_no) + ": missing value in column '" +
                          column + "'");
    std::size_t pos = 0;
    int value = 0;
    try {
        value = std::stoi(s, &pos);
    } catch (const std::exception&) {
        throw input_error("row " + std::to_string(line_no) + ": non-numeric value '" + s +
                          "' in column '" + column + "'");
    }
    if (pos != s.size())
        throw input_error("row " + std::to_string(line_no) + ": non-numeric value '" + s +
                          "' in column '" + column + "'");
    return value;
}

}  // namespace

ObservedDataset load_dataset(std::istream& in, const ColumnSchema& schema) {
    if (schema.id.empty() || schema.cell.empty() || schema.z.empty() || schema.d.empty() ||
        schema.outcomes.empty())
        throw config_error("schema must name id, cell, z, d and at least one outcome column");

    // '#' lines are comments (reports embed their configuration that way).
    std::string header;
    int line_no = 0;
    for (;;) {
        if (!std::getline(in, header)) throw input_error("empty input: missing header row");
        ++line_no;
        if (!trim(header).empty() && trim(header)[0] != '#') break;
    }
    const char delim = header.find('\t') != std::string::npos ? '\t' : ',';

    const auto header_fields = split_line(header, delim);
    std::unordered_map<std::string, int> column_of;
    for (std::size_t c = 0; c < header_fields.size(); ++c) column_of[trim(header_fields[c])] = static_cast<int>(c);

    auto require_column = [&](const std::string& name) {
        const auto it = column_of.find(name);
        if (it == column_of.end()) throw input_error("header is missing column '" + name + "'");
        return it->second;
    };
    const int col_id = require_column(schema.id);
    const int col_cell = require_column(schema.cell);
    const int col_z = require_column(schema.z);
    const int col_d = require_column(schema.d);
    std::vector<int> col_y;
    col_y.reserve(schema.outcomes.size());
    for (const auto& name : schema.outcomes) col_y.push_back(require_column(name));

    ObservedDataset out;
    out.j_outcomes = static_cast<int>(col_y.size());
    int max_cell = 0;
    int max_category = 1;

    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string trimmed = trim(line);
        if (trimmed.empty() || trimmed[0] == '#') continue;
        const auto fields = split_line(line, delim);
        if (fields.size() != header_fields.size())
            throw input_error("row " + std::to_string(line_no) + ": expected " +
                              std::to_string(header_fields.size()) + " fields, got " +
                              std::to_string(fields.size()));

        ObservedUnit unit;
        unit.id = trim(fields[col_id]);
        if (unit.id.empty())
            throw input_error("row " + std::to_string(line_no) + ": missing value in column '" +
                              schema.id + "'");
        unit.cell = parse_int_field(fields[col_cell], schema.cell, line_no);
        const int z = parse_int_field(fields[col_z], schema.z, line_no);
        const int d = parse_int_field(fields[col_d], schema.d, line_no);
        if (z != 0 && z != 1)
            throw input_error("row " + std::to_string(line_no) + ": z must be 0 or 1");
        if (d != 0 && d != 1)
            throw input_error("row " + std::to_string(line_no) + ": d must be 0 or 1");
        if (z == 0 && d == 1)
            throw input_error("row " + std::to_string(line_no) +
                              ": one-sided violation at row (z=0 but d=1)");
        unit.z = static_cast<std::uint8_t>(z);
        unit.d_obs = static_cast<std::uint8_t>(d);
        if (unit.cell < 0)
            throw input_error("row " + std::to_string(line_no) + ": cell must be nonnegative");
        if (unit.cell > 1000000)
            throw input_error("row " + std::to_string(line_no) +
                              ": cell index implausibly large (cells are dense 0-based indices)");

        unit.y_obs.reserve(col_y.size());
        for (std::size_t j = 0; j < col_y.size(); ++j) {
            const int y = parse_int_field(fields[col_y[j]], schema.outcomes[j], line_no);
            if (y < 0)
                throw input_error("row " + std::to_string(line_no) +
                                  ": outcome category must be nonnegative");
            max_category = std::max(max_category, y);
            unit.y_obs.push_back(y);
        }
        max_cell = std::max(max_cell, unit.cell);
        out.n_treated += unit.z;
        out.units.push_back(std::move(unit));
    }

    out.k_categories = max_category + 1;
    out.cell_count = max_cell + 1;
    out.validate();
    return out;
}

CompleteNullTable impute_sharp_null(const ObservedDataset& obs,
                                    const std::vector<ComplianceStatus>& compliance) {
    if (compliance.size() != obs.units.size())
        throw input_error("compliance vector length does not match dataset size");
    ScienceTable table;
    table.j_outcomes = obs.j_outcomes;
    table.k_categories = obs.k_categories;
    table.cell_count = obs.cell_count;
    table.units.reserve(obs.units.size());
    for (std::size_t i = 0; i < obs.units.size(); ++i) {
        if (compliance[i] == ComplianceStatus::unknown)
            throw input_error("unit index " + std::to_string(i) +
                              ": compliance is unknown; impute it first");
        ScienceUnit u;
        u.id = obs.units[i].id;
        u.cell = obs.units[i].cell;
        u.compliance = compliance[i];
        u.y0 = obs.units[i].y_obs;
        u.y1 = obs.units[i].y_obs;
        table.units.push_back(std::move(u));
    }
    return CompleteNullTable::from_science(std::move(table));
}

void reobserve_into(const ScienceTable& table, const std::vector<std::uint8_t>& z_hyp,
                    ObservedDataset& out) {
    const std::size_t n = table.units.size();
    if (z_hyp.size() != n)
        throw input_error("assignment vector length " + std::to_string(z_hyp.size()) +
                          " does not match table size " + std::to_string(n));

    const bool shaped = out.units.size() == n && out.j_outcomes == table.j_outcomes;
    if (!shaped) {
        out.units.assign(n, ObservedUnit{});
        for (std::size_t i = 0; i < n; ++i) {
            out.units[i].id = table.units[i].id;
            out.units[i].cell = table.units[i].cell;
            out.units[i].y_obs.resize(table.j_outcomes);
        }
    }
    out.j_outcomes = table.j_outcomes;
    out.k_categories = table.k_categories;
    out.cell_count = table.cell_count;

    int n1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& src = table.units[i];
        auto& dst = out.units[i];
        const std::uint8_t z = z_hyp[i] ? 1 : 0;
        dst.z = z;
        dst.d_obs = potential_receipt(src.compliance, z);
        const auto& y = z ? src.y1 : src.y0;
        std::copy(y.begin(), y.end(), dst.y_obs.begin());
        n1 += z;
    }
    out.n_treated = n1;
}

ObservedDataset reobserve(const ScienceTable& table, const std::vector<std::uint8_t>& z_hyp) {
    ObservedDataset out;
    reobserve_into(table, z_hyp, out);
    return out;
}

ObservedDataset reobserve(const CompleteNullTable& table, const std::vector<std::uint8_t>& z_hyp) {
    return reobserve(table.table, z_hyp);
}

}  // namespace ripp
