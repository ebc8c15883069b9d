#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ripp {

// Principal stratum defined by the pair of potential treatment receipts.
// Under one-sided non-compliance only complier / never_taker occur in complete
// tables; always_taker / defier exist as data values for two-sided inputs.
// unknown marks a control unit whose stratum is not observable.
enum class ComplianceStatus : std::uint8_t {
    complier,
    never_taker,
    always_taker,
    defier,
    unknown,
};

const char* to_string(ComplianceStatus status);

struct ObservedUnit {
    std::string id;
    int cell = 0;              // pre-discretized covariate cell
    std::uint8_t z = 0;        // assignment (1 = treatment)
    std::uint8_t d_obs = 0;    // treatment receipt
    std::vector<int> y_obs;    // J outcome categories, each in [0, K)
};

struct ObservedDataset {
    std::vector<ObservedUnit> units;
    int j_outcomes = 0;   // J
    int k_categories = 0; // K
    int cell_count = 1;
    int n_treated = 0;    // number of z = 1 units

    int size() const { return static_cast<int>(units.size()); }

    // Checks shared J/K, category and cell ranges, one-sided consistency
    // (z = 0 implies d = 0), unique ids, and the n_treated count.
    void validate() const;
};

// Stratum implied by observed assignment and receipt (one-sided rule):
// z=1,d=1 -> complier; z=1,d=0 -> never_taker; z=0 -> unknown.
ComplianceStatus observed_compliance(std::uint8_t z, std::uint8_t d_obs);

std::vector<ComplianceStatus> derived_compliance(const ObservedDataset& obs);

// Potential receipt is a pure function of the stratum: D(0) = 0 always,
// D(1) = 1 iff complier.
inline std::uint8_t potential_receipt(ComplianceStatus status, std::uint8_t z) {
    return (z == 1 && status == ComplianceStatus::complier) ? std::uint8_t{1} : std::uint8_t{0};
}

struct ScienceUnit {
    std::string id;
    int cell = 0;
    ComplianceStatus compliance = ComplianceStatus::unknown;
    std::vector<int> y0;  // potential outcomes under control
    std::vector<int> y1;  // potential outcomes under treatment
};

// Complete potential-outcome table.  Compliance is never unknown here, and the
// one-sided setting restricts it to complier / never_taker.
struct ScienceTable {
    std::vector<ScienceUnit> units;
    int j_outcomes = 0;
    int k_categories = 0;
    int cell_count = 1;

    int size() const { return static_cast<int>(units.size()); }
    void validate() const;
};

// A ScienceTable whose potential outcomes agree (y0 == y1 per unit), i.e. the
// completion implied by the sharp null of zero effect for every unit.
struct CompleteNullTable {
    ScienceTable table;

    static CompleteNullTable from_science(ScienceTable table);  // checks y0 == y1
};

// Column-name schema for delimiter-separated input.  The delimiter is taken
// from the header row (tab when present, comma otherwise).
struct ColumnSchema {
    std::string id;
    std::string cell;
    std::string z;
    std::string d;
    std::vector<std::string> outcomes;
};

// Reads and validates a dataset; any malformed row, missing field,
// out-of-range value, duplicate id, or one-sidedness violation is reported
// with its 1-based file line number.  K and cell_count are inferred from the
// data (K at least 2).
ObservedDataset load_dataset(std::istream& in, const ColumnSchema& schema);

// Completes the table under the sharp null: y0 = y1 = y_obs, compliance as
// given (must contain no unknown entries).
CompleteNullTable impute_sharp_null(const ObservedDataset& obs,
                                    const std::vector<ComplianceStatus>& compliance);

// Masks a complete table under a hypothetical assignment: y_obs follows the
// assigned arm, receipt follows the stratum, everything else is hidden.
ObservedDataset reobserve(const ScienceTable& table, const std::vector<std::uint8_t>& z_hyp);
ObservedDataset reobserve(const CompleteNullTable& table, const std::vector<std::uint8_t>& z_hyp);

// Buffer-reusing form of reobserve: when out is already shaped for this table
// (same unit count), ids and cells are assumed in place and only z/d/y and the
// counters are rewritten.
void reobserve_into(const ScienceTable& table, const std::vector<std::uint8_t>& z_hyp,
                    ObservedDataset& out);

}  // namespace ripp
