#pragma once

#include <string>
#include <vector>

#include "ripp/data_model.hpp"

namespace ripp::test {

// Small hand-built dataset: one unit per (z, d, y...) row, single cell.
inline ObservedDataset make_dataset(const std::vector<std::vector<int>>& rows, int j_outcomes,
                                    int k_categories, int cell_count = 1) {
    ObservedDataset obs;
    obs.j_outcomes = j_outcomes;
    obs.k_categories = k_categories;
    obs.cell_count = cell_count;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        ObservedUnit u;
        u.id = std::to_string(i + 1);
        int field = 0;
        u.cell = cell_count > 1 ? row[field++] : 0;
        u.z = static_cast<std::uint8_t>(row[field++]);
        u.d_obs = static_cast<std::uint8_t>(row[field++]);
        u.y_obs.assign(row.begin() + field, row.end());
        obs.n_treated += u.z;
        obs.units.push_back(std::move(u));
    }
    obs.validate();
    return obs;
}

inline std::string fixture_path(const std::string& name) {
    return std::string(RIPP_SOURCE_DIR) + "/tests/data/" + name;
}

}  // namespace ripp::test
