#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ripp/data_model.hpp"

namespace ripp {

enum class StatisticKind { itt, cace };
enum class TailConvention { two_sided_abs, right_tail, left_tail };

const char* to_string(StatisticKind kind);
const char* to_string(TailConvention tail);

// One estimand: an outcome index, optionally restricted to one covariate cell.
struct EstimandDef {
    std::string label;
    std::optional<int> cell_filter;
    int outcome_index = 0;
};

// Difference in mean outcome scores between assigned arms within the
// estimand's subgroup.  Empty value when either arm is empty after filtering.
std::optional<double> try_itt(const ObservedDataset& obs, const EstimandDef& e);

// Maximum-likelihood estimate of the complier average effect under the
// exclusion restriction, for the saturated categorical mixture.  When the
// moment solution (the iv ratio itt_y / itt_d with within-subgroup rates) is
// a proper distribution it is the mle and is returned directly; otherwise a
// short em pass maximizes the constrained likelihood.  Empty when an arm is
// empty or no treated unit received (the receipt-rate difference is <= 0).
std::optional<double> try_cace(const ObservedDataset& obs, const EstimandDef& e);

// try_cace plus the boundary diagnostic: boundary means the unconstrained
// moment solution left the simplex and em truncation was applied.
struct CaceFit {
    double value = 0.0;
    bool boundary = false;
};
std::optional<CaceFit> cace_fit(const ObservedDataset& obs, const EstimandDef& e);

std::optional<double> try_statistic(StatisticKind kind, const ObservedDataset& obs,
                                    const EstimandDef& e);

// Throwing forms for observed-data use; degenerate subgroups are input errors.
double itt(const ObservedDataset& obs, const EstimandDef& e);
double cace(const ObservedDataset& obs, const EstimandDef& e);

std::vector<double> statistic_vector(const ObservedDataset& obs, StatisticKind kind,
                                     std::span<const EstimandDef> estimands);

// Transformed value compared with >= when counting extreme statistics.
inline double extremity(double t, TailConvention tail) {
    switch (tail) {
        case TailConvention::two_sided_abs: return t < 0 ? -t : t;
        case TailConvention::right_tail: return t;
        case TailConvention::left_tail: return -t;
    }
    return t;
}

// The cell x outcome cross product; a lone cell yields unfiltered estimands.
std::vector<EstimandDef> default_estimands(const ObservedDataset& obs);

}  // namespace ripp
