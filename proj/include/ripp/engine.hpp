#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "ripp/adjusters.hpp"
#include "ripp/assignment.hpp"
#include "ripp/data_model.hpp"
#include "ripp/imputation.hpp"
#include "ripp/statistics.hpp"

namespace ripp {

// Whether a loop iteration imputes compliance before or after drawing the
// hypothetical assignment.  The two orders are statistically equivalent; the
// draw_first variant exists for the equivalence harness.
enum class StepOrder { impute_then_draw, draw_then_impute };

// How an iteration's substream is consumed.  split gives the assignment draw
// its own salted stream so that itt and cace runs with the same master seed
// see identical hypothetical assignments; sequential feeds one stream through
// both steps in StepOrder, which makes the order observable (used by the
// equivalence harness).
enum class StreamLayout { split, sequential };

// Joint null distribution: M rows of hypothetical statistics, one column per
// estimand.  Degenerate cells (no identified compliers in a hypothetical
// subgroup, or an empty arm) are flagged and handled conservatively.
struct IterationMatrix {
    int m_count = 0;
    int j_count = 0;
    TailConvention tail = TailConvention::two_sided_abs;
    std::vector<double> t_hyp;             // m_count x j_count, row-major
    std::vector<std::uint8_t> degenerate;  // same shape
    std::vector<std::uint64_t> iteration_seeds;

    double at(int m, int j) const { return t_hyp[static_cast<std::size_t>(m) * j_count + j]; }
    bool is_degenerate(int m, int j) const {
        return degenerate[static_cast<std::size_t>(m) * j_count + j] != 0;
    }
};

// Row-major probability matrix (hypothetical p-values).
struct ProbMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;

    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
};

struct EngineConfig {
    StatisticKind kind = StatisticKind::cace;
    TailConvention tail = TailConvention::two_sided_abs;
    int m_iterations = 10000;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    int burn_in = 50;
    int workers = 1;
    CompliancePrior prior{};

    void validate() const;
};

struct AnalysisResult {
    StatisticKind kind = StatisticKind::cace;
    TailConvention tail = TailConvention::two_sided_abs;
    std::vector<EstimandDef> estimands;
    std::vector<double> t_obs;
    std::vector<double> nominal_p;
    std::map<AdjustmentMethod, std::vector<double>> adjusted_p;
    double familywise_cutoff = 0.0;
    double achieved_alpha = 0.0;
    int m_iterations = 0;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    int burn_in = 0;
    std::vector<long> degenerate_counts;  // per estimand
};

// The M-iteration loop: per iteration, impute compliance under the null
// (skipped for itt, which never reads receipt), complete the table under the
// sharp null, draw a hypothetical assignment, re-observe, and evaluate every
// estimand.  Iteration m consumes only substreams keyed by (seed, m), so the
// result is identical for any worker count.
IterationMatrix run_iterations(const ObservedDataset& obs, StatisticKind kind,
                               std::span<const EstimandDef> estimands,
                               const CompliancePrior& prior, const AssignmentMechanism& mech,
                               int m_iterations, std::uint64_t master_seed, TailConvention tail,
                               int burn_in, int workers,
                               StepOrder order = StepOrder::impute_then_draw,
                               StreamLayout layout = StreamLayout::split);

// p_j = #{m : extremity(t_hyp[m][j]) >= extremity(t_obs[j])} / M.
// Degenerate cells count as non-extreme.
std::vector<double> nominal_pvalues(std::span<const double> t_obs, const IterationMatrix& it);

// Self-inclusive column ranks: p[m][j] = #{m' : e(t[m'][j]) >= e(t[m][j])} / M,
// computed by per-column sorting; degenerate cells receive p = 1.
ProbMatrix hypothetical_pvalue_matrix(const IterationMatrix& it);

// Westfall-Young style minimum-p adjustment referencing each nominal p-value
// against the null distribution of the row minima of p_hyp.
std::vector<double> adjust_randomization(std::span<const double> nominal,
                                         const ProbMatrix& p_hyp);

// Lower empirical alpha-quantile of the row minima: rejecting every
// nominal_j <= cutoff controls the familywise error at alpha.
double familywise_cutoff(const ProbMatrix& p_hyp, double alpha);

// Proportion of row minima at or below the cutoff (the level the discrete
// cutoff actually attains).
double achieved_alpha_at(const ProbMatrix& p_hyp, double cutoff);

// The full procedure: observed statistics, the M-iteration null, nominal and
// randomization-adjusted p-values, the familywise cutoff, and every
// closed-form adjustment of the nominal vector.
AnalysisResult analyze(const ObservedDataset& obs, std::span<const EstimandDef> estimands,
                       const EngineConfig& config);

// Exact p-values by enumerating the full assignment space of a complete table
// with known compliance.  Oracle support; throws limit_error when the space
// exceeds enum_limit.
std::vector<double> exact_pvalue(const ScienceTable& table, std::span<const double> t_obs,
                                 StatisticKind kind, std::span<const EstimandDef> estimands,
                                 const AssignmentMechanism& mech, TailConvention tail,
                                 std::uint64_t enum_limit);

// Monte Carlo estimate of the same fixed-compliance randomization p-value
// (random assignments instead of enumeration).
std::vector<double> mc_pvalue(const ScienceTable& table, std::span<const double> t_obs,
                              StatisticKind kind, std::span<const EstimandDef> estimands,
                              const AssignmentMechanism& mech, TailConvention tail,
                              int m_iterations, std::uint64_t master_seed);

}  // namespace ripp
