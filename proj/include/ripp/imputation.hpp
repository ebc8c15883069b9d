#pragma once

#include <span>
#include <utility>
#include <vector>

#include "ripp/data_model.hpp"
#include "ripp/rng.hpp"

namespace ripp {

// Conjugate hyperparameters: Beta(omega_a, omega_b) on the complier
// proportion, symmetric Dirichlet(dirichlet_weight) on every per-(cell, class)
// outcome-pattern distribution.
struct CompliancePrior {
    double omega_a = 1.0;
    double omega_b = 1.0;
    double dirichlet_weight = 1.0;

    void validate() const;
};

// Sampler state: the complier proportion and one probability vector over the
// K^J outcome-pattern space per (cell, class).  Class index 0 = complier,
// 1 = never_taker; vectors are stored at cell * 2 + class.
struct ComplianceModelState {
    double omega_c = 0.5;
    int n_cells = 1;
    int n_patterns = 1;
    std::vector<std::vector<double>> eta;

    const std::vector<double>& eta_at(int cell, int cls) const { return eta[cell * 2 + cls]; }
    std::vector<double>& eta_at(int cell, int cls) { return eta[cell * 2 + cls]; }

    void validate() const;  // omega in (0,1), each eta sums to 1 within 1e-12
};

// Mixed-radix pattern code with the last outcome least significant:
// (0,...,0) -> 0 and (K-1,...,K-1) -> K^J - 1.
int pattern_index(std::span<const int> y, int k_categories);

// K^J, guarded against absurd pattern spaces.
int pattern_space_size(int k_categories, int j_outcomes);

// P(complier | y, cell) for a control unit under the current state, computed
// with a log-space fallback when both mixture terms underflow.
double complier_posterior_prob(const ObservedUnit& unit, const ComplianceModelState& state);

ComplianceModelState draw_state_from_prior(const CompliancePrior& prior, int n_cells,
                                           int n_patterns, Rng& rng);

// One data-augmentation sweep: (a) redraw every control unit's status from its
// posterior probability under `state` (treated units stay at their observed
// statuses), then (b) redraw omega_c and every eta from the completed-data
// conjugate posteriors.
std::pair<ComplianceModelState, std::vector<ComplianceStatus>> gibbs_sweep(
    const ComplianceModelState& state, const ObservedDataset& obs,
    const std::vector<ComplianceStatus>& current, const CompliancePrior& prior, Rng& rng);

// Precomputed sufficient-statistic layout for fast repeated imputation: since
// a sweep's posterior probability depends on a control unit only through its
// (cell, pattern), the chain runs on per-group counts and per-unit statuses
// are materialized once at the end.  Distributionally identical to iterating
// gibbs_sweep.
struct ImputationWorkspace {
    struct ControlGroup {
        int cell = 0;
        int pattern = 0;
        std::vector<int> unit_indices;
    };

    int n_units = 0;
    int n_cells = 1;
    int n_patterns = 1;
    long fixed_compliers = 0;     // observed statuses among treated units
    long fixed_never_takers = 0;
    std::vector<long> fixed_pattern_counts;  // (cell * 2 + class) * n_patterns + pattern
    std::vector<ControlGroup> groups;
    std::vector<ComplianceStatus> observed;  // derived statuses (unknown for controls)

    static ImputationWorkspace build(const ObservedDataset& obs);
};

// Runs a fresh chain for burn_in sweeps (parameters initialized from the
// prior) and writes the final status draw; treated units keep their observed
// statuses.
void impute_compliance_grouped(const ImputationWorkspace& ws, const CompliancePrior& prior,
                               int burn_in, Rng& rng, std::vector<ComplianceStatus>& out);

std::vector<ComplianceStatus> impute_compliance(const ObservedDataset& obs,
                                                const CompliancePrior& prior, int burn_in,
                                                Rng& rng);

}  // namespace ripp
