#include "ripp/imputation.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "ripp/errors.hpp"

namespace ripp {

namespace {

constexpr int kMaxPatternSpace = 1 << 20;

int class_index(ComplianceStatus status) {
    return status == ComplianceStatus::complier ? 0 : 1;
}

// P(complier | cell, pattern) under the current parameters.
double complier_prob(const ComplianceModelState& state, int cell, int pattern) {
    const double gc = state.eta_at(cell, 0)[pattern];
    const double gn = state.eta_at(cell, 1)[pattern];
    const double numerator = state.omega_c * gc;
    const double denominator = numerator + (1.0 - state.omega_c) * gn;
    if (denominator > 0.0) return numerator / denominator;
    // Underflow fallback: 1 / (1 + exp(log odds against)).
    const double log_num = std::log(state.omega_c) + std::log(gc);
    const double log_alt = std::log1p(-state.omega_c) + std::log(gn);
    if (!std::isfinite(log_num) && !std::isfinite(log_alt))
        throw std::logic_error("both class densities are zero at an observed pattern");
    return 1.0 / (1.0 + std::exp(log_alt - log_num));
}

// The per-outcome category count K implied by a state's pattern space.
int radix_for(const ComplianceModelState& state, std::size_t j_outcomes) {
    for (int k = 1; k <= state.n_patterns; ++k) {
        long total = 1;
        for (std::size_t j = 0; j < j_outcomes; ++j) total *= k;
        if (total == state.n_patterns) return k;
        if (total > state.n_patterns) break;
    }
    throw input_error("pattern space is not K^J for the unit's outcome count");
}

// Conjugate parameter step shared by the per-unit sweep and the grouped
// chain: counts are (cell * 2 + class) * n_patterns + pattern.
void draw_params_from_counts(ComplianceModelState& state, const CompliancePrior& prior,
                             std::span<const long> counts, long n_compliers,
                             long n_never_takers, Rng& rng) {
    state.omega_c = rbeta(rng, prior.omega_a + static_cast<double>(n_compliers),
                          prior.omega_b + static_cast<double>(n_never_takers));
    std::vector<double> alpha(state.n_patterns);
    for (int cell = 0; cell < state.n_cells; ++cell) {
        for (int cls = 0; cls < 2; ++cls) {
            const long* row = counts.data() + (static_cast<std::size_t>(cell) * 2 + cls) *
                                                  static_cast<std::size_t>(state.n_patterns);
            for (int q = 0; q < state.n_patterns; ++q)
                alpha[q] = prior.dirichlet_weight + static_cast<double>(row[q]);
            rdirichlet(rng, alpha, state.eta_at(cell, cls));
        }
    }
}

}  // namespace

void CompliancePrior::validate() const {
    if (!(omega_a > 0.0) || !(omega_b > 0.0) || !(dirichlet_weight > 0.0))
        throw config_error("compliance prior hyperparameters must be positive");
}

void ComplianceModelState::validate() const {
    if (!(omega_c > 0.0) || !(omega_c < 1.0))
        throw input_error("omega_c must lie strictly inside (0, 1)");
    if (static_cast<int>(eta.size()) != n_cells * 2)
        throw input_error("state must hold one eta vector per (cell, class)");
    for (const auto& v : eta) {
        if (static_cast<int>(v.size()) != n_patterns)
            throw input_error("eta vector length does not match the pattern space");
        double sum = 0.0;
        for (double x : v) sum += x;
        if (std::abs(sum - 1.0) > 1e-12) throw input_error("eta vector does not sum to 1");
    }
}

int pattern_index(std::span<const int> y, int k_categories) {
    long code = 0;
    for (int v : y) {
        if (v < 0 || v >= k_categories)
            throw input_error("outcome category " + std::to_string(v) +
                              " out of range for K=" + std::to_string(k_categories));
        code = code * k_categories + v;
        if (code > kMaxPatternSpace)
            throw input_error("outcome-pattern space too large");
    }
    return static_cast<int>(code);
}

int pattern_space_size(int k_categories, int j_outcomes) {
    long size = 1;
    for (int j = 0; j < j_outcomes; ++j) {
        size *= k_categories;
        if (size > kMaxPatternSpace)
            throw input_error("outcome-pattern space K^J exceeds " +
                              std::to_string(kMaxPatternSpace));
    }
    return static_cast<int>(size);
}

double complier_posterior_prob(const ObservedUnit& unit, const ComplianceModelState& state) {
    if (unit.z != 0)
        throw input_error("complier_posterior_prob applies to control units only");
    const int pattern = pattern_index(unit.y_obs, radix_for(state, unit.y_obs.size()));
    return complier_prob(state, unit.cell, pattern);
}

ComplianceModelState draw_state_from_prior(const CompliancePrior& prior, int n_cells,
                                           int n_patterns, Rng& rng) {
    prior.validate();
    ComplianceModelState state;
    state.n_cells = n_cells;
    state.n_patterns = n_patterns;
    state.omega_c = rbeta(rng, prior.omega_a, prior.omega_b);
    state.eta.assign(static_cast<std::size_t>(n_cells) * 2, std::vector<double>(n_patterns));
    const std::vector<double> alpha(n_patterns, prior.dirichlet_weight);
    for (auto& v : state.eta) rdirichlet(rng, alpha, v);
    return state;
}

std::pair<ComplianceModelState, std::vector<ComplianceStatus>> gibbs_sweep(
    const ComplianceModelState& state, const ObservedDataset& obs,
    const std::vector<ComplianceStatus>& current, const CompliancePrior& prior, Rng& rng) {
    if (current.size() != obs.units.size())
        throw input_error("compliance vector length does not match dataset size");

    const int n_patterns = state.n_patterns;
    std::vector<ComplianceStatus> next(current);
    std::vector<long> counts(static_cast<std::size_t>(state.n_cells) * 2 * n_patterns, 0);
    long n_compliers = 0, n_never_takers = 0;

    for (std::size_t i = 0; i < obs.units.size(); ++i) {
        const auto& unit = obs.units[i];
        const int pattern = pattern_index(unit.y_obs, obs.k_categories);
        if (unit.z == 0) {
            const double p = complier_prob(state, unit.cell, pattern);
            next[i] = rbernoulli(rng, p) ? ComplianceStatus::complier
                                         : ComplianceStatus::never_taker;
        } else {
            next[i] = observed_compliance(unit.z, unit.d_obs);
        }
        const int cls = class_index(next[i]);
        ++counts[(static_cast<std::size_t>(unit.cell) * 2 + cls) * n_patterns + pattern];
        if (cls == 0)
            ++n_compliers;
        else
            ++n_never_takers;
    }

    ComplianceModelState next_state = state;
    draw_params_from_counts(next_state, prior, counts, n_compliers, n_never_takers, rng);
    return {std::move(next_state), std::move(next)};
}

ImputationWorkspace ImputationWorkspace::build(const ObservedDataset& obs) {
    ImputationWorkspace ws;
    ws.n_units = obs.size();
    ws.n_cells = obs.cell_count;
    ws.n_patterns = pattern_space_size(obs.k_categories, obs.j_outcomes);
    if (static_cast<long>(ws.n_cells) * 2 * ws.n_patterns > (1 << 24))
        throw input_error("cell-by-pattern parameter space too large for imputation");
    ws.fixed_pattern_counts.assign(static_cast<std::size_t>(ws.n_cells) * 2 * ws.n_patterns, 0);
    ws.observed = derived_compliance(obs);

    std::map<std::pair<int, int>, int> group_of;  // (cell, pattern) -> group slot
    for (int i = 0; i < obs.size(); ++i) {
        const auto& unit = obs.units[i];
        const int pattern = pattern_index(unit.y_obs, obs.k_categories);
        if (unit.z == 1) {
            const int cls = class_index(ws.observed[i]);
            ++ws.fixed_pattern_counts[(static_cast<std::size_t>(unit.cell) * 2 + cls) *
                                          ws.n_patterns +
                                      pattern];
            if (cls == 0)
                ++ws.fixed_compliers;
            else
                ++ws.fixed_never_takers;
        } else {
            const auto key = std::make_pair(unit.cell, pattern);
            auto it = group_of.find(key);
            if (it == group_of.end()) {
                it = group_of.emplace(key, static_cast<int>(ws.groups.size())).first;
                ws.groups.push_back({unit.cell, pattern, {}});
            }
            ws.groups[it->second].unit_indices.push_back(i);
        }
    }
    return ws;
}

void impute_compliance_grouped(const ImputationWorkspace& ws, const CompliancePrior& prior,
                               int burn_in, Rng& rng, std::vector<ComplianceStatus>& out) {
    prior.validate();
    if (burn_in < 1) throw config_error("burn_in must be at least 1");

    ComplianceModelState state = draw_state_from_prior(prior, ws.n_cells, ws.n_patterns, rng);

    // Sufficient statistics per sweep: binomial complier counts per
    // (cell, pattern) group stand in for per-unit Bernoulli draws.
    std::vector<long> counts;
    for (int sweep = 0; sweep < burn_in - 1; ++sweep) {
        counts = ws.fixed_pattern_counts;
        long n_compliers = ws.fixed_compliers;
        long n_never_takers = ws.fixed_never_takers;
        for (const auto& g : ws.groups) {
            const double p = complier_prob(state, g.cell, g.pattern);
            const long total = static_cast<long>(g.unit_indices.size());
            const long c = rbinom(rng, total, p);
            counts[(static_cast<std::size_t>(g.cell) * 2 + 0) * ws.n_patterns + g.pattern] += c;
            counts[(static_cast<std::size_t>(g.cell) * 2 + 1) * ws.n_patterns + g.pattern] +=
                total - c;
            n_compliers += c;
            n_never_takers += total - c;
        }
        draw_params_from_counts(state, prior, counts, n_compliers, n_never_takers, rng);
    }

    // Final sweep's imputation step, materialized per unit; the trailing
    // parameter draw would be unused.
    out = ws.observed;
    for (const auto& g : ws.groups) {
        const double p = complier_prob(state, g.cell, g.pattern);
        for (int i : g.unit_indices)
            out[i] = rbernoulli(rng, p) ? ComplianceStatus::complier
                                        : ComplianceStatus::never_taker;
    }
}

std::vector<ComplianceStatus> impute_compliance(const ObservedDataset& obs,
                                                const CompliancePrior& prior, int burn_in,
                                                Rng& rng) {
    const auto ws = ImputationWorkspace::build(obs);
    std::vector<ComplianceStatus> out;
    impute_compliance_grouped(ws, prior, burn_in, rng, out);
    return out;
}

}  // namespace ripp
