#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ripp/adjusters.hpp"
#include "ripp/data_model.hpp"
#include "ripp/engine.hpp"
#include "ripp/rng.hpp"
#include "ripp/statistics.hpp"

namespace ripp {

// Simulation families: a single ordinal outcome with one-sided non-compliance,
// three outcomes under full compliance, and the combined setting with three
// outcomes plus non-compliance.
enum class Family { noncompliance_single, multiple_no_compliance, combined };

// null_effect / alt for the first two families; alt1..alt3 (increasing effect
// sizes) for the combined family.
enum class Hypothesis { null_effect, alt, alt1, alt2, alt3 };

enum class Correlation { zero, partial, perfect };

const char* to_string(Family family);
const char* to_string(Hypothesis hypothesis);
const char* to_string(Correlation correlation);

struct ScenarioSpec {
    Family family = Family::noncompliance_single;
    Hypothesis hypothesis = Hypothesis::null_effect;
    Correlation correlation = Correlation::zero;
    double omega_c = 0.1;  // super-population complier proportion
    int n_units = 1000;
    int n_treated = 500;
    int j_outcomes = 1;    // fixed by family: 1 or 3

    static ScenarioSpec for_family(Family family);
    void validate() const;
    std::string name() const;
};

// "family/hypothesis[/correlation][/omega=X]" tokens, e.g.
// "combined/alt1/partial/omega=.3".
ScenarioSpec parse_scenario(const std::string& text);

// One outcome category from the scenario's marginal table for the given
// stratum and arm (arm: 0 = control, 1 = treatment).
int draw_marginal(ComplianceStatus cls, int arm, Hypothesis hypothesis, Family family, Rng& rng);

// Correlates a triple of outcomes: zero leaves them independent, partial
// copies the first coordinate with probabilities 1/2 and 1/3 (+1/3 via the
// second), perfect copies it into both.
std::array<int, 3> apply_correlation(int first, const std::function<int()>& second_fresh,
                                     const std::function<int()>& third_fresh, Correlation mode,
                                     Rng& rng);

// Complete potential-outcome table: i.i.d. Bernoulli(omega_c) strata, then
// per-arm outcome draws from the marginals with the requested correlation
// structure (arms correlated independently of one another).
ScienceTable generate(const ScenarioSpec& spec, Rng& rng);

struct MethodCombo {
    StatisticKind kind;
    AdjustmentMethod method;
};

struct RejectionRates {
    std::vector<MethodCombo> combos;
    std::vector<double> rate;
    std::vector<double> mc_se;
    int reps = 0;
};

// Replication grid: generate -> actual assignment -> re-observe -> analyze,
// recording whether each method's smallest adjusted p-value is at or below
// alpha.  Deterministic per (master seed, rep index); reps run in parallel.
RejectionRates replicate(const ScenarioSpec& spec, std::span<const MethodCombo> combos, int reps,
                         int m_iterations, double alpha, int burn_in, std::uint64_t master_seed,
                         int workers, TailConvention tail = TailConvention::two_sided_abs);

}  // namespace ripp
