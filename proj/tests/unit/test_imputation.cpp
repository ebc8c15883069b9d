#include <doctest.h>

#include <cmath>
#include <numeric>

#include "ripp/assignment.hpp"
#include "ripp/errors.hpp"
#include "ripp/imputation.hpp"
#include "ripp/simgen.hpp"
#include "test_support.hpp"

using namespace ripp;

namespace {

ComplianceModelState single_outcome_state(double omega, std::vector<double> eta_c,
                                          std::vector<double> eta_n) {
    ComplianceModelState state;
    state.omega_c = omega;
    state.n_cells = 1;
    state.n_patterns = static_cast<int>(eta_c.size());
    state.eta = {std::move(eta_c), std::move(eta_n)};
    return state;
}

ObservedUnit control_unit(int y) {
    ObservedUnit u;
    u.id = "c";
    u.z = 0;
    u.d_obs = 0;
    u.y_obs = {y};
    return u;
}

ObservedDataset sim_observed(std::uint64_t seed, Hypothesis hyp = Hypothesis::null_effect) {
    ScenarioSpec spec = ScenarioSpec::for_family(Family::noncompliance_single);
    spec.hypothesis = hyp;
    Rng rng(seed);
    const auto truth = generate(spec, rng);
    const CompleteRandomization mech(spec.n_units, spec.n_treated);
    std::vector<std::uint8_t> z;
    mech.draw_into(z, rng);
    return reobserve(truth, z);
}

}  // namespace

TEST_SUITE_BEGIN("imputation");

TEST_CASE("pattern_index is the mixed-radix code") {
    CHECK(pattern_index(std::vector<int>{0, 0, 0}, 2) == 0);
    CHECK(pattern_index(std::vector<int>{0, 0, 1}, 2) == 1);
    CHECK(pattern_index(std::vector<int>{1, 1, 1}, 2) == 7);
    CHECK(pattern_index(std::vector<int>{2}, 3) == 2);
    CHECK(pattern_space_size(2, 3) == 8);
    CHECK(pattern_space_size(3, 3) == 27);
    CHECK_THROWS_AS(pattern_index(std::vector<int>{3}, 3), input_error);
    CHECK_THROWS_AS(pattern_space_size(10, 12), input_error);
}

TEST_CASE("complier_posterior_prob follows bayes rule") {
    const auto state = single_outcome_state(0.1, {0.45, 0.45, 0.10}, {0.02, 0.02, 0.96});

    SUBCASE("appendix-style numbers") {
        CHECK(complier_posterior_prob(control_unit(0), state) ==
              doctest::Approx(0.045 / 0.063).epsilon(1e-12));
    }
    SUBCASE("equal densities return omega") {
        const auto flat = single_outcome_state(0.37, {0.5, 0.5}, {0.5, 0.5});
        CHECK(complier_posterior_prob(control_unit(1), flat) == doctest::Approx(0.37));
    }
    SUBCASE("omega near one dominates") {
        const auto sure = single_outcome_state(1.0 - 1e-13, {0.45, 0.45, 0.10},
                                               {0.02, 0.02, 0.96});
        CHECK(complier_posterior_prob(control_unit(2), sure) == doctest::Approx(1.0));
    }
    SUBCASE("monotone in omega") {
        double previous = 0.0;
        for (double omega : {0.05, 0.2, 0.5, 0.8, 0.95}) {
            const auto s = single_outcome_state(omega, {0.45, 0.45, 0.10}, {0.02, 0.02, 0.96});
            const double p = complier_posterior_prob(control_unit(1), s);
            CHECK(p > previous);
            previous = p;
        }
    }
    SUBCASE("treated units are rejected") {
        ObservedUnit treated;
        treated.z = 1;
        treated.d_obs = 1;
        treated.y_obs = {0};
        CHECK_THROWS_AS(complier_posterior_prob(treated, state), input_error);
    }
}

TEST_CASE("gibbs_sweep fixes treated statuses and redraws the rest") {
    const auto obs = test::make_dataset({{1, 1, 0}, {1, 0, 2}, {0, 0, 1}, {0, 0, 2}}, 1, 3);
    const auto state = single_outcome_state(0.5, {0.45, 0.45, 0.10}, {0.02, 0.02, 0.96});
    Rng rng(5);
    const auto current = derived_compliance(obs);
    const auto [next_state, next] = gibbs_sweep(state, obs, current, CompliancePrior{}, rng);
    CHECK(next[0] == ComplianceStatus::complier);
    CHECK(next[1] == ComplianceStatus::never_taker);
    for (std::size_t i = 2; i < next.size(); ++i)
        CHECK((next[i] == ComplianceStatus::complier || next[i] == ComplianceStatus::never_taker));
    CHECK_NOTHROW(next_state.validate());
}

TEST_CASE("gibbs_sweep with no control units only redraws parameters") {
    const auto obs = test::make_dataset({{1, 1, 0}, {1, 0, 2}, {1, 1, 1}}, 1, 3);
    const auto state = single_outcome_state(0.5, {0.45, 0.45, 0.10}, {0.02, 0.02, 0.96});
    Rng rng(6);
    const auto current = derived_compliance(obs);
    const auto [next_state, next] = gibbs_sweep(state, obs, current, CompliancePrior{}, rng);
    CHECK(next == current);
    CHECK_NOTHROW(next_state.validate());
}

TEST_CASE("a lopsided omega prior forces complier imputations") {
    const auto obs = test::make_dataset({{1, 1, 0}, {0, 0, 2}, {0, 0, 1}, {0, 0, 0}}, 1, 3);
    CompliancePrior prior;
    prior.omega_a = 1e9;
    prior.omega_b = 1e-6;
    Rng rng(7);
    int complier_draws = 0, total = 0;
    for (int rep = 0; rep < 300; ++rep) {
        const auto imputed = impute_compliance(obs, prior, 5, rng);
        for (std::size_t i = 1; i < imputed.size(); ++i) {
            complier_draws += imputed[i] == ComplianceStatus::complier ? 1 : 0;
            ++total;
        }
    }
    CHECK(static_cast<double>(complier_draws) / total > 0.999);
}

TEST_CASE("posterior concentrates near the generating complier share") {
    const auto obs = sim_observed(11);
    const auto ws = ImputationWorkspace::build(obs);
    REQUIRE(ws.n_patterns == 3);

    CompliancePrior prior;
    Rng rng(12);
    auto state = draw_state_from_prior(prior, 1, 3, rng);
    auto compliance = derived_compliance(obs);
    for (auto& c : compliance)
        if (c == ComplianceStatus::unknown) c = ComplianceStatus::never_taker;

    double omega_sum = 0.0;
    int kept = 0;
    for (int sweep = 0; sweep < 200; ++sweep) {
        auto [next_state, next] = gibbs_sweep(state, obs, compliance, prior, rng);
        state = std::move(next_state);
        compliance = std::move(next);
        if (sweep >= 100) {
            omega_sum += state.omega_c;
            ++kept;
        }
    }
    CHECK(omega_sum / kept == doctest::Approx(0.10).epsilon(0.4));
    CHECK(std::abs(omega_sum / kept - 0.10) < 0.04);
}

TEST_CASE("impute_compliance keeps observed statuses and hits symmetric marginals") {
    SUBCASE("all treated dataset is returned unchanged") {
        const auto obs = test::make_dataset({{1, 1, 0}, {1, 0, 1}}, 1, 2);
        Rng rng(1);
        CHECK(impute_compliance(obs, CompliancePrior{}, 3, rng) == derived_compliance(obs));
    }
    SUBCASE("two control units under a flat symmetric prior are coin flips") {
        const auto obs = test::make_dataset({{0, 0, 0}, {0, 0, 1}}, 1, 2);
        Rng rng(2);
        int compliers = 0;
        const int reps = 10000;
        for (int rep = 0; rep < reps; ++rep) {
            const auto imputed = impute_compliance(obs, CompliancePrior{}, 2, rng);
            compliers += imputed[0] == ComplianceStatus::complier ? 1 : 0;
        }
        CHECK(static_cast<double>(compliers) / reps == doctest::Approx(0.5).epsilon(0.04));
    }
    SUBCASE("burn_in must be positive") {
        const auto obs = test::make_dataset({{0, 0, 0}}, 1, 2);
        Rng rng(3);
        CHECK_THROWS_AS(impute_compliance(obs, CompliancePrior{}, 0, rng), config_error);
    }
}

TEST_CASE("imputation reads assignment only through observed statuses") {
    // Permuting z among control units is the identity on the data; the same
    // stream must give the same draw.
    const auto obs = sim_observed(21);
    auto permuted = obs;
    std::vector<int> control_slots;
    for (int i = 0; i < obs.size(); ++i)
        if (obs.units[i].z == 0) control_slots.push_back(i);
    for (std::size_t k = 0; k + 1 < control_slots.size(); k += 2)
        std::swap(permuted.units[control_slots[k]].z, permuted.units[control_slots[k + 1]].z);

    Rng rng_a(31), rng_b(31);
    const auto draw_a = impute_compliance(obs, CompliancePrior{}, 10, rng_a);
    const auto draw_b = impute_compliance(permuted, CompliancePrior{}, 10, rng_b);
    CHECK(draw_a == draw_b);
}

TEST_CASE("grouped chain matches the per-unit sweep distribution") {
    // Same model, two samplers: compare the imputed complier-count moments.
    const auto obs = sim_observed(41);
    ObservedDataset small;
    small.j_outcomes = obs.j_outcomes;
    small.k_categories = obs.k_categories;
    small.cell_count = obs.cell_count;
    small.units.assign(obs.units.begin(), obs.units.begin() + 200);
    small.n_treated = 0;
    for (const auto& u : small.units) small.n_treated += u.z;

    const CompliancePrior prior;
    const int reps = 3000, burn = 4;

    Rng rng_grouped(51);
    double grouped_sum = 0.0, grouped_sq = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
        const auto draw = impute_compliance(small, prior, burn, rng_grouped);
        int count = 0;
        for (std::size_t i = 0; i < draw.size(); ++i)
            if (small.units[i].z == 0 && draw[i] == ComplianceStatus::complier) ++count;
        grouped_sum += count;
        grouped_sq += static_cast<double>(count) * count;
    }

    Rng rng_unit(52);
    double unit_sum = 0.0, unit_sq = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
        auto state = draw_state_from_prior(prior, small.cell_count,
                                           pattern_space_size(small.k_categories,
                                                              small.j_outcomes),
                                           rng_unit);
        auto compliance = derived_compliance(small);
        for (auto& c : compliance)
            if (c == ComplianceStatus::unknown) c = ComplianceStatus::never_taker;
        for (int sweep = 0; sweep < burn; ++sweep) {
            auto [next_state, next] = gibbs_sweep(state, small, compliance, prior, rng_unit);
            state = std::move(next_state);
            compliance = std::move(next);
        }
        int count = 0;
        for (std::size_t i = 0; i < compliance.size(); ++i)
            if (small.units[i].z == 0 && compliance[i] == ComplianceStatus::complier) ++count;
        unit_sum += count;
        unit_sq += static_cast<double>(count) * count;
    }

    const double grouped_mean = grouped_sum / reps;
    const double unit_mean = unit_sum / reps;
    const double grouped_var = grouped_sq / reps - grouped_mean * grouped_mean;
    const double unit_var = unit_sq / reps - unit_mean * unit_mean;
    const double se = std::sqrt(grouped_var / reps + unit_var / reps);
    CHECK(std::abs(grouped_mean - unit_mean) < 4.0 * se + 1e-9);
}

TEST_CASE("priors and states are validated") {
    CompliancePrior bad;
    bad.omega_a = 0.0;
    CHECK_THROWS_AS(bad.validate(), config_error);

    auto state = single_outcome_state(0.5, {0.6, 0.4}, {0.5, 0.5});
    CHECK_NOTHROW(state.validate());
    state.omega_c = 1.0;
    CHECK_THROWS_AS(state.validate(), input_error);
    state.omega_c = 0.5;
    state.eta[0] = {0.7, 0.4};
    CHECK_THROWS_AS(state.validate(), input_error);
}

TEST_SUITE_END();
