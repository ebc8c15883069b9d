#include <doctest.h>

#include <array>
#include <cmath>

#include "ripp/assignment.hpp"
#include "ripp/errors.hpp"
#include "ripp/simgen.hpp"
#include "ripp/statistics.hpp"
#include "test_support.hpp"

using namespace ripp;

namespace {

std::array<double, 3> marginal_freq(ComplianceStatus cls, int arm, Hypothesis hyp, Family family,
                                    std::uint64_t seed, int draws = 100000) {
    Rng rng(seed);
    std::array<double, 3> freq{0, 0, 0};
    for (int i = 0; i < draws; ++i) ++freq[draw_marginal(cls, arm, hyp, family, rng)];
    for (auto& f : freq) f /= draws;
    return freq;
}

void check_close(const std::array<double, 3>& observed, const std::array<double, 3>& expected,
                 double tol = 0.01) {
    for (int k = 0; k < 3; ++k) CHECK(std::abs(observed[k] - expected[k]) < tol);
}

double correlation(const std::vector<std::array<int, 3>>& ys, int a, int b) {
    double ma = 0, mb = 0;
    for (const auto& y : ys) {
        ma += y[a];
        mb += y[b];
    }
    ma /= ys.size();
    mb /= ys.size();
    double saa = 0, sbb = 0, sab = 0;
    for (const auto& y : ys) {
        saa += (y[a] - ma) * (y[a] - ma);
        sbb += (y[b] - mb) * (y[b] - mb);
        sab += (y[a] - ma) * (y[b] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_SUITE_BEGIN("simgen");

TEST_CASE("marginal tables match their nominal probabilities") {
    check_close(marginal_freq(ComplianceStatus::complier, 0, Hypothesis::null_effect,
                              Family::noncompliance_single, 1),
                {.45, .45, .10});
    check_close(marginal_freq(ComplianceStatus::complier, 1, Hypothesis::alt,
                              Family::noncompliance_single, 2),
                {.80, .10, .10});
    check_close(marginal_freq(ComplianceStatus::never_taker, 1, Hypothesis::alt1,
                              Family::combined, 3),
                {.02, .02, .96});
    check_close(marginal_freq(ComplianceStatus::complier, 1, Hypothesis::alt3, Family::combined,
                              4),
                {.80, .10, .10});
    check_close(marginal_freq(ComplianceStatus::complier, 0, Hypothesis::alt2, Family::combined,
                              5),
                {.30, .60, .10});
    check_close(marginal_freq(ComplianceStatus::complier, 0, Hypothesis::alt3, Family::combined,
                              6),
                {.25, .55, .20});
    check_close(marginal_freq(ComplianceStatus::complier, 1, Hypothesis::alt,
                              Family::multiple_no_compliance, 7),
                {.50, .45, .05});
}

TEST_CASE("illegal marginal combinations are rejected") {
    Rng rng(1);
    CHECK_THROWS_AS(
        draw_marginal(ComplianceStatus::complier, 0, Hypothesis::alt2,
                      Family::noncompliance_single, rng),
        config_error);
    CHECK_THROWS_AS(draw_marginal(ComplianceStatus::never_taker, 0, Hypothesis::null_effect,
                                  Family::multiple_no_compliance, rng),
                    config_error);
    CHECK_THROWS_AS(
        draw_marginal(ComplianceStatus::complier, 1, Hypothesis::alt, Family::combined, rng),
        config_error);
    CHECK_THROWS_AS(
        draw_marginal(ComplianceStatus::unknown, 0, Hypothesis::null_effect,
                      Family::noncompliance_single, rng),
        config_error);
}

TEST_CASE("correlation modes hit their targets") {
    Rng rng(42);
    const auto supplier = [&]() { return static_cast<int>(rbelow(rng, 3)); };

    SUBCASE("perfect copies the first coordinate") {
        for (int i = 0; i < 1000; ++i) {
            const int first = supplier();
            const auto y = apply_correlation(first, supplier, supplier, Correlation::perfect, rng);
            CHECK(y[0] == first);
            CHECK(y[1] == first);
            CHECK(y[2] == first);
        }
    }
    SUBCASE("zero leaves coordinates uncorrelated") {
        std::vector<std::array<int, 3>> ys;
        for (int i = 0; i < 100000; ++i)
            ys.push_back(apply_correlation(supplier(), supplier, supplier, Correlation::zero, rng));
        CHECK(std::abs(correlation(ys, 0, 1)) < 0.02);
        CHECK(std::abs(correlation(ys, 0, 2)) < 0.02);
        CHECK(std::abs(correlation(ys, 1, 2)) < 0.02);
    }
    SUBCASE("partial correlates around one half") {
        std::vector<std::array<int, 3>> ys;
        for (int i = 0; i < 100000; ++i)
            ys.push_back(
                apply_correlation(supplier(), supplier, supplier, Correlation::partial, rng));
        CHECK(correlation(ys, 0, 1) == doctest::Approx(0.5).epsilon(0.06));
        CHECK(correlation(ys, 0, 2) == doctest::Approx(0.5).epsilon(0.06));
    }
}

TEST_CASE("generate draws strata and outcomes per the scenario") {
    SUBCASE("complier share is binomial around omega") {
        ScenarioSpec spec = ScenarioSpec::for_family(Family::noncompliance_single);
        Rng rng(7);
        int total_compliers = 0;
        const int reps = 10;
        for (int rep = 0; rep < reps; ++rep) {
            const auto table = generate(spec, rng);
            for (const auto& u : table.units)
                total_compliers += u.compliance == ComplianceStatus::complier ? 1 : 0;
        }
        const double mean = static_cast<double>(total_compliers) / reps;
        const double sd = std::sqrt(1000 * 0.1 * 0.9 / reps);
        CHECK(std::abs(mean - 100.0) < 3.0 * sd);
    }
    SUBCASE("null scenarios have identically distributed arms") {
        ScenarioSpec spec = ScenarioSpec::for_family(Family::combined);
        spec.hypothesis = Hypothesis::null_effect;
        spec.correlation = Correlation::partial;
        Rng rng(8);
        const auto table = generate(spec, rng);
        table.validate();
        // never-taker outcomes concentrate at category 2 under both arms
        int nt_high0 = 0, nt_high1 = 0, nt = 0;
        for (const auto& u : table.units)
            if (u.compliance == ComplianceStatus::never_taker) {
                ++nt;
                nt_high0 += u.y0[0] == 2 ? 1 : 0;
                nt_high1 += u.y1[0] == 2 ? 1 : 0;
            }
        REQUIRE(nt > 500);
        CHECK(static_cast<double>(nt_high0) / nt == doctest::Approx(0.96).epsilon(0.05));
        CHECK(static_cast<double>(nt_high1) / nt == doctest::Approx(0.96).epsilon(0.05));
    }
    SUBCASE("omega one under alt1 makes cace equal itt") {
        ScenarioSpec spec = ScenarioSpec::for_family(Family::combined);
        spec.hypothesis = Hypothesis::alt1;
        spec.omega_c = 1.0;
        Rng rng(9);
        const auto table = generate(spec, rng);
        const CompleteRandomization mech(spec.n_units, spec.n_treated);
        std::vector<std::uint8_t> z;
        mech.draw_into(z, rng);
        const auto obs = reobserve(table, z);
        for (const auto& e : default_estimands(obs))
            CHECK(cace(obs, e) == itt(obs, e));
    }
}

TEST_CASE("scenario parsing and validation") {
    const auto spec = parse_scenario("combined/alt1/partial/omega=.3");
    CHECK(spec.family == Family::combined);
    CHECK(spec.hypothesis == Hypothesis::alt1);
    CHECK(spec.correlation == Correlation::partial);
    CHECK(spec.omega_c == doctest::Approx(0.3));
    CHECK(spec.j_outcomes == 3);
    CHECK(spec.name() == "combined/alt1/partial/omega=0.3");

    CHECK(parse_scenario("noncompliance_single/alt").j_outcomes == 1);
    CHECK_THROWS_AS(parse_scenario("combined"), config_error);
    CHECK_THROWS_AS(parse_scenario("combined/alt"), config_error);
    CHECK_THROWS_AS(parse_scenario("noncompliance_single/alt2"), config_error);
    CHECK_THROWS_AS(parse_scenario("multiple_no_compliance/alt/zero/omega=.5"), config_error);
    CHECK_THROWS_AS(parse_scenario("noncompliance_single/null/nonsense"), config_error);
}

TEST_CASE("replicate smoke run is sane and deterministic") {
    ScenarioSpec spec = ScenarioSpec::for_family(Family::noncompliance_single);
    spec.hypothesis = Hypothesis::alt;
    spec.n_units = 120;
    spec.n_treated = 60;
    const std::vector<MethodCombo> combos{{StatisticKind::itt, AdjustmentMethod::bonferroni},
                                          {StatisticKind::cace, AdjustmentMethod::bonferroni}};
    const auto rates = replicate(spec, combos, 16, 60, 0.05, 5, 99, 2);
    REQUIRE(rates.rate.size() == 2);
    for (double r : rates.rate) {
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
    }
    const auto again = replicate(spec, combos, 16, 60, 0.05, 5, 99, 1);
    CHECK(rates.rate == again.rate);  // worker count cannot matter
}

TEST_SUITE_END();
