#include <doctest.h>

#include <fstream>
#include <sstream>

#include "ripp/data_model.hpp"
#include "ripp/errors.hpp"
#include "ripp/rng.hpp"
#include "ripp/simgen.hpp"
#include "test_support.hpp"

using namespace ripp;

TEST_SUITE_BEGIN("data_model");

TEST_CASE("load_dataset parses a small csv") {
    std::istringstream in(
        "id,gender,z,d,y1,y2,y3\n"
        "1,0,1,1,0,1,2\n"
        "2,0,1,0,1,1,0\n"
        "3,1,0,0,2,0,0\n"
        "4,1,0,0,0,0,1\n");
    ColumnSchema schema{"id", "gender", "z", "d", {"y1", "y2", "y3"}};
    const auto obs = load_dataset(in, schema);
    CHECK(obs.size() == 4);
    CHECK(obs.j_outcomes == 3);
    CHECK(obs.k_categories == 3);
    CHECK(obs.cell_count == 2);
    CHECK(obs.n_treated == 2);
    CHECK(obs.units[0].y_obs == std::vector<int>{0, 1, 2});
}

TEST_CASE("load_dataset rejects a one-sided violation with the row number") {
    std::istringstream in(
        "id,gender,z,d,y1,y2,y3\n"
        "7,0,0,1,0,0,0\n");
    ColumnSchema schema{"id", "gender", "z", "d", {"y1", "y2", "y3"}};
    CHECK_THROWS_WITH_AS(load_dataset(in, schema),
                         doctest::Contains("one-sided violation at row"), input_error);
}

TEST_CASE("load_dataset rejects duplicates, blanks and bad categories") {
    ColumnSchema schema{"id", "cell", "z", "d", {"y"}};
    {
        std::istringstream in("id,cell,z,d,y\n1,0,1,1,0\n1,0,0,0,1\n");
        CHECK_THROWS_WITH_AS(load_dataset(in, schema), doctest::Contains("duplicate"),
                             input_error);
    }
    {
        std::istringstream in("id,cell,z,d,y\n1,0,1,,0\n");
        CHECK_THROWS_WITH_AS(load_dataset(in, schema), doctest::Contains("missing value"),
                             input_error);
    }
    {
        std::istringstream in("id,cell,z,d,y\n1,0,1,1,-2\n");
        CHECK_THROWS_AS(load_dataset(in, schema), input_error);
    }
    {
        std::istringstream in("id,cell,z,d,y\n1,0,2,1,0\n");
        CHECK_THROWS_AS(load_dataset(in, schema), input_error);
    }
    {
        std::istringstream in("id,cell,z,d,y\n1,99999999,1,1,0\n");
        CHECK_THROWS_WITH_AS(load_dataset(in, schema), doctest::Contains("implausibly large"),
                             input_error);
    }
}

TEST_CASE("load_dataset reads tab-separated input and skips comments") {
    std::istringstream in(
        "# generated for a smoke test\n"
        "id\tcell\tz\td\ty\n"
        "a\t0\t1\t1\t1\n"
        "b\t0\t0\t0\t0\n");
    ColumnSchema schema{"id", "cell", "z", "d", {"y"}};
    const auto obs = load_dataset(in, schema);
    CHECK(obs.size() == 2);
    CHECK(obs.n_treated == 1);
}

TEST_CASE("jtpa-shaped fixture loads with the documented counts") {
    std::ifstream in(test::fixture_path("jtpa_synthetic.csv"));
    REQUIRE(in.good());
    ColumnSchema schema{"id", "female", "z", "d", {"emp_1_6", "emp_7_18", "emp_19_30"}};
    const auto obs = load_dataset(in, schema);
    CHECK(obs.size() == 7404);
    CHECK(obs.cell_count == 2);
    CHECK(obs.j_outcomes == 3);
    CHECK(obs.k_categories == 2);

    // n1 equals an independent scan of the z column.
    std::ifstream again(test::fixture_path("jtpa_synthetic.csv"));
    std::string line;
    std::getline(again, line);  // header
    int n1 = 0;
    while (std::getline(again, line)) {
        const auto first_comma = line.find(',');
        const auto second_comma = line.find(',', first_comma + 1);
        const auto third_comma = line.find(',', second_comma + 1);
        if (line.substr(second_comma + 1, third_comma - second_comma - 1) == "1") ++n1;
    }
    CHECK(obs.n_treated == n1);
}

TEST_CASE("observed compliance follows the one-sided table") {
    CHECK(observed_compliance(1, 1) == ComplianceStatus::complier);
    CHECK(observed_compliance(1, 0) == ComplianceStatus::never_taker);
    CHECK(observed_compliance(0, 0) == ComplianceStatus::unknown);
}

TEST_CASE("impute_sharp_null copies observed outcomes into both arms") {
    const auto obs = test::make_dataset({{1, 1, 1, 0, 2}, {0, 0, 0, 1, 1}}, 3, 3);
    const std::vector<ComplianceStatus> compliance{ComplianceStatus::complier,
                                                   ComplianceStatus::never_taker};
    const auto table = impute_sharp_null(obs, compliance);
    CHECK(table.table.units[0].y0 == std::vector<int>{1, 0, 2});
    CHECK(table.table.units[0].y1 == std::vector<int>{1, 0, 2});
    CHECK(table.table.units[1].compliance == ComplianceStatus::never_taker);

    SUBCASE("empty dataset gives an empty table") {
        ObservedDataset empty;
        empty.j_outcomes = 1;
        empty.k_categories = 2;
        const auto t = impute_sharp_null(empty, {});
        CHECK(t.table.units.empty());
    }

    SUBCASE("unknown compliance is rejected") {
        const std::vector<ComplianceStatus> bad{ComplianceStatus::complier,
                                                ComplianceStatus::unknown};
        CHECK_THROWS_AS(impute_sharp_null(obs, bad), input_error);
    }
}

TEST_CASE("reobserve masks by stratum and assignment") {
    ScienceTable table;
    table.j_outcomes = 1;
    table.k_categories = 4;
    table.cell_count = 1;
    // Sentinel-distinct potential outcomes: y0 even, y1 odd.
    table.units = {
        {"1", 0, ComplianceStatus::complier, {0}, {1}},
        {"2", 0, ComplianceStatus::never_taker, {2}, {3}},
    };

    SUBCASE("complier assigned treatment receives and shows y1") {
        const auto obs = reobserve(table, {1, 0});
        CHECK(obs.units[0].d_obs == 1);
        CHECK(obs.units[0].y_obs[0] == 1);
        CHECK(observed_compliance(obs.units[0].z, obs.units[0].d_obs) ==
              ComplianceStatus::complier);
        CHECK(obs.units[1].d_obs == 0);
        CHECK(obs.units[1].y_obs[0] == 2);
        CHECK(observed_compliance(obs.units[1].z, obs.units[1].d_obs) ==
              ComplianceStatus::unknown);
        CHECK(obs.n_treated == 1);
    }

    SUBCASE("never-taker assigned treatment does not receive") {
        const auto obs = reobserve(table, {0, 1});
        CHECK(obs.units[1].d_obs == 0);
        CHECK(obs.units[1].y_obs[0] == 3);
        CHECK(observed_compliance(obs.units[1].z, obs.units[1].d_obs) ==
              ComplianceStatus::never_taker);
    }

    SUBCASE("all-control assignment leaves every stratum unknown") {
        const auto obs = reobserve(table, {0, 0});
        for (const auto& u : obs.units)
            CHECK(observed_compliance(u.z, u.d_obs) == ComplianceStatus::unknown);
    }

    SUBCASE("length mismatch is rejected") {
        CHECK_THROWS_AS(reobserve(table, {1}), input_error);
    }
}

TEST_CASE("reobserve never leaks the unassigned arm") {
    // With disjoint y0/y1 supports, any leak would show up as a parity error.
    Rng rng(99);
    ScienceTable table;
    table.j_outcomes = 2;
    table.k_categories = 10;
    table.cell_count = 1;
    for (int i = 0; i < 40; ++i) {
        ScienceUnit u;
        u.id = std::to_string(i);
        u.compliance = (i % 3 == 0) ? ComplianceStatus::never_taker : ComplianceStatus::complier;
        u.y0 = {2 * (i % 5), 2 * ((i + 2) % 5)};
        u.y1 = {2 * (i % 5) + 1, 2 * ((i + 3) % 5) + 1};
        table.units.push_back(std::move(u));
    }
    std::vector<std::uint8_t> z(40);
    for (auto& bit : z) bit = rbernoulli(rng, 0.5) ? 1 : 0;
    const auto obs = reobserve(table, z);
    for (int i = 0; i < 40; ++i)
        for (int y : obs.units[i].y_obs) CHECK(y % 2 == int(z[i]));
}

TEST_CASE("sharp-null round trip reproduces the observed data") {
    ScenarioSpec spec = ScenarioSpec::for_family(Family::noncompliance_single);
    spec.hypothesis = Hypothesis::alt;
    Rng rng(4242);
    const auto truth = generate(spec, rng);
    std::vector<std::uint8_t> z_actual(spec.n_units, 0);
    for (int i = 0; i < spec.n_treated; ++i) z_actual[i] = 1;
    const auto obs = reobserve(truth, z_actual);

    // Complete under the null with any legal stratum fill, re-observe under
    // the actual assignment: outcomes and receipts must match exactly.
    auto compliance = derived_compliance(obs);
    for (auto& c : compliance)
        if (c == ComplianceStatus::unknown) c = ComplianceStatus::complier;
    const auto null_table = impute_sharp_null(obs, compliance);
    const auto replay = reobserve(null_table, z_actual);
    for (int i = 0; i < obs.size(); ++i) {
        CHECK(replay.units[i].y_obs == obs.units[i].y_obs);
        CHECK(replay.units[i].d_obs == obs.units[i].d_obs);
        CHECK(replay.units[i].z == obs.units[i].z);
    }
}

TEST_CASE("validation rejects z=0 d=1 datasets") {
    ObservedDataset obs;
    obs.j_outcomes = 1;
    obs.k_categories = 2;
    obs.units.push_back({"1", 0, 0, 1, {0}});
    CHECK_THROWS_AS(obs.validate(), input_error);
}

TEST_CASE("science table validation enforces one-sided strata") {
    ScienceTable table;
    table.j_outcomes = 1;
    table.k_categories = 2;
    table.units = {{"1", 0, ComplianceStatus::always_taker, {0}, {0}}};
    CHECK_THROWS_AS(table.validate(), input_error);
    table.units[0].compliance = ComplianceStatus::unknown;
    CHECK_THROWS_AS(table.validate(), input_error);
    table.units[0].compliance = ComplianceStatus::complier;
    CHECK_NOTHROW(table.validate());
}

TEST_SUITE_END();
