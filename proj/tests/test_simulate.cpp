#include <ccmm/simulate.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

using namespace ccmm;

namespace {

bool same_data(const Dataset& a, const Dataset& b) {
    if (a.columns().size() != b.columns().size()) return false;
    for (std::size_t c = 0; c < a.columns().size(); ++c) {
        if (a.columns()[c].name != b.columns()[c].name) return false;
        if (a.columns()[c].values != b.columns()[c].values) return false;
    }
    return true;
}

double sample_var(const std::vector<double>& v) {
    double m = 0.0, ss = 0.0;
    for (double x : v) m += x / static_cast<double>(v.size());
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size() - 1);
}

SimDesign two_way(AssignmentScheme scheme, std::size_t a, std::size_t b) {
    SimDesign sd;
    sd.scheme = scheme;
    sd.classifications = {{"school", a, 0.25}, {"neigh", b, 0.15}};
    sd.beta = {0.0, 1.0};
    sd.sigma2_e = 0.6;
    return sd;
}

std::size_t distinct(const std::vector<std::string>& v) { return std::set<std::string>(v.begin(), v.end()).size(); }

}  // namespace

TEST(Simulate, NoiselessLine) {
    auto sd = two_way(AssignmentScheme::random_assignment, 5, 4);
    sd.classifications[0].sigma2 = sd.classifications[1].sigma2 = 0.0;
    sd.sigma2_e = 0.0;
    sd.beta = {2.0, -0.5};
    sd.n = 50;
    const auto d = simulate(sd);
    for (std::size_t i = 0; i < d.n(); ++i) EXPECT_EQ(d.numeric("y")[i], 2.0 + -0.5 * d.numeric("x")[i]);
}

TEST(Simulate, PanelHasOneObservationPerCell) {
    auto sd = two_way(AssignmentScheme::panel_one_per_cell, 7, 5);
    sd.classifications[0].name = "state";
    sd.classifications[1].name = "year";
    const auto d = simulate(sd);
    ASSERT_EQ(d.n(), 35u);
    std::set<std::pair<std::string, std::string>> cells;
    for (std::size_t i = 0; i < d.n(); ++i) cells.insert({d.labels("state")[i], d.labels("year")[i]});
    EXPECT_EQ(cells.size(), 35u);
}

TEST(Simulate, DyadicAllPairs) {
    SimDesign sd;
    sd.scheme = AssignmentScheme::dyadic_all_pairs;
    sd.dyadic.areas = 6;
    sd.dyadic.cov << 0.3, 0.15, 0.15, 0.3;
    const auto d = simulate(sd);
    ASSERT_EQ(d.n(), 30u);
    std::map<std::string, int> as_origin, as_dest;
    for (std::size_t i = 0; i < d.n(); ++i) {
        EXPECT_NE(d.labels("origin")[i], d.labels("dest")[i]);
        ++as_origin[d.labels("origin")[i]];
        ++as_dest[d.labels("dest")[i]];
    }
    ASSERT_EQ(as_origin.size(), 6u);
    for (const auto& [area, count] : as_origin) {
        EXPECT_EQ(count, 5) << area;
        EXPECT_EQ(as_dest[area], 5) << area;
    }
}

TEST(Simulate, BalancedCounts) {
    auto sd = two_way(AssignmentScheme::full_cross_balanced, 3, 4);
    sd.per_cell = 2;
    sd.classifications.push_back({"district", 2, 0.1});
    const auto d = simulate(sd);
    EXPECT_EQ(d.n(), 3u * 4u * 2u * 2u);
    std::map<std::string, int> cells;
    for (std::size_t i = 0; i < d.n(); ++i)
        ++cells[d.labels("school")[i] + "|" + d.labels("neigh")[i] + "|" + d.labels("district")[i]];
    EXPECT_EQ(cells.size(), 24u);
    for (const auto& [_, c] : cells) EXPECT_EQ(c, 2);
}

TEST(Simulate, RandomAssignmentLabelsAndColumns) {
    auto sd = two_way(AssignmentScheme::random_assignment, 60, 50);
    sd.n = 4000;
    sd.seed = 101;
    const auto d = simulate(sd);
    EXPECT_EQ(d.n(), 4000u);
    std::vector<std::string> names;
    for (const auto& c : d.columns()) names.push_back(c.name);
    EXPECT_EQ(names, (std::vector<std::string>{"y", "x", "school", "neigh"}));
    EXPECT_EQ(distinct(d.labels("school")), 60u);  // 4000 draws over 60 clusters hit every one
    EXPECT_EQ(d.labels("school")[0].rfind("school_", 0), 0u);
}

TEST(Simulate, CovariateNames) {
    SimDesign sd;
    sd.beta = {1.0};
    EXPECT_TRUE(sd.covariate_names().empty());
    sd.beta = {1.0, 2.0};
    EXPECT_EQ(sd.covariate_names(), (std::vector<std::string>{"x"}));
    sd.beta = {1.0, 2.0, 3.0};
    EXPECT_EQ(sd.covariate_names(), (std::vector<std::string>{"x1", "x2"}));
}

TEST(Simulate, SeedDeterminismAndInjectivity) {
    auto sd = two_way(AssignmentScheme::random_assignment, 10, 8);
    sd.n = 30;
    sd.seed = 7;
    EXPECT_TRUE(same_data(simulate(sd), simulate(sd)));
    std::set<std::vector<double>> seen;
    for (std::uint64_t s = 1; s <= 100; ++s) {
        sd.seed = s;
        seen.insert(simulate(sd).numeric("y"));
    }
    EXPECT_EQ(seen.size(), 100u);
}

TEST(Simulate, ValidationErrors) {
    auto sd = two_way(AssignmentScheme::random_assignment, 3, 3);
    EXPECT_THROW(simulate(sd), DataError);  // n = 0
    sd.n = 10;
    sd.sigma2_e = -1.0;
    EXPECT_THROW(simulate(sd), DataError);
    sd = two_way(AssignmentScheme::panel_one_per_cell, 3, 3);
    sd.classifications.pop_back();
    EXPECT_THROW(simulate(sd), DataError);
    sd = SimDesign{};
    sd.scheme = AssignmentScheme::dyadic_all_pairs;
    sd.dyadic.areas = 3;
    sd.dyadic.cov << 1.0, 2.0, 2.0, 1.0;  // not positive semidefinite
    EXPECT_THROW(simulate(sd), DataError);
    sd = two_way(AssignmentScheme::full_cross_balanced, 3, 3);
    sd.classifications[1].count = 0;
    EXPECT_THROW(simulate(sd), DataError);
    EXPECT_THROW(parse_scheme("latin-square"), DataError);
}

TEST(SimulateMoments, ClusterEffectVariance) {
    // single classification, no residual: y is the cluster effect itself
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        SimDesign sd;
        sd.scheme = AssignmentScheme::full_cross_balanced;
        sd.classifications = {{"g", 500, 0.4}};
        sd.sigma2_e = 0.0;
        sd.seed = seed;
        EXPECT_NEAR(sample_var(simulate(sd).numeric("y")), 0.4, 0.04) << seed;
    }
}

TEST(SimulateMoments, TotalVarianceOfBalancedDesign) {
    auto sd = two_way(AssignmentScheme::full_cross_balanced, 200, 200);
    sd.sigma2_interaction = 0.1;
    sd.seed = 3;
    const double expected = 0.25 + 0.15 + 0.1 + 0.6 + 1.0;
    EXPECT_NEAR(sample_var(simulate(sd).numeric("y")), expected, 0.1 * expected);
}

TEST(SimulateMoments, InteractionEffectsArePerCell) {
    // only the interaction varies: replicates within a cell share one value
    auto sd = two_way(AssignmentScheme::full_cross_balanced, 4, 3);
    sd.classifications[0].sigma2 = sd.classifications[1].sigma2 = 0.0;
    sd.sigma2_e = 0.0;
    sd.beta = {0.0};
    sd.sigma2_interaction = 1.0;
    sd.per_cell = 3;
    const auto d = simulate(sd);
    std::map<std::string, std::set<double>> by_cell;
    for (std::size_t i = 0; i < d.n(); ++i)
        by_cell[d.labels("school")[i] + "|" + d.labels("neigh")[i]].insert(d.numeric("y")[i]);
    EXPECT_EQ(by_cell.size(), 12u);
    for (const auto& [_, v] : by_cell) EXPECT_EQ(v.size(), 1u);
}

TEST(DropCells, Behaviour) {
    auto sd = two_way(AssignmentScheme::panel_one_per_cell, 10, 10);
    const auto d = simulate(sd);
    EXPECT_TRUE(same_data(drop_cells(d, 0.0, 1), d));
    const auto kept = drop_cells(d, 0.2, 1);
    EXPECT_EQ(kept.n(), 80u);
    EXPECT_TRUE(same_data(kept, drop_cells(d, 0.2, 1)));
    EXPECT_FALSE(same_data(kept, drop_cells(d, 0.2, 2)));
    EXPECT_EQ(drop_cells(d, 0.999, 1).n(), 1u);  // at least one cell survives
    EXPECT_THROW(drop_cells(d, 1.0, 1), DataError);
    EXPECT_THROW(drop_cells(d, -0.1, 1), DataError);
}

TEST(DropCells, ReencodedClassificationsHaveNoEmptyClusters) {
    auto sd = two_way(AssignmentScheme::full_cross_balanced, 6, 5);
    sd.per_cell = 2;
    const auto kept = drop_cells(simulate(sd), 0.5, 4, {"school", "neigh"});
    EXPECT_EQ(kept.n(), 30u);  // 15 of 30 cells, 2 rows each
    for (const char* name : {"school", "neigh"}) {
        const auto m = encode_classification(kept, name);
        for (auto s : m.cluster_sizes()) EXPECT_GT(s, 0u);
    }
}

TEST(DesignFile, JsonRoundTrip) {
    SimDesign sd;
    sd.scheme = AssignmentScheme::dyadic_all_pairs;
    sd.dyadic.areas = 40;
    sd.dyadic.cov << 0.3, 0.15, 0.15, 0.3;
    sd.sigma2_e = 0.5;
    sd.seed = 42;
    const auto back = sim_design_from_json(sim_design_to_json(sd));
    EXPECT_EQ(back.scheme, sd.scheme);
    EXPECT_EQ(back.dyadic.areas, 40u);
    EXPECT_EQ(back.dyadic.cov, sd.dyadic.cov);
    EXPECT_EQ(back.seed, 42u);
    EXPECT_TRUE(same_data(simulate(back), simulate(sd)));

    auto cross = two_way(AssignmentScheme::full_cross_balanced, 5, 4);
    cross.sigma2_interaction = 0.2;
    cross.per_cell = 3;
    const auto c2 = sim_design_from_json(sim_design_to_json(cross));
    EXPECT_EQ(c2.per_cell, 3u);
    EXPECT_EQ(c2.sigma2_interaction, 0.2);
    EXPECT_TRUE(same_data(simulate(c2), simulate(cross)));
}

TEST(DesignFile, ReadFromDiskAndErrors) {
    const auto dir = std::filesystem::temp_directory_path() / "ccmm_test_simulate";
    std::filesystem::create_directories(dir);
    const auto good = (dir / "good.json").string(), bad = (dir / "bad.json").string(),
               incomplete = (dir / "incomplete.json").string();
    std::ofstream(good) << R"({"scheme": "random-assignment", "n": 20, "seed": 5,
        "classifications": [{"name": "school", "count": 4, "sigma2": 0.2}]})";
    std::ofstream(bad) << "{ not json";
    std::ofstream(incomplete) << R"({"classifications": []})";
    const auto sd = read_sim_design(good);
    EXPECT_EQ(sd.n, 20u);
    EXPECT_EQ(sd.classifications.at(0).count, 4u);
    EXPECT_EQ(sd.sigma2_e, 1.0);
    EXPECT_THROW(read_sim_design(bad), DataError);
    EXPECT_THROW(read_sim_design(incomplete), DataError);
    EXPECT_THROW(read_sim_design((dir / "missing.json").string()), DataError);
    std::filesystem::remove_all(dir);
}

TEST(DesignFile, ShippedExampleLoads) {
    const auto sd = read_sim_design(std::string(CCMM_TEST_DATA_DIR) + "/attain_design.json");
    EXPECT_EQ(sd.scheme, AssignmentScheme::random_assignment);
    EXPECT_EQ(sd.n, 4000u);
    ASSERT_EQ(sd.classifications.size(), 2u);
    EXPECT_EQ(sd.classifications[0].count, 60u);
}
