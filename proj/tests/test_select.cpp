#include "facesig/errors.hpp"
#include "facesig/select.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace facesig;

namespace {

// 3-class data: column 0 tracks the label, column 1 duplicates it,
// the rest is noise
struct Toy {
    Eigen::MatrixXd x;
    std::vector<int> y;
    std::vector<std::string> names;
};

Toy make_toy(int n_per_class, int n_features, bool duplicate_informative, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::normal_distribution<double> jitter(0.0, 0.05);
    const int n = 3 * n_per_class;
    Toy toy;
    toy.x.resize(n, n_features);
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < n_per_class; ++i) {
            const int row = c * n_per_class + i;
            toy.y.push_back(c);
            toy.x(row, 0) = c + jitter(rng);
            for (int f = 1; f < n_features; ++f) toy.x(row, f) = noise(rng);
            if (duplicate_informative) toy.x(row, 1) = toy.x(row, 0);
        }
    for (int f = 0; f < n_features; ++f) toy.names.push_back("f" + std::to_string(f));
    return toy;
}

} // namespace

TEST_SUITE("select") {

TEST_CASE("method names round trip") {
    for (auto m : kDefaultSelectorMethods)
        CHECK(selector_method_from_string(to_string(m)) == m);
    CHECK(kDefaultSelectorMethods.size() == 6);
    CHECK_THROWS_AS(selector_method_from_string("magic"), ConfigError);
}

TEST_CASE("every method ranks the informative feature first") {
    Toy toy = make_toy(20, 10, false, 3);
    for (auto m : kDefaultSelectorMethods) {
        auto score = score_features(m, toy.x, toy.y);
        REQUIRE(score.scores.size() == 10);
        REQUIRE(score.ranks.size() == 10);
        // ranks are a permutation of 1..n
        auto sorted = score.ranks;
        std::sort(sorted.begin(), sorted.end());
        for (int i = 0; i < 10; ++i) CHECK(sorted[i] == i + 1);
        CHECK(score.ranks[0] == 1);
    }
}

TEST_CASE("constant features score zero under every method") {
    Toy toy = make_toy(15, 6, false, 4);
    toy.x.col(3).setConstant(2.5);
    for (auto m : kDefaultSelectorMethods) {
        auto score = score_features(m, toy.x, toy.y);
        CHECK(score.scores[3] == 0.0);
    }
}

TEST_CASE("redundancy-aware ranking demotes an exact duplicate") {
    Toy toy = make_toy(20, 10, true, 5);
    auto score = score_features(SelectorMethod::Mrmr, toy.x, toy.y);
    CHECK(score.ranks[0] == 1);
    CHECK(score.ranks[1] > 2); // the copy is penalized once f0 is taken
}

TEST_CASE("stability selection keeps the planted feature and respects the cap") {
    Toy toy = make_toy(20, 30, false, 6);
    StabilityOptions opts;
    opts.seed = 17;
    auto report = stability_run(toy.x, toy.y, toy.names, opts);
    CHECK(report.cap == 3); // ceil(0.10 * 30)
    CHECK(report.final_set.size() <= 3);
    CHECK(std::find(report.final_set.begin(), report.final_set.end(), "f0") !=
          report.final_set.end());
    REQUIRE(report.bts.size() == 30);
    CHECK(report.bts[0] > 0.9); // planted feature survives nearly every fold/threshold
    for (double ji : report.jaccard_per_method) {
        CHECK(ji >= 0.0);
        CHECK(ji <= 1.0);
    }
    for (double b : report.bts) {
        CHECK(b >= 0.0);
        CHECK(b <= 1.0);
    }
}

TEST_CASE("correlated duplicates are pruned, keeping one") {
    Toy toy = make_toy(20, 20, true, 7);
    StabilityOptions opts;
    opts.seed = 19;
    auto report = stability_run(toy.x, toy.y, toy.names, opts);
    const bool has_f0 = std::find(report.final_set.begin(), report.final_set.end(), "f0") !=
                        report.final_set.end();
    const bool has_f1 = std::find(report.final_set.begin(), report.final_set.end(), "f1") !=
                        report.final_set.end();
    CHECK((has_f0 || has_f1));
    CHECK_FALSE((has_f0 && has_f1));
    CHECK_FALSE(report.pruned_redundant.empty());
}

TEST_CASE("identical seeds give identical reports") {
    Toy toy = make_toy(15, 12, false, 8);
    StabilityOptions opts;
    opts.seed = 23;
    auto a = stability_run(toy.x, toy.y, toy.names, opts);
    auto b = stability_run(toy.x, toy.y, toy.names, opts);
    CHECK(a.final_set == b.final_set);
    CHECK(a.bts == b.bts);
    CHECK(a.mean_rank == b.mean_rank);
    CHECK(a.jaccard_per_method == b.jaccard_per_method);
    opts.seed = 24;
    auto c = stability_run(toy.x, toy.y, toy.names, opts);
    // a different seed may reorder folds; the planted feature still wins
    CHECK(std::find(c.final_set.begin(), c.final_set.end(), "f0") != c.final_set.end());
}

TEST_CASE("explain_selection reports group means and directions") {
    FeatureTable table;
    table.names = {"up", "down"};
    const RiskLabel labels[] = {RiskLabel::Low, RiskLabel::Medium, RiskLabel::High};
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 4; ++i) {
            SegmentFeatures row;
            row.subject_id = std::string(1, "LMH"[c]) + std::to_string(i);
            row.risk_label = labels[c];
            row.segment_index = 0;
            row.features = {static_cast<double>(c), 2.0 - c};
            table.rows.push_back(std::move(row));
        }
    SelectionReport report;
    report.feature_names = table.names;
    report.bts = {0.8, 0.9};
    report.final_set = {"down", "up"};
    auto info = explain_selection(report, table);
    REQUIRE(info.size() == 2);
    auto down = std::find_if(info.begin(), info.end(),
                             [](const auto& i) { return i.name == "down"; });
    REQUIRE(down != info.end());
    CHECK(down->direction.order == "L>M>H");
    CHECK(down->mean_low == doctest::Approx(2.0));
    CHECK(down->mean_high == doctest::Approx(0.0));
}

TEST_CASE("feature matrix and labels extraction") {
    FeatureTable table;
    table.names = {"a", "b"};
    SegmentFeatures r1;
    r1.subject_id = "L1";
    r1.risk_label = RiskLabel::Low;
    r1.features = {1.0, 2.0};
    SegmentFeatures r2 = r1;
    r2.risk_label = RiskLabel::High;
    r2.features = {3.0, 4.0};
    table.rows = {r1, r2};
    auto x = feature_matrix(table);
    auto y = feature_labels(table);
    CHECK(x.rows() == 2);
    CHECK(x(1, 1) == 4.0);
    CHECK(y == std::vector<int>{0, 2});
}

} // TEST_SUITE
