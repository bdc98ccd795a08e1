#include "facesig/errors.hpp"
#include "facesig/functionals.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace facesig;

namespace {

// ---- independent brute-force reference, written from the definitions ----

std::vector<double> ref_diff_runs(const std::vector<double>& values,
                                  const std::vector<bool>& valid, int order) {
    // split into contiguous valid runs
    std::vector<std::vector<double>> runs;
    std::vector<double> run;
    for (size_t i = 0; i < values.size(); ++i) {
        if (valid[i]) {
            run.push_back(values[i]);
        } else if (!run.empty()) {
            runs.push_back(run);
            run.clear();
        }
    }
    if (!run.empty()) runs.push_back(run);

    std::vector<double> out;
    for (auto r : runs) {
        if (r.size() < static_cast<size_t>(order) + 1) continue;
        for (int k = 0; k < order; ++k) {
            std::vector<double> d;
            for (size_t i = 1; i < r.size(); ++i) d.push_back(r[i] - r[i - 1]);
            r = d;
        }
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

struct RefStats {
    double max, min, range, mean, var, sd, skew, kurt, peaks, valleys;
};

RefStats ref_stats(const std::vector<double>& s) {
    RefStats r{};
    r.max = s[0];
    r.min = s[0];
    double sum = 0.0;
    for (double v : s) {
        r.max = std::max(r.max, v);
        r.min = std::min(r.min, v);
        sum += v;
    }
    r.range = r.max - r.min;
    const double n = static_cast<double>(s.size());
    r.mean = sum / n;
    double s2 = 0, s3 = 0, s4 = 0;
    for (double v : s) {
        const double d = v - r.mean;
        s2 += std::pow(d, 2);
        s3 += std::pow(d, 3);
        s4 += std::pow(d, 4);
    }
    r.var = s2 / n;
    r.sd = std::sqrt(r.var);
    if (r.var < 1e-12) {
        r.skew = 0.0;
        r.kurt = 0.0;
    } else {
        r.skew = (s3 / n) / std::pow(r.var, 1.5);
        r.kurt = (s4 / n) / (r.var * r.var) - 3.0;
    }
    // extrema via run-length encoding: a run is an extremum when both
    // neighbors on the value axis lie on the same side
    if (s.size() >= 3) {
        std::vector<std::pair<double, size_t>> rle; // value, last index of run
        for (size_t i = 0; i < s.size(); ++i) {
            if (rle.empty() || rle.back().first != s[i]) rle.push_back({s[i], i});
            else rle.back().second = i;
        }
        for (size_t k = 1; k + 1 < rle.size(); ++k) {
            if (rle[k - 1].first < rle[k].first && rle[k + 1].first < rle[k].first)
                r.peaks += 1.0;
            if (rle[k - 1].first > rle[k].first && rle[k + 1].first > rle[k].first)
                r.valleys += 1.0;
        }
    }
    return r;
}

std::vector<double> ref_featurize_channel(const ChannelSeries& ch) {
    std::vector<double> out;
    int n_valid = 0;
    for (bool v : ch.valid) n_valid += v ? 1 : 0;
    if (n_valid < 3) return std::vector<double>(30, 0.0);
    for (int order = 0; order <= 2; ++order) {
        auto series = ref_diff_runs(ch.values, ch.valid, order);
        if (series.empty()) {
            out.insert(out.end(), 10, 0.0);
            continue;
        }
        RefStats r = ref_stats(series);
        for (double v : {r.max, r.min, r.range, r.mean, r.var, r.sd, r.skew, r.kurt,
                         r.peaks, r.valleys})
            out.push_back(v);
    }
    return out;
}

Segment random_segment(std::mt19937_64& rng, int n_channels, int length) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Segment seg;
    seg.subject_id = "S";
    for (int c = 0; c < n_channels; ++c) {
        ChannelSeries ch;
        ch.name = "ch" + std::to_string(c);
        ch.fps = 10.0;
        for (int i = 0; i < length; ++i) {
            ch.values.push_back(u(rng));
            ch.valid.push_back(u(rng) > 0.07); // occasional gaps
        }
        seg.channels.push_back(std::move(ch));
    }
    return seg;
}

} // namespace

TEST_SUITE("functionals") {

TEST_CASE("random segments match the brute-force reference") {
    std::mt19937_64 rng(99);
    for (int it = 0; it < 100; ++it) {
        Segment seg = random_segment(rng, 7, 120);
        SegmentFeatures got = featurize(seg);
        REQUIRE(got.features.size() == 210);
        size_t k = 0;
        for (const auto& ch : seg.channels) {
            auto want = ref_featurize_channel(ch);
            for (double w : want) {
                CHECK(got.features[k] == doctest::Approx(w).epsilon(1e-10));
                ++k;
            }
        }
    }
}

TEST_CASE("plateau counts as a single extremum") {
    StatBlock b = stat_block({0, 1, 1, 1, 0});
    CHECK(b.n_peaks == 1.0);
    CHECK(b.n_valleys == 0.0);
    b = stat_block({1, 0, 0, 1});
    CHECK(b.n_valleys == 1.0);
    // non-strict shoulders are not extrema
    b = stat_block({0, 1, 1, 2});
    CHECK(b.n_peaks == 0.0);
    // boundary plateaus are not extrema
    b = stat_block({2, 2, 1, 3, 3});
    CHECK(b.n_valleys == 1.0);
    CHECK(b.n_peaks == 0.0);
}

TEST_CASE("constant series hits the moment conventions") {
    StatBlock b = stat_block({0.4, 0.4, 0.4, 0.4});
    CHECK(b.variance == 0.0);
    CHECK(b.skewness == 0.0);
    CHECK(b.kurtosis == 0.0);
    CHECK(b.range == 0.0);
    CHECK(b.n_peaks == 0.0);
}

TEST_CASE("derivatives respect validity gaps") {
    std::vector<double> v{0, 1, 3, 100, 6, 10};
    std::vector<bool> ok{true, true, true, false, true, true};
    auto d1 = derivative(v, ok, 1);
    REQUIRE(d1.size() == 3); // (1-0), (3-1) from run 1; (10-6) from run 2
    CHECK(d1[0] == doctest::Approx(1.0));
    CHECK(d1[1] == doctest::Approx(2.0));
    CHECK(d1[2] == doctest::Approx(4.0));
    auto d2 = derivative(v, ok, 2);
    REQUIRE(d2.size() == 1); // only the first run is long enough
    CHECK(d2[0] == doctest::Approx(1.0));
}

TEST_CASE("derivative with no sufficient run throws") {
    CHECK_THROWS_AS(derivative({1.0}, {true}, 1), TooShort);
    CHECK_THROWS_AS(derivative({1.0, 2.0}, {true, false}, 1), TooShort);
}

TEST_CASE("empty series throws") {
    CHECK_THROWS_AS(stat_block({}), EmptySeries);
}

TEST_CASE("feature names follow channel x derivative x statistic order") {
    auto names = feature_names({"avg_ear", "head_pitch"});
    REQUIRE(names.size() == 60);
    CHECK(names[0] == "avg_ear-d0_max");
    CHECK(names[9] == "avg_ear-d0_nvalleys");
    CHECK(names[10] == "avg_ear-d1_max");
    CHECK(names[29] == "avg_ear-d2_nvalleys");
    CHECK(names[30] == "head_pitch-d0_max");
    auto full = feature_names({"a", "b", "c", "d", "e", "f", "g"});
    CHECK(full.size() == 210);
}

TEST_CASE("channels with too few valid frames are zero-filled and flagged") {
    Segment seg;
    seg.subject_id = "S";
    ChannelSeries ch;
    ch.name = "avg_ear";
    ch.values = {1, 2, 3, 4};
    ch.valid = {true, true, false, false};
    seg.channels.push_back(ch);
    auto feats = featurize(seg);
    REQUIRE(feats.features.size() == 30);
    for (double v : feats.features) CHECK(v == 0.0);
    REQUIRE(feats.degenerate_channels.size() == 1);
    CHECK(feats.degenerate_channels[0] == "avg_ear");
}

TEST_CASE("feature table csv round trip") {
    std::mt19937_64 rng(5);
    std::vector<Segment> segments;
    for (int i = 0; i < 4; ++i) {
        Segment seg = random_segment(rng, 2, 40);
        seg.subject_id = i < 2 ? "A" : "B";
        seg.risk_label = i < 2 ? RiskLabel::Low : RiskLabel::High;
        seg.segment_index = i % 2;
        segments.push_back(seg);
    }
    auto table = featurize_all(segments, {"ch0", "ch1"});
    const std::string path = "test_features_roundtrip.csv";
    table.write_csv(path);
    auto back = FeatureTable::read_csv(path);
    REQUIRE(back.names == table.names);
    REQUIRE(back.rows.size() == table.rows.size());
    for (size_t r = 0; r < back.rows.size(); ++r) {
        CHECK(back.rows[r].subject_id == table.rows[r].subject_id);
        CHECK(back.rows[r].risk_label == table.rows[r].risk_label);
        CHECK(back.rows[r].segment_index == table.rows[r].segment_index);
        for (size_t c = 0; c < back.names.size(); ++c)
            CHECK(back.rows[r].features[c] == table.rows[r].features[c]);
    }
    std::remove(path.c_str());
}

TEST_CASE("featurize_all orders rows by subject then segment") {
    std::mt19937_64 rng(6);
    std::vector<Segment> segments;
    for (auto [id, idx] : {std::pair{"B", 1}, {"A", 1}, {"B", 0}, {"A", 0}}) {
        Segment seg = random_segment(rng, 1, 30);
        seg.subject_id = id;
        seg.segment_index = idx;
        segments.push_back(seg);
    }
    auto table = featurize_all(segments, {"ch0"});
    REQUIRE(table.rows.size() == 4);
    CHECK(table.rows[0].subject_id == "A");
    CHECK(table.rows[0].segment_index == 0);
    CHECK(table.rows[1].segment_index == 1);
    CHECK(table.rows[2].subject_id == "B");
}

} // TEST_SUITE
