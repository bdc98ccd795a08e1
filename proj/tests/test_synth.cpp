#include "facesig/errors.hpp"
#include "facesig/functionals.hpp"
#include "facesig/ingest.hpp"
#include "facesig/postproc.hpp"
#include "facesig/signals.hpp"
#include "facesig/stats.hpp"
#include "facesig/synth.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace facesig;

namespace {

// blink count = downward crossings of the right-eye aspect ratio
int count_blinks(const Recording& rec) {
    EyeIndexMap map;
    int blinks = 0;
    bool below = false;
    for (const auto& frame : rec.frames) {
        if (!frame.valid) continue;
        std::array<Point2, 6> eye;
        for (int k = 0; k < 6; ++k) eye[k] = frame.landmarks[map.right_eye[k]];
        const double ear = compute_ear(eye);
        const bool now_below = ear < 0.15; // open ~0.30, closed ~0.015
        if (now_below && !below) ++blinks;
        below = now_below;
    }
    return blinks;
}

} // namespace

TEST_SUITE("synth") {

TEST_CASE("same seed gives byte-identical cohorts") {
    CohortSpec spec = CohortSpec::default_spec();
    spec.minutes_per_level_subject = {0.5, 0.5, 0.5};
    spec.seed = 1234;
    auto a = generate_cohort(spec);
    auto b = generate_cohort(spec);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        std::stringstream sa, sb;
        serialize_recording(a[i], sa, RecordingFormat::Csv);
        serialize_recording(b[i], sb, RecordingFormat::Csv);
        CHECK(sa.str() == sb.str());
    }
    spec.seed = 1235;
    auto c = generate_cohort(spec);
    std::stringstream sa, sc;
    serialize_recording(a[0], sa, RecordingFormat::Csv);
    serialize_recording(c[0], sc, RecordingFormat::Csv);
    CHECK(sa.str() != sc.str());
}

TEST_CASE("cohort shape follows the spec") {
    CohortSpec spec = CohortSpec::default_spec();
    spec.minutes_per_level_subject = {0.2, 0.2, 0.2};
    auto cohort = generate_cohort(spec);
    REQUIRE(cohort.size() == 10);
    CHECK(cohort[0].subject_id == "L1");
    CHECK(cohort[3].subject_id == "L4");
    CHECK(cohort[4].subject_id == "M1");
    CHECK(cohort[8].subject_id == "H1");
    CHECK(cohort[9].subject_id == "H2");
    CHECK(cohort[0].risk_label == RiskLabel::Low);
    CHECK(cohort[9].risk_label == RiskLabel::High);
    for (const auto& rec : cohort)
        CHECK(rec.frames.size() == 0.2 * 60 * spec.fps);
}

TEST_CASE("planted blink rate is recovered within ten percent") {
    CohortSpec spec = CohortSpec::default_spec();
    spec.fps = 30.0;
    spec.noise_sigma = 0.1;
    spec.dropout_rate = 0.0;
    const double minutes = 10.0;
    spec.minutes_per_level_subject = {minutes, minutes, minutes};

    // average across the 4 low-risk subjects to wash out per-subject jitter
    int blinks = 0;
    for (int s = 0; s < 4; ++s)
        blinks += count_blinks(generate_recording(spec, 0, s, 9000 + s));
    const double per_minute = blinks / (4.0 * minutes);
    const double expected = spec.effect_profiles[0].blink_rate_hz * 60.0;
    CHECK(per_minute == doctest::Approx(expected).epsilon(0.10));
}

TEST_CASE("blink counts order the risk levels for nearly every seed") {
    CohortSpec spec = CohortSpec::default_spec();
    spec.minutes_per_level_subject = {4.0, 4.0, 4.0};
    spec.dropout_rate = 0.0;
    int recovered = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        double counts[3];
        for (int level = 0; level < 3; ++level)
            counts[level] = count_blinks(generate_recording(spec, level, 0, 100 * seed + level));
        if (direction_order(counts[0], counts[1], counts[2]).order == "L>M>H") ++recovered;
    }
    CHECK(recovered >= 9);
}

TEST_CASE("blink-driven variance recovers the planted direction downstream") {
    CohortSpec spec = CohortSpec::default_spec();
    spec.minutes_per_level_subject = {4.0, 4.0, 4.0};
    spec.n_subjects_per_level = {1, 1, 1};
    spec.dropout_rate = 0.0;
    spec.seed = 77;
    auto cohort = generate_cohort(spec);
    std::vector<Segment> segments;
    std::vector<std::string> channel_names;
    for (const auto& rec : cohort) {
        auto channels = extract_channels(rec, EyeIndexMap{}, FaceModel3D{});
        if (channel_names.empty())
            for (const auto& ch : channels) channel_names.push_back(ch.name);
        SliceOptions opts;
        auto sliced = slice_segments(channels, rec.subject_id, rec.risk_label, opts);
        segments.insert(segments.end(), sliced.segments.begin(), sliced.segments.end());
    }
    auto table = featurize_all(segments, channel_names);
    auto names = table.names;
    // more blinks mean more excursions across the normalized range, so
    // the eye-openness variance orders the risk levels even after
    // per-recording min-max scaling
    auto col = std::find(names.begin(), names.end(), "avg_ear-d0_var");
    REQUIRE(col != names.end());
    const size_t j = col - names.begin();
    double mean[3] = {0, 0, 0};
    int count[3] = {0, 0, 0};
    for (const auto& row : table.rows) {
        mean[static_cast<int>(row.risk_label)] += row.features[j];
        ++count[static_cast<int>(row.risk_label)];
    }
    for (int g = 0; g < 3; ++g) mean[g] /= count[g];
    CHECK(direction_order(mean[0], mean[1], mean[2]).order == "L>M>H");
}

TEST_CASE("null cohort produces constant channels and degenerate functionals") {
    CohortSpec spec;
    EffectProfile still;
    still.blink_rate_hz = 0.0;
    still.gaze_scan_rate_hz = 0.0;
    still.gaze_pitch_mean_rad = 0.0;
    still.head_motion_amp_rad = 0.0;
    still.head_motion_rate_hz = 0.0;
    still.lean_amp = 0.0;
    spec.effect_profiles = {still, still, still};
    spec.noise_sigma = 0.0;
    spec.dropout_rate = 0.0;
    spec.minutes_per_level_subject = {0.5, 0.5, 0.5};
    spec.n_subjects_per_level = {1, 1, 1};

    auto rec = generate_recording(spec, 0, 0, 5);
    auto channels = extract_channels(rec, EyeIndexMap{}, FaceModel3D{});
    for (const auto& ch : channels)
        for (size_t i = 0; i < ch.size(); ++i) {
            REQUIRE(ch.valid[i]);
            CHECK(ch.values[i] == 0.5); // constant signals normalize to 1/2
        }

    Segment seg;
    seg.subject_id = rec.subject_id;
    seg.channels = channels;
    auto feats = featurize(seg);
    auto names = feature_names({channels[0].name});
    for (size_t f = 0; f < 30; ++f) {
        const std::string& name = names[f];
        const double v = feats.features[f];
        if (name.find("d0_mean") != std::string::npos ||
            name.find("d0_max") != std::string::npos ||
            name.find("d0_min") != std::string::npos)
            CHECK(v == 0.5);
        else
            CHECK(v == 0.0); // variance, skewness, extrema, derivatives all collapse
    }
}

TEST_CASE("invalid specs are rejected") {
    CohortSpec spec = CohortSpec::default_spec();
    spec.fps = 0.0;
    CHECK_THROWS_AS(generate_cohort(spec), InvalidSpec);
    spec = CohortSpec::default_spec();
    spec.dropout_rate = 1.0;
    CHECK_THROWS_AS(generate_cohort(spec), InvalidSpec);
    spec = CohortSpec::default_spec();
    spec.effect_profiles[1].blink_duration_s = 0.0;
    CHECK_THROWS_AS(generate_cohort(spec), InvalidSpec);
}

TEST_CASE("dropout produces invalid frames at roughly the configured rate") {
    CohortSpec spec = CohortSpec::default_spec();
    spec.minutes_per_level_subject = {5.0, 5.0, 5.0};
    spec.dropout_rate = 0.05;
    auto rec = generate_recording(spec, 1, 0, 11);
    int invalid = 0;
    for (const auto& f : rec.frames) invalid += f.valid ? 0 : 1;
    const double rate = static_cast<double>(invalid) / rec.frames.size();
    CHECK(rate > 0.02);
    CHECK(rate < 0.09);
}

} // TEST_SUITE
