#include "facesig/errors.hpp"
#include "facesig/ingest.hpp"

#include <doctest.h>

#include <limits>
#include <random>
#include <sstream>

using namespace facesig;

namespace {

Recording sample_recording(bool with_gaze, int n_frames = 20) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coord(0.0, 640.0);
    Recording rec;
    rec.subject_id = "S1";
    rec.risk_label = RiskLabel::Medium;
    rec.fps = 30.0;
    for (int fi = 0; fi < n_frames; ++fi) {
        LandmarkFrame f;
        f.frame_index = fi;
        f.timestamp_s = fi / rec.fps;
        if (fi == 5) { // a face-lost frame
            f.valid = false;
            rec.frames.push_back(f);
            continue;
        }
        f.landmarks.resize(kNumLandmarks);
        for (auto& p : f.landmarks) p = Point2{coord(rng), coord(rng)};
        if (with_gaze) {
            f.gaze_left = GazeAngles{0.1 * fi, -0.05};
            f.gaze_right = GazeAngles{0.1 * fi + 0.01, -0.04};
        }
        f.valid = true;
        rec.frames.push_back(f);
    }
    return rec;
}

bool recordings_equal(const Recording& a, const Recording& b) {
    if (a.subject_id != b.subject_id || a.risk_label != b.risk_label || a.fps != b.fps ||
        a.frames.size() != b.frames.size())
        return false;
    for (size_t i = 0; i < a.frames.size(); ++i) {
        const auto& fa = a.frames[i];
        const auto& fb = b.frames[i];
        if (fa.valid != fb.valid || fa.frame_index != fb.frame_index ||
            fa.timestamp_s != fb.timestamp_s)
            return false;
        if (!fa.valid) continue;
        for (int k = 0; k < kNumLandmarks; ++k)
            if (fa.landmarks[k].x != fb.landmarks[k].x || fa.landmarks[k].y != fb.landmarks[k].y)
                return false;
        if (fa.gaze_left.has_value() != fb.gaze_left.has_value()) return false;
        if (fa.gaze_left &&
            (fa.gaze_left->pitch_rad != fb.gaze_left->pitch_rad ||
             fa.gaze_left->yaw_rad != fb.gaze_left->yaw_rad ||
             fa.gaze_right->pitch_rad != fb.gaze_right->pitch_rad ||
             fa.gaze_right->yaw_rad != fb.gaze_right->yaw_rad))
            return false;
    }
    return true;
}

Recording round_trip(const Recording& rec, RecordingFormat format) {
    std::stringstream buf;
    serialize_recording(rec, buf, format);
    return parse_recording_stream(buf, format, "<test>");
}

} // namespace

TEST_SUITE("ingest") {

TEST_CASE("csv round trip is exact, with and without gaze") {
    for (bool gaze : {true, false}) {
        Recording rec = sample_recording(gaze);
        CHECK(recordings_equal(rec, round_trip(rec, RecordingFormat::Csv)));
    }
}

TEST_CASE("jsonl round trip is exact") {
    Recording rec = sample_recording(true);
    CHECK(recordings_equal(rec, round_trip(rec, RecordingFormat::Jsonl)));
}

TEST_CASE("serialized csv is byte-stable") {
    Recording rec = sample_recording(true);
    std::stringstream a, b;
    serialize_recording(rec, a, RecordingFormat::Csv);
    serialize_recording(rec, b, RecordingFormat::Csv);
    CHECK(a.str() == b.str());
}

TEST_CASE("missing header metadata throws") {
    std::stringstream in("#subject_id=S1\n#fps=30\nframe_index,timestamp_s\n");
    CHECK_THROWS_AS(parse_recording_stream(in, RecordingFormat::Csv), MissingHeaderField);
}

TEST_CASE("unknown risk label throws") {
    CHECK_THROWS_AS(risk_label_from_string("extreme"), UnknownRiskLabel);
    CHECK(risk_label_from_string("High") == RiskLabel::High);
    CHECK(risk_label_from_string("m") == RiskLabel::Medium);
}

TEST_CASE("rows with wrong landmark count become invalid frames") {
    Recording rec = sample_recording(false, 3);
    std::stringstream buf;
    serialize_recording(rec, buf, RecordingFormat::Csv);
    std::string text = buf.str();
    // truncate the last data row to a malformed one
    size_t last = text.rfind('\n', text.size() - 2);
    text = text.substr(0, last) + "\n2,0.0666,1.0,2.0\n";
    std::stringstream in(text);
    Recording parsed = parse_recording_stream(in, RecordingFormat::Csv);
    REQUIRE(parsed.frames.size() == 3);
    CHECK_FALSE(parsed.frames[2].valid);
    CHECK(parsed.frames[1].valid);
}

TEST_CASE("non-finite coordinates invalidate the frame") {
    Recording rec = sample_recording(false, 2);
    rec.frames[1].landmarks[0].x = std::numeric_limits<double>::quiet_NaN();
    std::stringstream buf;
    serialize_recording(rec, buf, RecordingFormat::Csv);
    Recording parsed = parse_recording_stream(buf, RecordingFormat::Csv);
    CHECK(parsed.frames[0].valid);
    CHECK_FALSE(parsed.frames[1].valid);
}

TEST_CASE("non-monotonic frame index throws") {
    Recording rec = sample_recording(false, 3);
    rec.frames[2].frame_index = 1;
    std::stringstream buf;
    serialize_recording(rec, buf, RecordingFormat::Csv);
    CHECK_THROWS_AS(parse_recording_stream(buf, RecordingFormat::Csv), NonMonotonicFrameIndex);
}

TEST_CASE("decreasing timestamps throw") {
    Recording rec = sample_recording(false, 3);
    rec.frames[2].timestamp_s = 0.0;
    rec.frames[1].timestamp_s = 0.5;
    std::stringstream buf;
    serialize_recording(rec, buf, RecordingFormat::Csv);
    CHECK_THROWS_AS(parse_recording_stream(buf, RecordingFormat::Csv), NonMonotonicFrameIndex);
}

TEST_CASE("predicted segment count arithmetic") {
    Recording rec;
    rec.fps = 10.0;
    rec.frames.resize(9000); // 15 minutes at 10 fps
    CHECK(predicted_segments(rec, 120.0, 60.0) == 14);
    rec.frames.resize(1199); // just under one window
    CHECK(predicted_segments(rec, 120.0, 60.0) == 0);
    rec.frames.resize(1200);
    CHECK(predicted_segments(rec, 120.0, 60.0) == 1);
}

TEST_CASE("cohort summary aggregates per level") {
    std::vector<Recording> cohort;
    for (int i = 0; i < 2; ++i) {
        Recording rec;
        rec.subject_id = "L" + std::to_string(i);
        rec.risk_label = RiskLabel::Low;
        rec.fps = 10.0;
        rec.frames.resize(9000);
        cohort.push_back(rec);
    }
    Recording high;
    high.subject_id = "H1";
    high.risk_label = RiskLabel::High;
    high.fps = 10.0;
    high.frames.resize(3000); // 5 minutes -> 4 segments
    cohort.push_back(high);

    auto summary = validate_cohort(cohort);
    CHECK(summary.per_level[0].n_subjects == 2);
    CHECK(summary.per_level[0].total_minutes == doctest::Approx(30.0));
    CHECK(summary.per_level[0].predicted_segments == 28);
    CHECK(summary.per_level[2].predicted_segments == 4);
    CHECK(summary.total_subjects == 3);
    CHECK(summary.total_predicted_segments == 32);
}

TEST_CASE("empty cohort throws") {
    CHECK_THROWS_AS(validate_cohort({}), EmptyCohort);
}

TEST_CASE("eye index map validation") {
    EyeIndexMap map;
    CHECK_NOTHROW(map.validate());
    map.left_eye[0] = 99;
    CHECK_THROWS_AS(map.validate(), InvalidSpec);
    map.left_eye[0] = map.left_eye[1];
    CHECK_THROWS_AS(map.validate(), InvalidSpec);
}

} // TEST_SUITE
