#include "facesig/synth.hpp"
#include "facesig/errors.hpp"
#include "facesig/splits.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace facesig {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

// 68-point frontal template, model units relative to interocular width;
// only a rough face outline is needed for the landmarks the pipeline
// never reads
std::array<double, 2> template_offset(int i) {
    // jaw 0-16: half ellipse
    if (i <= 16) {
        double t = (i - 8.0) / 8.0;
        return {0.8 * t, 0.35 + 0.55 * std::sqrt(std::max(0.0, 1.0 - t * t))};
    }
    // brows 17-26
    if (i <= 26) {
        double t = (i - 21.5) / 5.0;
        return {0.7 * t, -0.25};
    }
    // nose 27-35
    if (i <= 35) return {0.05 * (i - 31), 0.15 + 0.03 * (i - 27)};
    // eyes 36-47 (overwritten each frame)
    if (i <= 47) return {0.0, 0.0};
    // mouth 48-67
    double t = (i - 57.5) / 10.0;
    return {0.45 * t, 0.55 + 0.08 * std::sin(kTau * t)};
}

struct BlinkTrack {
    std::vector<double> onsets;
    double duration = 0.25;

    double openness(double t) const {
        for (double onset : onsets) {
            if (t >= onset && t < onset + duration) {
                double phase = (t - onset) / duration; // 0..1
                double depth = 1.0 - std::fabs(2.0 * phase - 1.0);
                return 1.0 - 0.95 * depth;
            }
            if (onset > t) break;
        }
        return 1.0;
    }
};

BlinkTrack schedule_blinks(double rate_hz, double duration_s, double total_s,
                           std::mt19937_64& rng) {
    BlinkTrack track;
    track.duration = duration_s;
    if (rate_hz <= 0.0) return track;
    std::uniform_real_distribution<double> jitter(-0.2, 0.2);
    double t = 0.5 / rate_hz;
    while (t < total_s) {
        track.onsets.push_back(t);
        t += (1.0 + jitter(rng)) / rate_hz;
    }
    return track;
}

} // namespace

void CohortSpec::validate() const {
    if (fps <= 0.0) throw InvalidSpec("fps must be positive");
    if (noise_sigma < 0.0 || dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw InvalidSpec("bad noise/dropout settings");
    for (int level = 0; level < 3; ++level) {
        if (n_subjects_per_level[level] < 0) throw InvalidSpec("negative subject count");
        if (minutes_per_level_subject[level] < 0.0) throw InvalidSpec("negative duration");
        const auto& p = effect_profiles[level];
        if (p.blink_rate_hz < 0.0 || p.blink_duration_s <= 0.0 || p.gaze_scan_rate_hz < 0.0 ||
            p.head_motion_amp_rad < 0.0 || p.head_motion_rate_hz < 0.0 || p.lean_amp < 0.0)
            throw InvalidSpec("effect profile rates/amplitudes must be nonnegative");
    }
}

CohortSpec CohortSpec::default_spec() {
    CohortSpec spec;
    spec.effect_profiles[0] = {0.50, 0.20, 0.30, +0.05, 0.12, 0.20, 0.08};
    spec.effect_profiles[1] = {0.35, 0.28, 0.20, 0.00, 0.07, 0.15, 0.05};
    spec.effect_profiles[2] = {0.15, 0.40, 0.10, -0.10, 0.03, 0.10, 0.02};
    return spec;
}

CohortSpec CohortSpec::weak_spec() {
    CohortSpec spec;
    spec.effect_profiles[0] = {0.36, 0.25, 0.20, 0.005, 0.072, 0.15, 0.05};
    spec.effect_profiles[1] = {0.35, 0.25, 0.20, 0.000, 0.070, 0.15, 0.05};
    spec.effect_profiles[2] = {0.34, 0.25, 0.20, -0.005, 0.068, 0.15, 0.05};
    spec.noise_sigma = 0.4;
    return spec;
}

Recording generate_recording(const CohortSpec& spec, int level, int subject_ordinal,
                             std::uint64_t subject_seed) {
    std::mt19937_64 rng(subject_seed);
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    std::uniform_real_distribution<double> phase(0.0, kTau);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> subject_jitter(1.0, 0.08);

    EffectProfile p = spec.effect_profiles[level];
    p.blink_rate_hz *= std::max(0.2, subject_jitter(rng));
    p.head_motion_amp_rad *= std::max(0.2, subject_jitter(rng));
    p.gaze_scan_rate_hz *= std::max(0.2, subject_jitter(rng));

    const double total_s = spec.minutes_per_level_subject[level] * 60.0;
    const auto n_frames = static_cast<std::int64_t>(std::llround(total_s * spec.fps));
    BlinkTrack blinks = schedule_blinks(p.blink_rate_hz, p.blink_duration_s, total_s, rng);

    const double phi_pitch = phase(rng), phi_yaw = phase(rng), phi_roll = phase(rng);
    const double phi_lean = phase(rng), phi_gaze = phase(rng);
    const double base_scale = 200.0;
    const double cx = 320.0, cy = 240.0;

    FaceModel3D model;
    const char level_letter = "LMH"[level];

    Recording rec;
    rec.subject_id = std::string(1, level_letter) + std::to_string(subject_ordinal + 1);
    rec.risk_label = static_cast<RiskLabel>(level);
    rec.fps = spec.fps;
    rec.frames.reserve(n_frames);

    for (std::int64_t fi = 0; fi < n_frames; ++fi) {
        const double t = static_cast<double>(fi) / spec.fps;
        LandmarkFrame frame;
        frame.frame_index = fi;
        frame.timestamp_s = t;
        if (unit(rng) < spec.dropout_rate) {
            frame.valid = false;
            rec.frames.push_back(std::move(frame));
            continue;
        }

        const double pitch = p.head_motion_amp_rad * std::sin(kTau * p.head_motion_rate_hz * t + phi_pitch);
        const double yaw = p.head_motion_amp_rad * std::sin(kTau * p.head_motion_rate_hz * 0.83 * t + phi_yaw);
        const double roll = 0.5 * p.head_motion_amp_rad * std::sin(kTau * p.head_motion_rate_hz * 0.61 * t + phi_roll);
        const double scale = base_scale * (1.0 + p.lean_amp * std::sin(kTau * 0.05 * t + phi_lean));

        auto pose_pts = project_model(model, pitch, yaw, roll, scale, cx, cy);

        frame.landmarks.resize(kNumLandmarks);
        for (int i = 0; i < kNumLandmarks; ++i) {
            auto off = template_offset(i);
            frame.landmarks[i] = Point2{cx + scale * off[0] + noise(rng),
                                        cy + scale * off[1] + noise(rng)};
        }

        const double open = blinks.openness(t);
        auto place_eye = [&](const Point2& outer, const Point2& inner, int i_p1, int i_p2,
                             int i_p3, int i_p4, int i_p5, int i_p6) {
            const double w = std::hypot(inner.x - outer.x, inner.y - outer.y);
            const double h = 0.30 * w * open;
            auto lerp = [&](double f) {
                return Point2{outer.x + f * (inner.x - outer.x), outer.y + f * (inner.y - outer.y)};
            };
            Point2 a = lerp(1.0 / 3.0), b = lerp(2.0 / 3.0);
            frame.landmarks[i_p1] = outer;
            frame.landmarks[i_p4] = inner;
            frame.landmarks[i_p2] = Point2{a.x, a.y - 0.5 * h};
            frame.landmarks[i_p6] = Point2{a.x, a.y + 0.5 * h};
            frame.landmarks[i_p3] = Point2{b.x, b.y - 0.5 * h};
            frame.landmarks[i_p5] = Point2{b.x, b.y + 0.5 * h};
        };
        // pose_pts order: outer-R, inner-R, inner-L, outer-L, mouth-R, mouth-L
        place_eye(pose_pts[0], pose_pts[1], 36, 37, 38, 39, 40, 41);
        place_eye(pose_pts[3], pose_pts[2], 45, 44, 43, 42, 47, 46);
        frame.landmarks[48] = pose_pts[4];
        frame.landmarks[54] = pose_pts[5];
        for (int i : {36, 37, 38, 39, 40, 41, 42, 43, 44, 45, 46, 47, 48, 54}) {
            frame.landmarks[i].x += noise(rng);
            frame.landmarks[i].y += noise(rng);
        }

        if (spec.emit_gaze) {
            // gaze noise tracks the landmark noise level, ~0.01 rad at the default sigma
            std::normal_distribution<double> gaze_noise(0.0, 0.05 * spec.noise_sigma);
            double gp = p.gaze_pitch_mean_rad +
                        0.10 * std::sin(kTau * p.gaze_scan_rate_hz * t + phi_gaze);
            double gy = 0.08 * std::sin(kTau * p.gaze_scan_rate_hz * 0.77 * t + phi_gaze * 0.5);
            frame.gaze_left = GazeAngles{gp + gaze_noise(rng), gy + gaze_noise(rng)};
            frame.gaze_right = GazeAngles{gp + gaze_noise(rng), gy + gaze_noise(rng)};
        }
        frame.valid = true;
        rec.frames.push_back(std::move(frame));
    }
    return rec;
}

std::vector<Recording> generate_cohort(const CohortSpec& spec) {
    spec.validate();
    std::vector<Recording> cohort;
    std::uint64_t subject_index = 0;
    for (int level = 0; level < 3; ++level) {
        for (int s = 0; s < spec.n_subjects_per_level[level]; ++s) {
            cohort.push_back(
                generate_recording(spec, level, s, derive_seed(spec.seed, subject_index)));
            ++subject_index;
        }
    }
    return cohort;
}

} // namespace facesig
