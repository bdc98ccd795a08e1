#ifndef FACESIG_SYNTH_HPP
#define FACESIG_SYNTH_HPP

#include "facesig/signals.hpp"
#include "facesig/types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace facesig {

/// Per-risk-level behavior parameters driving the landmark animation.
struct EffectProfile {
    double blink_rate_hz = 0.3;       // blink events per second
    double blink_duration_s = 0.25;   // triangular dip length
    double gaze_scan_rate_hz = 0.2;   // gaze sweep frequency
    double gaze_pitch_mean_rad = 0.0;
    double head_motion_amp_rad = 0.1; // pitch/yaw/roll oscillation amplitude
    double head_motion_rate_hz = 0.15;
    double lean_amp = 0.05;           // relative head-distance oscillation
};

struct CohortSpec {
    std::array<int, 3> n_subjects_per_level{4, 4, 2};
    std::array<double, 3> minutes_per_level_subject{15.0, 17.0, 15.0};
    double fps = 10.0;
    std::array<EffectProfile, 3> effect_profiles; // L, M, H
    double noise_sigma = 0.15;                    // landmark noise, px
    double dropout_rate = 0.01;                   // chance a frame is face-lost
    bool emit_gaze = true;
    std::uint64_t seed = 1;

    void validate() const; // throws InvalidSpec

    /// Strongly separable defaults (the pipeline-verification preset):
    /// higher risk means fewer/slower blinks, smaller head motion and
    /// a lower mean gaze pitch.
    static CohortSpec default_spec();
    /// Weak preset with nearly overlapping level profiles, for
    /// chance-band testing.
    static CohortSpec weak_spec();
};

Recording generate_recording(const CohortSpec& spec, int level, int subject_ordinal,
                             std::uint64_t subject_seed);

/// Deterministic synthetic cohort; the same seed reproduces the exact
/// landmark streams.
std::vector<Recording> generate_cohort(const CohortSpec& spec);

} // namespace facesig

#endif
