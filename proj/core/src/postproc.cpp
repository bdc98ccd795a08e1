#include "facesig/postproc.hpp"
#include "facesig/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace facesig {

const std::vector<std::string> kChannelNames = {
    "avg_ear", "eye_pitch", "eye_yaw", "head_distance",
    "head_pitch", "head_yaw", "head_roll",
};

int ChannelSeries::n_valid() const {
    return static_cast<int>(std::count(valid.begin(), valid.end(), true));
}

ChannelSeries moving_average(const ChannelSeries& series, int window) {
    if (window < 1 || window % 2 == 0) throw EvenWindow("window must be odd and positive");
    ChannelSeries out = series;
    const int n = static_cast<int>(series.size());
    const int half = window / 2;
    for (int i = 0; i < n; ++i) {
        if (!series.valid[i]) continue;
        double sum = 0.0;
        int count = 0;
        for (int j = std::max(0, i - half); j <= std::min(n - 1, i + half); ++j) {
            if (series.valid[j]) {
                sum += series.values[j];
                ++count;
            }
        }
        out.values[i] = sum / count;
    }
    return out;
}

ChannelSeries average_eyes(const ChannelSeries& left, const ChannelSeries& right) {
    if (left.size() != right.size() || left.fps != right.fps)
        throw LengthMismatch("eye series length or fps mismatch");
    ChannelSeries out;
    out.name = left.name;
    out.fps = left.fps;
    out.values.resize(left.size(), 0.0);
    out.valid.resize(left.size(), false);
    for (size_t i = 0; i < left.size(); ++i) {
        if (left.valid[i] && right.valid[i]) {
            out.values[i] = 0.5 * (left.values[i] + right.values[i]);
            out.valid[i] = true;
        } else if (left.valid[i]) {
            out.values[i] = left.values[i];
            out.valid[i] = true;
        } else if (right.valid[i]) {
            out.values[i] = right.values[i];
            out.valid[i] = true;
        }
    }
    return out;
}

ChannelSeries minmax_normalize(const ChannelSeries& series) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < series.size(); ++i) {
        if (!series.valid[i]) continue;
        lo = std::min(lo, series.values[i]);
        hi = std::max(hi, series.values[i]);
    }
    if (!std::isfinite(lo)) throw AllInvalid("series has no valid values");
    ChannelSeries out = series;
    if (hi - lo < 1e-15) {
        for (size_t i = 0; i < out.size(); ++i)
            if (out.valid[i]) out.values[i] = 0.5;
        return out;
    }
    const double inv = 1.0 / (hi - lo);
    for (size_t i = 0; i < out.size(); ++i)
        if (out.valid[i]) out.values[i] = (out.values[i] - lo) * inv;
    return out;
}

SliceResult slice_segments(const std::vector<ChannelSeries>& channels,
                           const std::string& subject_id, RiskLabel risk_label,
                           const SliceOptions& opts) {
    SliceResult result;
    if (channels.empty()) return result;
    if (!(opts.window_s > opts.hop_s && opts.hop_s > 0.0))
        throw InvalidSpec("require window_s > hop_s > 0");
    const double fps = channels.front().fps;
    const auto n = static_cast<std::int64_t>(channels.front().size());
    const auto window = static_cast<std::int64_t>(std::llround(fps * opts.window_s));
    const auto hop = static_cast<std::int64_t>(std::llround(fps * opts.hop_s));
    if (window <= 0 || hop <= 0 || n < window) return result;

    int index = 0;
    for (std::int64_t start = 0; start + window <= n; start += hop) {
        Segment seg;
        seg.subject_id = subject_id;
        seg.risk_label = risk_label;
        seg.segment_index = index;
        seg.start_s = static_cast<double>(start) / fps;
        seg.end_s = static_cast<double>(start + window) / fps;

        std::int64_t frames_all_valid = 0;
        for (std::int64_t i = start; i < start + window; ++i) {
            bool all = true;
            for (const auto& ch : channels)
                if (!ch.valid[static_cast<size_t>(i)]) { all = false; break; }
            if (all) ++frames_all_valid;
        }
        seg.valid_fraction = static_cast<double>(frames_all_valid) / static_cast<double>(window);
        if (seg.valid_fraction < opts.min_valid_fraction) {
            ++result.discarded_below_min_valid;
            ++index;
            continue;
        }
        for (const auto& ch : channels) {
            ChannelSeries slice;
            slice.name = ch.name;
            slice.fps = ch.fps;
            slice.values.assign(ch.values.begin() + start, ch.values.begin() + start + window);
            slice.valid.assign(ch.valid.begin() + start, ch.valid.begin() + start + window);
            seg.channels.push_back(std::move(slice));
        }
        result.segments.push_back(std::move(seg));
        ++index;
    }
    return result;
}

std::vector<ChannelSeries> extract_channels(const Recording& rec, const EyeIndexMap& map,
                                            const FaceModel3D& model, int smoothing_window) {
    const size_t n = rec.frames.size();
    bool has_gaze = std::any_of(rec.frames.begin(), rec.frames.end(), [](const LandmarkFrame& f) {
        return f.valid && f.gaze_left.has_value() && f.gaze_right.has_value();
    });

    auto make = [&](const std::string& name) {
        ChannelSeries s;
        s.name = name;
        s.fps = rec.fps;
        s.values.resize(n, 0.0);
        s.valid.resize(n, false);
        return s;
    };
    ChannelSeries ear_l = make("ear_left"), ear_r = make("ear_right");
    ChannelSeries gp_l = make("gaze_pitch_left"), gp_r = make("gaze_pitch_right");
    ChannelSeries gy_l = make("gaze_yaw_left"), gy_r = make("gaze_yaw_right");
    ChannelSeries dist = make("head_distance");
    ChannelSeries pitch = make("head_pitch"), yaw = make("head_yaw"), roll = make("head_roll");

    for (size_t i = 0; i < n; ++i) {
        auto sig = frame_signals(rec.frames[i], map, model);
        if (!sig) continue;
        auto put = [&](ChannelSeries& s, double v) {
            s.values[i] = v;
            s.valid[i] = true;
        };
        put(ear_l, sig->ear_left);
        put(ear_r, sig->ear_right);
        put(dist, sig->head_distance);
        put(pitch, sig->head_pitch);
        put(yaw, sig->head_yaw);
        put(roll, sig->head_roll);
        if (has_gaze && sig->gaze_left && sig->gaze_right) {
            put(gp_l, sig->gaze_left->pitch_rad);
            put(gy_l, sig->gaze_left->yaw_rad);
            put(gp_r, sig->gaze_right->pitch_rad);
            put(gy_r, sig->gaze_right->yaw_rad);
        }
    }

    // smooth per-eye first, then average (order is configurable upstream
    // only through re-composition; this is the default chain)
    auto smooth = [&](const ChannelSeries& s) { return moving_average(s, smoothing_window); };

    std::vector<ChannelSeries> out;
    auto finish = [&](ChannelSeries s, const std::string& name) {
        s.name = name;
        if (s.n_valid() > 0) s = minmax_normalize(s);
        out.push_back(std::move(s));
    };

    finish(average_eyes(smooth(ear_l), smooth(ear_r)), kChannelNames[0]);
    if (has_gaze) {
        finish(average_eyes(smooth(gp_l), smooth(gp_r)), kChannelNames[1]);
        finish(average_eyes(smooth(gy_l), smooth(gy_r)), kChannelNames[2]);
    }
    finish(smooth(dist), kChannelNames[3]);
    finish(smooth(pitch), kChannelNames[4]);
    finish(smooth(yaw), kChannelNames[5]);
    finish(smooth(roll), kChannelNames[6]);
    return out;
}

} // namespace facesig
