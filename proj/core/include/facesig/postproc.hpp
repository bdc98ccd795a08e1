#ifndef FACESIG_POSTPROC_HPP
#define FACESIG_POSTPROC_HPP

#include "facesig/signals.hpp"
#include "facesig/types.hpp"

#include <string>
#include <vector>

namespace facesig {

/// One named low-level signal with a per-frame validity mask.
struct ChannelSeries {
    std::string name;
    std::vector<double> values;
    std::vector<bool> valid;
    double fps = 0.0;

    size_t size() const { return values.size(); }
    int n_valid() const;
};

/// The canonical 7-channel order used everywhere downstream.
/// Gaze channels are dropped (channel count 5) when the input had no
/// gaze columns.
extern const std::vector<std::string> kChannelNames;

struct Segment {
    std::string subject_id;
    RiskLabel risk_label = RiskLabel::Low;
    int segment_index = 0;
    double start_s = 0.0;
    double end_s = 0.0;
    std::vector<ChannelSeries> channels;
    double valid_fraction = 0.0;
};

/// Centered moving average; the window truncates to the valid samples
/// actually available near edges and gaps. Invalid positions stay
/// invalid. Throws EvenWindow.
ChannelSeries moving_average(const ChannelSeries& series, int window = 7);

/// Per-frame mean of two eye signals; a single valid side is used
/// alone. Throws LengthMismatch.
ChannelSeries average_eyes(const ChannelSeries& left, const ChannelSeries& right);

/// Linear 0-1 scaling over the recording's valid values. A constant
/// series maps to 0.5 everywhere. Throws AllInvalid.
ChannelSeries minmax_normalize(const ChannelSeries& series);

struct SliceOptions {
    double window_s = 120.0;
    double hop_s = 60.0;
    double min_valid_fraction = 0.8;
};

struct SliceResult {
    std::vector<Segment> segments;
    int discarded_below_min_valid = 0;
};

/// Cut the per-recording channel set into fixed windows. Windows start
/// at 0, hop_s, 2*hop_s, ...; trailing partial windows are dropped;
/// windows whose all-channels-valid fraction is below
/// min_valid_fraction are discarded and counted.
SliceResult slice_segments(const std::vector<ChannelSeries>& channels,
                           const std::string& subject_id, RiskLabel risk_label,
                           const SliceOptions& opts = {});

/// Full per-recording low-level chain: frame signals -> per-channel
/// series -> smooth -> average eyes -> normalize. Returns the 7 (or 5,
/// without gaze) post-processed channels.
std::vector<ChannelSeries> extract_channels(const Recording& rec, const EyeIndexMap& map,
                                            const FaceModel3D& model,
                                            int smoothing_window = 7);

} // namespace facesig

#endif
