#ifndef FACESIG_FUNCTIONALS_HPP
#define FACESIG_FUNCTIONALS_HPP

#include "facesig/postproc.hpp"

#include <string>
#include <vector>

namespace facesig {

/// The 10 per-series statistics, computed with population moments.
/// Constant series get skewness = kurtosis = 0; peaks and valleys are
/// strict local extrema with plateaus counted once.
struct StatBlock {
    double max = 0.0;
    double min = 0.0;
    double range = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    double std_dev = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0; // excess
    double n_peaks = 0.0;
    double n_valleys = 0.0;

    std::vector<double> as_vector() const;
};

extern const std::vector<std::string> kStatNames; // max, min, range, ...

/// First differences within contiguous valid runs; runs shorter than
/// order+1 contribute nothing. order = 2 differences the differences.
/// Throws TooShort when no run is long enough.
std::vector<double> derivative(const std::vector<double>& values,
                               const std::vector<bool>& valid, int order);

/// Throws EmptySeries.
StatBlock stat_block(const std::vector<double>& series);

struct SegmentFeatures {
    std::string subject_id;
    RiskLabel risk_label = RiskLabel::Low;
    int segment_index = 0;
    std::vector<double> features;
    std::vector<std::string> degenerate_channels; // channels zero-filled for lack of data
};

/// Deterministic feature name order: for each channel, d0/d1/d2 x the
/// 10 statistics, named `<channel>-d<k>_<stat>`.
std::vector<std::string> feature_names(const std::vector<std::string>& channel_names);

/// 30 statistics per channel: StatBlock of the signal, its first and
/// its second derivative. Channels with fewer than 3 valid frames get
/// 30 zeros and are flagged.
SegmentFeatures featurize(const Segment& segment);

/// A labeled feature table, one row per segment.
struct FeatureTable {
    std::vector<std::string> names;
    std::vector<SegmentFeatures> rows;

    size_t n_features() const { return names.size(); }
    void write_csv(const std::string& path) const;
    static FeatureTable read_csv(const std::string& path);
};

FeatureTable featurize_all(const std::vector<Segment>& segments,
                           const std::vector<std::string>& channel_names);

} // namespace facesig

#endif
