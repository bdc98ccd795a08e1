#ifndef FACESIG_PIPELINE_HPP
#define FACESIG_PIPELINE_HPP

#include "facesig/classify.hpp"
#include "facesig/config.hpp"
#include "facesig/functionals.hpp"
#include "facesig/ingest.hpp"
#include "facesig/postproc.hpp"
#include "facesig/select.hpp"
#include "facesig/stats.hpp"
#include "facesig/synth.hpp"

#include <string>
#include <vector>

namespace facesig {

/// Resolved pipeline settings. Unknown config keys are rejected.
struct PipelineConfig {
    Config raw;
    std::uint64_t seed = 1;
    // input: either a manifest to ingest or a synthetic cohort
    std::string manifest_path;
    RecordingFormat format = RecordingFormat::Csv;
    bool use_synth = false;
    CohortSpec synth_spec;

    int smoothing_window = 7;
    SliceOptions slice;
    double alpha = 0.05;
    StabilityOptions selection;
    ModelKind model = ModelKind::SvmLinear;
    SamplingMode sampling = SamplingMode::None;
    int trials = 10;
    bool extend_c_grid = false;
    bool run_controls = true;
    double representative_margin = 0.03;

    static PipelineConfig load(const std::string& path);
    static PipelineConfig from_config(const Config& cfg, const std::string& base_dir);
};

struct PipelineSummary {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    int n_recordings = 0;
    int n_segments = 0;
    int n_features = 0;
    int n_significant = 0;
    int n_selected = 0;
    double all_features_accuracy = 0.0;
    double selected_features_accuracy = 0.0;
    double all_features_mcc = 0.0;
    double selected_features_mcc = 0.0;
    double control_label_accuracy = 0.0;
    double control_feature_accuracy = 0.0;
    double control_label_mcc = 0.0;
    double control_feature_mcc = 0.0;
    bool selection_representative = false;
    std::vector<std::string> skipped_stages; // stages served from cache
};

/// Execute the full chain into run_dir/{signals,features,stats,
/// selection,models,summary}. Stage outputs are keyed by a hash of
/// their config subset and inputs; a stage whose key matches an
/// existing output is skipped.
PipelineSummary run_pipeline(const PipelineConfig& config, const std::string& run_dir);

} // namespace facesig

#endif
