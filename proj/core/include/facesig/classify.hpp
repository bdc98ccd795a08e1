#ifndef FACESIG_CLASSIFY_HPP
#define FACESIG_CLASSIFY_HPP

#include "facesig/functionals.hpp"
#include "facesig/mlp.hpp"
#include "facesig/svm.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace facesig {

enum class ModelKind { Mlp1Hidden, SvmLinear, SvmRbf };
enum class SamplingMode { None, Oversample, Undersample };

const char* to_string(ModelKind k);
const char* to_string(SamplingMode m);
ModelKind model_kind_from_string(const std::string& s);
SamplingMode sampling_mode_from_string(const std::string& s);

struct ModelSpec {
    ModelKind kind = ModelKind::SvmLinear;
    SamplingMode sampling = SamplingMode::None;
    // grid-search controls
    int cv_folds = 10;
    bool extend_c_grid = false; // also try C in {1, 10, 100} before narrowing
    double svm_tol = 1e-3;
};

struct Dataset {
    Eigen::MatrixXd x;
    std::vector<int> y;

    int n() const { return static_cast<int>(x.rows()); }
    Dataset subset(const std::vector<int>& rows) const;
};

Dataset dataset_from_table(const FeatureTable& table);
Dataset restrict_features(const Dataset& data, const std::vector<std::string>& all_names,
                          const std::vector<std::string>& keep);

/// Duplicate minority rows (oversample) or drop majority rows
/// (undersample) until every class count matches the max/min count.
Dataset resample(const Dataset& train, SamplingMode mode, std::uint64_t seed);

/// Per-feature min-max map fitted on train only; constant train
/// features map to 0.5. Test values are not clipped.
struct MinMaxScaler {
    Eigen::VectorXd lo, span; // span = hi - lo, 0 marks constant columns
    void fit(const Eigen::MatrixXd& train);
    Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const;
};

struct ChosenHyper {
    int hidden_units = 0;
    double C = 0.0;
    double gamma = 0.0;
    double cv_score = 0.0;
};

/// Hidden-unit grid: 10 evenly spaced integers from floor(n/10)+1 to
/// n_features + floor(n/10)+1 (22..232 for 210 features, 2..14 for 12).
std::vector<int> mlp_hidden_grid(int n_features);

/// Radial-kernel gamma candidates: 1/(n_features * mean train
/// variance) times {0.1, 1, 10}.
std::vector<double> rbf_gamma_grid(const Eigen::MatrixXd& train);

/// Grid search by stratified cv_folds-fold cross-validation on the
/// training set, selecting on mean balanced accuracy. SVM C grids over
/// (0,1] are narrowed iteratively to 0.01 resolution; ties prefer the
/// smaller model / smaller C.
ChosenHyper grid_search(const Dataset& train, const ModelSpec& spec, std::uint64_t seed);

using Confusion = std::vector<std::vector<int>>; // [true][predicted]

double balanced_accuracy(const Confusion& confusion);
/// Gorodkin R_K multiclass correlation; 0 when the denominator is 0.
double mcc_multiclass(const Confusion& confusion);

struct TrialResult {
    int trial_index = 0;
    double balanced_accuracy = 0.0;
    double mcc = 0.0;
    Confusion confusion;
    ChosenHyper chosen_hyper;
    double kkt_violation = 0.0; // SVM models only
};

struct ExperimentResult {
    ModelSpec spec;
    std::vector<TrialResult> trials;
    double avg_accuracy = 0.0;
    double std_accuracy = 0.0;
    double avg_mcc = 0.0;

    void recompute_aggregates();
    void write_json(const std::string& path) const;
};

/// One trial: stratified 75/25 split, resample train, min-max scale on
/// train stats, grid search, fit, evaluate on test.
TrialResult run_trial(const Dataset& data, const ModelSpec& spec, int trial_index,
                      std::uint64_t seed);

ExperimentResult run_experiment(const Dataset& data, const ModelSpec& spec, int n_trials,
                                std::uint64_t master_seed);

struct ControlResults {
    ExperimentResult shuffled_labels;
    ExperimentResult shuffled_features;
};

/// Randomization controls: per trial, labels permuted once (control A)
/// or every feature column permuted independently (control B); the
/// rest of the pipeline is identical.
ControlResults randomization_controls(const Dataset& data, const ModelSpec& spec, int n_trials,
                                      std::uint64_t master_seed);

/// Table-4-shaped summary CSV: one column block per experiment.
void write_results_csv(const std::vector<std::pair<std::string, const ExperimentResult*>>& results,
                       const std::string& path);

} // namespace facesig

#endif
