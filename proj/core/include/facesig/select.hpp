#ifndef FACESIG_SELECT_HPP
#define FACESIG_SELECT_HPP

#include "facesig/functionals.hpp"
#include "facesig/stats.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace facesig {

enum class SelectorMethod { FScore, MutualInfo, Chi2, ReliefF, Mrmr, VarianceRatio };

const char* to_string(SelectorMethod m);
SelectorMethod selector_method_from_string(const std::string& s);
extern const std::vector<SelectorMethod> kDefaultSelectorMethods;

struct SelectorScore {
    SelectorMethod method = SelectorMethod::FScore;
    std::vector<double> scores; // higher = more relevant
    std::vector<int> ranks;     // permutation of 1..n, 1 = best
};

/// Score every feature column for relevance to the class labels.
/// chi2 and mutual information discretize each feature into 10
/// equal-width bins; constant features score 0 under all methods.
SelectorScore score_features(SelectorMethod method, const Eigen::MatrixXd& x,
                             const std::vector<int>& y);

struct StabilityOptions {
    std::vector<SelectorMethod> methods = kDefaultSelectorMethods;
    int k_folds = 10;
    int runs = 2;
    std::vector<double> threshold_grid = {0.05, 0.10, 0.15, 0.20};
    double bts_min = 0.5;
    int m_min = 0; // 0 = half of the methods, rounded up
    double top_fraction = 0.10;
    double redundancy_r = 0.95;
    std::uint64_t seed = 1;
};

struct SelectionReport {
    std::vector<std::string> feature_names;
    // bts[feature][method]: fraction of (run, fold, threshold) triples selected
    std::vector<std::vector<double>> bts_per_method;
    std::vector<double> bts;               // mean across methods
    std::vector<double> jaccard_per_method; // mean pairwise JI of top-10% sets
    std::vector<double> mean_rank;
    std::vector<std::string> final_set;
    std::vector<std::string> pruned_redundant;
    int cap = 0;

    void write_json(const std::string& path) const;
    void write_csv(const std::string& path) const;
};

/// 10-fold x 2-run stability selection across all methods: per fold-run
/// each method ranks the training features; top-t sets for every grid
/// threshold feed the per-feature BTS frequencies and the per-method
/// Jaccard Index of top-10% sets. The final set keeps features whose
/// per-method BTS clears bts_min for at least m_min methods, prunes
/// |r| > redundancy_r duplicates keeping the higher-BTS member, and
/// truncates to the top-10% cap by mean rank.
SelectionReport stability_run(const Eigen::MatrixXd& x, const std::vector<int>& y,
                              const std::vector<std::string>& feature_names,
                              const StabilityOptions& opts = {});

struct SelectedFeatureInfo {
    std::string name;
    double mean_low = 0.0, mean_medium = 0.0, mean_high = 0.0;
    DirectionOrder direction;
    double bts = 0.0;
};

/// Attach group means and direction orderings to the final set.
std::vector<SelectedFeatureInfo> explain_selection(const SelectionReport& report,
                                                   const FeatureTable& table);

/// Convenience: feature matrix + labels out of a FeatureTable.
Eigen::MatrixXd feature_matrix(const FeatureTable& table);
std::vector<int> feature_labels(const FeatureTable& table);

} // namespace facesig

#endif
