#ifndef FACESIG_STATS_HPP
#define FACESIG_STATS_HPP

#include "facesig/functionals.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace facesig {

struct AnovaResult {
    double F = 0.0;
    double p = 1.0;
    bool zero_within_variance = false;
};

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
};

/// Classical one-way ANOVA: F = MSB/MSW with df (k-1, N-k). When the
/// within-group variance is zero but means differ, p = 0 and the
/// zero_within_variance flag is set.
AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups);

/// Welch's unequal-variance t-test with Welch-Satterthwaite df.
TTestResult ttest_two_tailed(const std::vector<double>& a, const std::vector<double>& b);

struct DirectionOrder {
    std::string order; // e.g. "L>M>H"
    bool tied = false;
};

/// Sort the three group-mean labels descending; exact ties keep L, M,
/// H order and set the tie flag.
DirectionOrder direction_order(double mean_low, double mean_medium, double mean_high);

struct TwoFactorResult {
    double risk_p = 1.0;
    double subject_p = 1.0;
    double interaction_p = 1.0;
    bool rank_deficient = false;
};

/// Type-III two-factor ANOVA with sum-to-zero effect coding.
/// SS(effect) = SSE(model without effect) - SSE(full model), tested
/// against the full model's residual mean square.
TwoFactorResult anova_two_factor_type3(const std::vector<double>& values,
                                       const std::vector<int>& risk,
                                       const std::vector<std::string>& subject);

/// Two-stage conservative repeated-measures test: collapse each
/// subject's segments to its mean, then one-way ANOVA across risk
/// groups at the subject level.
AnovaResult repeated_measures_subject_level(const std::vector<double>& values,
                                            const std::vector<int>& risk,
                                            const std::vector<std::string>& subject);

struct FeatureStat {
    std::string name;
    double anova_F = 0.0;
    double anova_p = 1.0;
    bool bonferroni_significant = false;
    // pairwise comparisons: LM, LH, MH
    TTestResult t_lm, t_lh, t_mh;
    bool sig_lm = false, sig_lh = false, sig_mh = false;
    std::array<double, 3> group_means{0.0, 0.0, 0.0}; // L, M, H
    DirectionOrder direction;
    TwoFactorResult two_factor;
    bool subject_free = false; // interaction significant, subject effect not
    double rm_F = 0.0;         // repeated-measures (subject-level) test
    double rm_p = 1.0;
    bool skipped = false;
    std::string skip_reason;
};

struct StatReport {
    double alpha = 0.05;
    int n_tests = 0;
    double corrected_alpha = 0.0;
    std::vector<FeatureStat> features;
    std::vector<std::string> significant;  // Bonferroni ANOVA + >=1 significant post-hoc pair
    std::vector<std::string> subject_free; // two-factor criterion
    std::vector<std::string> rm_significant;

    void write_csv(const std::string& path) const;
    void write_json(const std::string& path) const;
};

/// Run the whole per-feature hypothesis-testing suite. Per-feature
/// failures are recorded, never fatal. The Bonferroni divisor is the
/// actual feature count.
StatReport run_stat_suite(const FeatureTable& table, double alpha = 0.05);

} // namespace facesig

#endif
