#include "facesig/stats.hpp"
#include "facesig/errors.hpp"
#include "facesig/special_functions.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace facesig {

namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size() - 1);
}

std::string fmt(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

} // namespace

AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups) {
    const int k = static_cast<int>(groups.size());
    int n_total = 0;
    double grand_sum = 0.0;
    for (const auto& g : groups) {
        if (g.size() < 2) throw Error("anova_oneway: each group needs >= 2 samples");
        n_total += static_cast<int>(g.size());
        grand_sum += std::accumulate(g.begin(), g.end(), 0.0);
    }
    const double grand_mean = grand_sum / n_total;
    double ssb = 0.0, ssw = 0.0;
    for (const auto& g : groups) {
        double gm = mean_of(g);
        ssb += g.size() * (gm - grand_mean) * (gm - grand_mean);
        for (double x : g) ssw += (x - gm) * (x - gm);
    }
    const double df_b = k - 1;
    const double df_w = n_total - k;
    AnovaResult r;
    if (ssw <= 0.0) {
        if (ssb <= 1e-300) {
            r.F = 0.0;
            r.p = 1.0;
        } else {
            r.F = std::numeric_limits<double>::infinity();
            r.p = 0.0;
            r.zero_within_variance = true;
        }
        return r;
    }
    r.F = (ssb / df_b) / (ssw / df_w);
    r.p = f_sf(r.F, df_b, df_w);
    return r;
}

TTestResult ttest_two_tailed(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) throw Error("ttest: each sample needs >= 2 values");
    const double ma = mean_of(a), mb = mean_of(b);
    const double va = sample_variance(a, ma), vb = sample_variance(b, mb);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double se2 = va / na + vb / nb;
    TTestResult r;
    if (se2 <= 0.0) {
        if (ma == mb) {
            r.t = 0.0;
            r.p = 1.0;
            return r;
        }
        throw ZeroVarianceBoth("ttest: zero variance in both samples with differing means");
    }
    r.t = (ma - mb) / std::sqrt(se2);
    const double df = se2 * se2 /
                      ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
    r.p = t_two_tailed_p(r.t, df);
    return r;
}

DirectionOrder direction_order(double mean_low, double mean_medium, double mean_high) {
    struct Entry {
        char label;
        double mean;
        int rank; // label order for tie-breaking
    };
    std::array<Entry, 3> e{{{'L', mean_low, 0}, {'M', mean_medium, 1}, {'H', mean_high, 2}}};
    DirectionOrder out;
    out.tied = (mean_low == mean_medium) || (mean_low == mean_high) || (mean_medium == mean_high);
    std::stable_sort(e.begin(), e.end(), [](const Entry& x, const Entry& y) {
        if (x.mean != y.mean) return x.mean > y.mean;
        return x.rank < y.rank;
    });
    out.order = std::string(1, e[0].label) + ">" + e[1].label + ">" + e[2].label;
    return out;
}

namespace {

// Residual sum of squares of y on the given design columns.
double sse_of(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    auto cod = x.completeOrthogonalDecomposition();
    Eigen::VectorXd beta = cod.solve(y);
    return (y - x * beta).squaredNorm();
}

Eigen::MatrixXd hstack(const std::vector<const Eigen::MatrixXd*>& blocks, int rows) {
    int cols = 0;
    for (auto* b : blocks) cols += static_cast<int>(b->cols());
    Eigen::MatrixXd out(rows, cols);
    int at = 0;
    for (auto* b : blocks) {
        out.middleCols(at, b->cols()) = *b;
        at += static_cast<int>(b->cols());
    }
    return out;
}

// sum-to-zero (effect) coding: level i -> column i for i < L-1,
// last level -> -1 in every column
Eigen::MatrixXd effect_code(const std::vector<int>& levels, int n_levels) {
    const int n = static_cast<int>(levels.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, std::max(0, n_levels - 1));
    for (int i = 0; i < n; ++i) {
        if (levels[i] < n_levels - 1)
            m(i, levels[i]) = 1.0;
        else
            m.row(i).setConstant(-1.0);
    }
    return m;
}

} // namespace

TwoFactorResult anova_two_factor_type3(const std::vector<double>& values,
                                       const std::vector<int>& risk,
                                       const std::vector<std::string>& subject) {
    const int n = static_cast<int>(values.size());
    if (n < 4 || risk.size() != values.size() || subject.size() != values.size())
        throw RankDeficientDesign("two-factor design: bad input sizes");

    std::vector<std::string> subj_levels;
    std::vector<int> subj_idx(n);
    for (int i = 0; i < n; ++i) {
        auto it = std::find(subj_levels.begin(), subj_levels.end(), subject[i]);
        if (it == subj_levels.end()) {
            subj_levels.push_back(subject[i]);
            subj_idx[i] = static_cast<int>(subj_levels.size()) - 1;
        } else {
            subj_idx[i] = static_cast<int>(it - subj_levels.begin());
        }
    }
    const int a = 1 + *std::max_element(risk.begin(), risk.end());
    const int b = static_cast<int>(subj_levels.size());
    if (a < 2 || b < 2) throw RankDeficientDesign("two-factor design needs >= 2 levels per factor");

    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = values[i];

    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(n, 1);
    Eigen::MatrixXd xa = effect_code(risk, a);
    Eigen::MatrixXd xb = effect_code(subj_idx, b);
    Eigen::MatrixXd xab(n, xa.cols() * xb.cols());
    for (int i = 0; i < xa.cols(); ++i)
        for (int j = 0; j < xb.cols(); ++j)
            xab.col(i * xb.cols() + j) = xa.col(i).cwiseProduct(xb.col(j));

    Eigen::MatrixXd full = hstack({&ones, &xa, &xb, &xab}, n);
    auto cod_full = full.completeOrthogonalDecomposition();
    const int rank_full = static_cast<int>(cod_full.rank());
    const double sse_full = (y - full * cod_full.solve(y)).squaredNorm();
    const double df_error = n - rank_full;

    TwoFactorResult r;
    r.rank_deficient = rank_full < full.cols();
    if (df_error <= 0) throw RankDeficientDesign("two-factor design has no residual df");

    const double total_ss = (y.array() - y.mean()).matrix().squaredNorm();
    if (total_ss <= 1e-300) return r; // all-equal responses: every p stays 1

    const double mse = sse_full / df_error;

    auto effect_p = [&](const Eigen::MatrixXd& reduced, double df_effect) {
        double ss = sse_of(reduced, y) - sse_full;
        if (ss < 0.0) ss = 0.0;
        if (mse <= 1e-300) return ss > 1e-12 ? 0.0 : 1.0;
        double f = (ss / df_effect) / mse;
        return f_sf(f, df_effect, df_error);
    };

    r.risk_p = effect_p(hstack({&ones, &xb, &xab}, n), a - 1.0);
    r.subject_p = effect_p(hstack({&ones, &xa, &xab}, n), b - 1.0);
    r.interaction_p = effect_p(hstack({&ones, &xa, &xb}, n), (a - 1.0) * (b - 1.0));
    return r;
}

AnovaResult repeated_measures_subject_level(const std::vector<double>& values,
                                            const std::vector<int>& risk,
                                            const std::vector<std::string>& subject) {
    std::map<std::string, std::pair<double, int>> acc; // subject -> (sum, count)
    std::map<std::string, int> subj_risk;
    for (size_t i = 0; i < values.size(); ++i) {
        acc[subject[i]].first += values[i];
        acc[subject[i]].second += 1;
        subj_risk[subject[i]] = risk[i];
    }
    std::vector<std::vector<double>> groups(kNumRiskLevels);
    for (const auto& [id, sum_count] : acc)
        groups[subj_risk[id]].push_back(sum_count.first / sum_count.second);
    for (const auto& g : groups)
        if (g.size() < 2)
            throw FewerThanTwoSubjectsPerGroup("repeated-measures test needs >= 2 subjects per group");
    return anova_oneway(groups);
}

StatReport run_stat_suite(const FeatureTable& table, double alpha) {
    StatReport report;
    report.alpha = alpha;
    report.n_tests = static_cast<int>(table.n_features());
    report.corrected_alpha = alpha / report.n_tests;

    const size_t n_rows = table.rows.size();
    std::vector<int> risk(n_rows);
    std::vector<std::string> subject(n_rows);
    for (size_t i = 0; i < n_rows; ++i) {
        risk[i] = static_cast<int>(table.rows[i].risk_label);
        subject[i] = table.rows[i].subject_id;
    }

    for (size_t f = 0; f < table.n_features(); ++f) {
        FeatureStat fs;
        fs.name = table.names[f];
        std::vector<std::vector<double>> groups(kNumRiskLevels);
        std::vector<double> values(n_rows);
        for (size_t i = 0; i < n_rows; ++i) {
            values[i] = table.rows[i].features[f];
            groups[risk[i]].push_back(values[i]);
        }
        try {
            auto anova = anova_oneway(groups);
            fs.anova_F = anova.F;
            fs.anova_p = anova.p;
            fs.bonferroni_significant = anova.p <= report.corrected_alpha;

            for (int g = 0; g < kNumRiskLevels; ++g) fs.group_means[g] = mean_of(groups[g]);
            fs.direction = direction_order(fs.group_means[0], fs.group_means[1], fs.group_means[2]);

            auto pairwise = [&](int i, int j, TTestResult& out, bool& sig) {
                try {
                    out = ttest_two_tailed(groups[i], groups[j]);
                } catch (const Error&) {
                    out = TTestResult{std::numeric_limits<double>::infinity(), 0.0};
                }
                sig = out.p <= report.corrected_alpha;
            };
            pairwise(0, 1, fs.t_lm, fs.sig_lm);
            pairwise(0, 2, fs.t_lh, fs.sig_lh);
            pairwise(1, 2, fs.t_mh, fs.sig_mh);

            try {
                fs.two_factor = anova_two_factor_type3(values, risk, subject);
                fs.subject_free =
                    fs.two_factor.interaction_p < alpha && fs.two_factor.subject_p >= alpha;
            } catch (const RankDeficientDesign& e) {
                fs.two_factor.rank_deficient = true;
                fs.subject_free = false;
            }

            try {
                auto rm = repeated_measures_subject_level(values, risk, subject);
                fs.rm_F = rm.F;
                fs.rm_p = rm.p;
            } catch (const FewerThanTwoSubjectsPerGroup&) {
                fs.rm_p = 1.0;
            }
        } catch (const Error& e) {
            fs.skipped = true;
            fs.skip_reason = e.what();
        }

        if (!fs.skipped) {
            if (fs.bonferroni_significant && (fs.sig_lm || fs.sig_lh || fs.sig_mh))
                report.significant.push_back(fs.name);
            if (fs.subject_free) report.subject_free.push_back(fs.name);
            if (fs.rm_p < alpha) report.rm_significant.push_back(fs.name);
        }
        report.features.push_back(std::move(fs));
    }
    return report;
}

void StatReport::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write stat report csv: " + path);
    out << "feature,anova_F,anova_p,bonferroni_significant,"
           "t_LM,p_LM,sig_LM,t_LH,p_LH,sig_LH,t_MH,p_MH,sig_MH,"
           "mean_L,mean_M,mean_H,direction,tied,"
           "risk_p,subject_p,interaction_p,subject_free,rm_F,rm_p,skipped\n";
    for (const auto& f : features) {
        out << f.name << "," << fmt(f.anova_F) << "," << fmt(f.anova_p) << ","
            << (f.bonferroni_significant ? 1 : 0) << ","
            << fmt(f.t_lm.t) << "," << fmt(f.t_lm.p) << "," << (f.sig_lm ? 1 : 0) << ","
            << fmt(f.t_lh.t) << "," << fmt(f.t_lh.p) << "," << (f.sig_lh ? 1 : 0) << ","
            << fmt(f.t_mh.t) << "," << fmt(f.t_mh.p) << "," << (f.sig_mh ? 1 : 0) << ","
            << fmt(f.group_means[0]) << "," << fmt(f.group_means[1]) << ","
            << fmt(f.group_means[2]) << "," << f.direction.order << ","
            << (f.direction.tied ? 1 : 0) << ","
            << fmt(f.two_factor.risk_p) << "," << fmt(f.two_factor.subject_p) << ","
            << fmt(f.two_factor.interaction_p) << "," << (f.subject_free ? 1 : 0) << ","
            << fmt(f.rm_F) << "," << fmt(f.rm_p) << "," << (f.skipped ? 1 : 0) << "\n";
    }
}

void StatReport::write_json(const std::string& path) const {
    nlohmann::json j;
    j["alpha"] = alpha;
    j["n_tests"] = n_tests;
    j["corrected_alpha"] = corrected_alpha;
    j["significant"] = significant;
    j["subject_free"] = subject_free;
    j["rm_significant"] = rm_significant;
    nlohmann::json dirs = nlohmann::json::object();
    for (const auto& f : features)
        if (!f.skipped) dirs[f.name] = f.direction.order;
    j["directions"] = std::move(dirs);
    std::ofstream out(path);
    if (!out) throw Error("cannot write stat report json: " + path);
    out << j.dump(2) << "\n";
}

} // namespace facesig
