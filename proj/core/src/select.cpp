#include "facesig/select.hpp"
#include "facesig/errors.hpp"
#include "facesig/splits.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace facesig {

const std::vector<SelectorMethod> kDefaultSelectorMethods = {
    SelectorMethod::FScore,     SelectorMethod::MutualInfo, SelectorMethod::Chi2,
    SelectorMethod::ReliefF,    SelectorMethod::Mrmr,       SelectorMethod::VarianceRatio,
};

const char* to_string(SelectorMethod m) {
    switch (m) {
        case SelectorMethod::FScore: return "f_score";
        case SelectorMethod::MutualInfo: return "mutual_info";
        case SelectorMethod::Chi2: return "chi2";
        case SelectorMethod::ReliefF: return "relieff";
        case SelectorMethod::Mrmr: return "mrmr";
        case SelectorMethod::VarianceRatio: return "variance_ratio";
    }
    return "?";
}

SelectorMethod selector_method_from_string(const std::string& s) {
    for (auto m : kDefaultSelectorMethods)
        if (s == to_string(m)) return m;
    throw ConfigError("unknown selector method: " + s);
}

namespace {

constexpr int kBins = 10;

// equal-width 10-bin discretization of one column
std::vector<int> discretize(const Eigen::VectorXd& col) {
    double lo = col.minCoeff(), hi = col.maxCoeff();
    std::vector<int> bins(col.size(), 0);
    if (hi - lo < 1e-15) return bins;
    double inv = kBins / (hi - lo);
    for (Eigen::Index i = 0; i < col.size(); ++i)
        bins[i] = std::min(kBins - 1, static_cast<int>((col(i) - lo) * inv));
    return bins;
}

int count_classes(const std::vector<int>& y) {
    return 1 + *std::max_element(y.begin(), y.end());
}

double mutual_info_binned(const std::vector<int>& a, int ka, const std::vector<int>& b, int kb) {
    const double n = static_cast<double>(a.size());
    std::vector<double> joint(ka * kb, 0.0), pa(ka, 0.0), pb(kb, 0.0);
    for (size_t i = 0; i < a.size(); ++i) {
        joint[a[i] * kb + b[i]] += 1.0;
        pa[a[i]] += 1.0;
        pb[b[i]] += 1.0;
    }
    double mi = 0.0;
    for (int i = 0; i < ka; ++i)
        for (int j = 0; j < kb; ++j) {
            double pij = joint[i * kb + j];
            if (pij > 0.0) mi += (pij / n) * std::log(pij * n / (pa[i] * pb[j]));
        }
    return std::max(0.0, mi);
}

double chi2_stat(const std::vector<int>& bins, const std::vector<int>& y, int k_classes) {
    const double n = static_cast<double>(bins.size());
    std::vector<double> obs(kBins * k_classes, 0.0), row(kBins, 0.0), col(k_classes, 0.0);
    for (size_t i = 0; i < bins.size(); ++i) {
        obs[bins[i] * k_classes + y[i]] += 1.0;
        row[bins[i]] += 1.0;
        col[y[i]] += 1.0;
    }
    double chi2 = 0.0;
    for (int b = 0; b < kBins; ++b)
        for (int c = 0; c < k_classes; ++c) {
            double expected = row[b] * col[c] / n;
            if (expected > 0.0) {
                double d = obs[b * k_classes + c] - expected;
                chi2 += d * d / expected;
            }
        }
    return chi2;
}

double anova_f_stat(const Eigen::VectorXd& col, const std::vector<int>& y, int k_classes) {
    std::vector<double> sum(k_classes, 0.0);
    std::vector<int> count(k_classes, 0);
    for (Eigen::Index i = 0; i < col.size(); ++i) {
        sum[y[i]] += col(i);
        ++count[y[i]];
    }
    const double grand = col.mean();
    double ssb = 0.0, ssw = 0.0;
    for (Eigen::Index i = 0; i < col.size(); ++i) {
        double gm = sum[y[i]] / count[y[i]];
        ssw += (col(i) - gm) * (col(i) - gm);
    }
    int k_used = 0;
    for (int c = 0; c < k_classes; ++c) {
        if (count[c] == 0) continue;
        ++k_used;
        double gm = sum[c] / count[c];
        ssb += count[c] * (gm - grand) * (gm - grand);
    }
    const double df_b = k_used - 1;
    const double df_w = static_cast<double>(col.size()) - k_used;
    if (df_b <= 0 || df_w <= 0) return 0.0;
    if (ssw <= 1e-300) return ssb > 1e-12 ? 1e12 : 0.0;
    return (ssb / df_b) / (ssw / df_w);
}

double variance_ratio_stat(const Eigen::VectorXd& col, const std::vector<int>& y, int k_classes) {
    const double total_var = (col.array() - col.mean()).square().mean();
    if (total_var < 1e-15) return 0.0;
    std::vector<double> sum(k_classes, 0.0);
    std::vector<int> count(k_classes, 0);
    for (Eigen::Index i = 0; i < col.size(); ++i) {
        sum[y[i]] += col(i);
        ++count[y[i]];
    }
    double between = 0.0;
    const double grand = col.mean();
    for (int c = 0; c < k_classes; ++c) {
        if (count[c] == 0) continue;
        double gm = sum[c] / count[c];
        between += count[c] * (gm - grand) * (gm - grand);
    }
    between /= static_cast<double>(col.size());
    return between / total_var;
}

std::vector<double> relieff_scores(const Eigen::MatrixXd& x, const std::vector<int>& y,
                                   int k_classes) {
    const int n = static_cast<int>(x.rows());
    const int d = static_cast<int>(x.cols());
    // min-max normalize columns for the distance metric
    Eigen::MatrixXd z = x;
    Eigen::VectorXd span(d);
    for (int j = 0; j < d; ++j) {
        double lo = x.col(j).minCoeff(), hi = x.col(j).maxCoeff();
        span(j) = hi - lo;
        if (span(j) < 1e-15) {
            z.col(j).setZero();
            span(j) = 1.0;
        } else {
            z.col(j) = (x.col(j).array() - lo) / span(j);
        }
    }
    std::vector<double> prior(k_classes, 0.0);
    for (int c : y) prior[c] += 1.0 / n;

    const int k_neighbors = 10;
    std::vector<double> w(d, 0.0);
    std::vector<std::pair<double, int>> dists(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            dists[j] = {i == j ? std::numeric_limits<double>::infinity()
                               : (z.row(i) - z.row(j)).cwiseAbs().sum(),
                        j};
        std::sort(dists.begin(), dists.end());
        std::vector<std::vector<int>> nearest(k_classes);
        for (const auto& [dist, j] : dists) {
            if (!std::isfinite(dist)) break;
            if (static_cast<int>(nearest[y[j]].size()) < k_neighbors) nearest[y[j]].push_back(j);
        }
        for (int c = 0; c < k_classes; ++c) {
            if (nearest[c].empty()) continue;
            double weight = (c == y[i]) ? -1.0 : prior[c] / (1.0 - prior[y[i]]);
            for (int j : nearest[c])
                for (int f = 0; f < d; ++f)
                    w[f] += weight * std::fabs(z(i, f) - z(j, f)) /
                            (static_cast<double>(n) * nearest[c].size());
        }
    }
    return w;
}

std::vector<double> mrmr_scores(const Eigen::MatrixXd& x, const std::vector<int>& y,
                                int k_classes) {
    const int d = static_cast<int>(x.cols());
    std::vector<std::vector<int>> bins(d);
    for (int j = 0; j < d; ++j) bins[j] = discretize(x.col(j));

    std::vector<double> relevance(d);
    for (int j = 0; j < d; ++j) relevance[j] = mutual_info_binned(bins[j], kBins, y, k_classes);

    // greedy MID: maximize relevance - mean MI with already-selected
    std::vector<bool> picked(d, false);
    std::vector<double> redundancy_sum(d, 0.0);
    std::vector<double> scores(d, 0.0);
    for (int step = 0; step < d; ++step) {
        int best = -1;
        double best_score = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < d; ++j) {
            if (picked[j]) continue;
            double s = relevance[j] - (step > 0 ? redundancy_sum[j] / step : 0.0);
            if (s > best_score) {
                best_score = s;
                best = j;
            }
        }
        picked[best] = true;
        scores[best] = static_cast<double>(d - step); // earlier pick = higher score
        for (int j = 0; j < d; ++j)
            if (!picked[j])
                redundancy_sum[j] += mutual_info_binned(bins[j], kBins, bins[best], kBins);
    }
    return scores;
}

std::vector<int> ranks_from_scores(const std::vector<double>& scores) {
    const int d = static_cast<int>(scores.size());
    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores[a] > scores[b]; });
    std::vector<int> ranks(d);
    for (int r = 0; r < d; ++r) ranks[order[r]] = r + 1;
    return ranks;
}

std::string fmt(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

} // namespace

SelectorScore score_features(SelectorMethod method, const Eigen::MatrixXd& x,
                             const std::vector<int>& y) {
    if (x.rows() != static_cast<Eigen::Index>(y.size()))
        throw Error("score_features: row/label count mismatch");
    const int k_classes = count_classes(y);
    if (k_classes < 2) throw Error("score_features: need >= 2 classes");
    const int d = static_cast<int>(x.cols());

    SelectorScore out;
    out.method = method;
    out.scores.resize(d, 0.0);

    switch (method) {
        case SelectorMethod::FScore:
            for (int j = 0; j < d; ++j) out.scores[j] = anova_f_stat(x.col(j), y, k_classes);
            break;
        case SelectorMethod::VarianceRatio:
            for (int j = 0; j < d; ++j) out.scores[j] = variance_ratio_stat(x.col(j), y, k_classes);
            break;
        case SelectorMethod::MutualInfo:
            for (int j = 0; j < d; ++j)
                out.scores[j] = mutual_info_binned(discretize(x.col(j)), kBins, y, k_classes);
            break;
        case SelectorMethod::Chi2:
            for (int j = 0; j < d; ++j) out.scores[j] = chi2_stat(discretize(x.col(j)), y, k_classes);
            break;
        case SelectorMethod::ReliefF:
            out.scores = relieff_scores(x, y, k_classes);
            break;
        case SelectorMethod::Mrmr:
            out.scores = mrmr_scores(x, y, k_classes);
            break;
    }
    // constant features carry no information under any method
    for (int j = 0; j < d; ++j)
        if (x.col(j).maxCoeff() - x.col(j).minCoeff() < 1e-15) out.scores[j] = 0.0;
    out.ranks = ranks_from_scores(out.scores);
    return out;
}

SelectionReport stability_run(const Eigen::MatrixXd& x, const std::vector<int>& y,
                              const std::vector<std::string>& feature_names,
                              const StabilityOptions& opts) {
    const int d = static_cast<int>(x.cols());
    const int n = static_cast<int>(x.rows());
    const int n_methods = static_cast<int>(opts.methods.size());
    const int m_min = opts.m_min > 0 ? opts.m_min : (n_methods + 1) / 2;
    const int n_fold_runs = opts.k_folds * opts.runs;
    const int cap = static_cast<int>(std::ceil(opts.top_fraction * d));

    SelectionReport report;
    report.feature_names = feature_names;
    report.cap = cap;
    report.bts_per_method.assign(d, std::vector<double>(n_methods, 0.0));
    report.bts.assign(d, 0.0);
    report.jaccard_per_method.assign(n_methods, 0.0);
    report.mean_rank.assign(d, 0.0);

    // top-10% sets per (method, fold-run) for the Jaccard Index
    std::vector<std::vector<std::set<int>>> top_sets(
        n_methods, std::vector<std::set<int>>(n_fold_runs));

    int fold_run = 0;
    for (int run = 0; run < opts.runs; ++run) {
        std::mt19937_64 rng(derive_seed(opts.seed, run));
        auto folds = stratified_kfold(y, opts.k_folds, rng);
        for (int fold = 0; fold < opts.k_folds; ++fold, ++fold_run) {
            std::vector<int> train_rows;
            for (int i = 0; i < n; ++i)
                if (folds[i] != fold) train_rows.push_back(i);
            Eigen::MatrixXd xt(train_rows.size(), d);
            std::vector<int> yt(train_rows.size());
            for (size_t i = 0; i < train_rows.size(); ++i) {
                xt.row(i) = x.row(train_rows[i]);
                yt[i] = y[train_rows[i]];
            }
            for (int m = 0; m < n_methods; ++m) {
                auto score = score_features(opts.methods[m], xt, yt);
                for (double t : opts.threshold_grid) {
                    int top = std::max(1, static_cast<int>(std::ceil(t * d)));
                    for (int j = 0; j < d; ++j)
                        if (score.ranks[j] <= top)
                            report.bts_per_method[j][m] +=
                                1.0 / (n_fold_runs * opts.threshold_grid.size());
                }
                for (int j = 0; j < d; ++j) {
                    if (score.ranks[j] <= cap) top_sets[m][fold_run].insert(j);
                    report.mean_rank[j] += static_cast<double>(score.ranks[j]) /
                                           (n_fold_runs * n_methods);
                }
            }
        }
    }

    for (int m = 0; m < n_methods; ++m) {
        double sum = 0.0;
        int pairs = 0;
        for (int i = 0; i < n_fold_runs; ++i)
            for (int j = i + 1; j < n_fold_runs; ++j) {
                std::vector<int> inter;
                std::set_intersection(top_sets[m][i].begin(), top_sets[m][i].end(),
                                      top_sets[m][j].begin(), top_sets[m][j].end(),
                                      std::back_inserter(inter));
                size_t uni = top_sets[m][i].size() + top_sets[m][j].size() - inter.size();
                sum += uni == 0 ? 1.0 : static_cast<double>(inter.size()) / uni;
                ++pairs;
            }
        report.jaccard_per_method[m] = pairs > 0 ? sum / pairs : 1.0;
    }

    for (int j = 0; j < d; ++j)
        report.bts[j] = std::accumulate(report.bts_per_method[j].begin(),
                                        report.bts_per_method[j].end(), 0.0) / n_methods;

    std::vector<int> candidates;
    for (int j = 0; j < d; ++j) {
        int methods_passing = 0;
        for (int m = 0; m < n_methods; ++m)
            if (report.bts_per_method[j][m] >= opts.bts_min) ++methods_passing;
        if (methods_passing >= m_min) candidates.push_back(j);
    }

    // prune near-duplicates, keeping the higher-BTS member
    std::sort(candidates.begin(), candidates.end(),
              [&](int a, int b) { return report.bts[a] > report.bts[b]; });
    std::vector<int> kept;
    for (int j : candidates) {
        bool redundant = false;
        for (int k : kept) {
            Eigen::VectorXd cj = x.col(j).array() - x.col(j).mean();
            Eigen::VectorXd ck = x.col(k).array() - x.col(k).mean();
            double denom = cj.norm() * ck.norm();
            double r = denom > 1e-15 ? cj.dot(ck) / denom : 0.0;
            if (std::fabs(r) > opts.redundancy_r) {
                redundant = true;
                break;
            }
        }
        if (redundant)
            report.pruned_redundant.push_back(feature_names[j]);
        else
            kept.push_back(j);
    }

    std::sort(kept.begin(), kept.end(),
              [&](int a, int b) { return report.mean_rank[a] < report.mean_rank[b]; });
    if (static_cast<int>(kept.size()) > cap) kept.resize(cap);
    std::sort(kept.begin(), kept.end());
    for (int j : kept) report.final_set.push_back(feature_names[j]);
    return report;
}

std::vector<SelectedFeatureInfo> explain_selection(const SelectionReport& report,
                                                   const FeatureTable& table) {
    std::vector<SelectedFeatureInfo> out;
    for (const auto& name : report.final_set) {
        auto it = std::find(table.names.begin(), table.names.end(), name);
        if (it == table.names.end()) continue;
        size_t col = static_cast<size_t>(it - table.names.begin());
        SelectedFeatureInfo info;
        info.name = name;
        std::array<double, 3> sum{0, 0, 0};
        std::array<int, 3> count{0, 0, 0};
        for (const auto& row : table.rows) {
            int g = static_cast<int>(row.risk_label);
            sum[g] += row.features[col];
            ++count[g];
        }
        info.mean_low = count[0] ? sum[0] / count[0] : 0.0;
        info.mean_medium = count[1] ? sum[1] / count[1] : 0.0;
        info.mean_high = count[2] ? sum[2] / count[2] : 0.0;
        info.direction = direction_order(info.mean_low, info.mean_medium, info.mean_high);
        auto name_it = std::find(report.feature_names.begin(), report.feature_names.end(), name);
        if (name_it != report.feature_names.end())
            info.bts = report.bts[name_it - report.feature_names.begin()];
        out.push_back(std::move(info));
    }
    return out;
}

Eigen::MatrixXd feature_matrix(const FeatureTable& table) {
    Eigen::MatrixXd x(table.rows.size(), table.n_features());
    for (size_t i = 0; i < table.rows.size(); ++i)
        for (size_t j = 0; j < table.n_features(); ++j) x(i, j) = table.rows[i].features[j];
    return x;
}

std::vector<int> feature_labels(const FeatureTable& table) {
    std::vector<int> y(table.rows.size());
    for (size_t i = 0; i < table.rows.size(); ++i)
        y[i] = static_cast<int>(table.rows[i].risk_label);
    return y;
}

void SelectionReport::write_json(const std::string& path) const {
    nlohmann::json j;
    j["cap"] = cap;
    j["final_set"] = final_set;
    j["pruned_redundant"] = pruned_redundant;
    nlohmann::json ji = nlohmann::json::object();
    for (size_t m = 0; m < jaccard_per_method.size() && m < kDefaultSelectorMethods.size(); ++m)
        ji[to_string(kDefaultSelectorMethods[m])] = jaccard_per_method[m];
    j["jaccard_index"] = std::move(ji);
    nlohmann::json bts_obj = nlohmann::json::object();
    for (size_t f = 0; f < feature_names.size(); ++f) bts_obj[feature_names[f]] = bts[f];
    j["bts"] = std::move(bts_obj);
    std::ofstream out(path);
    if (!out) throw Error("cannot write selection report json: " + path);
    out << j.dump(2) << "\n";
}

void SelectionReport::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write selection report csv: " + path);
    out << "feature,bts,mean_rank,in_final_set\n";
    std::set<std::string> fin(final_set.begin(), final_set.end());
    for (size_t f = 0; f < feature_names.size(); ++f) {
        out << feature_names[f] << "," << fmt(bts[f]) << "," << fmt(mean_rank[f]) << ","
            << (fin.count(feature_names[f]) ? 1 : 0) << "\n";
    }
}

} // namespace facesig
