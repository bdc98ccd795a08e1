#include "facesig/classify.hpp"
#include "facesig/errors.hpp"
#include "facesig/splits.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace facesig {

const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::Mlp1Hidden: return "mlp";
        case ModelKind::SvmLinear: return "svm-linear";
        case ModelKind::SvmRbf: return "svm-rbf";
    }
    return "?";
}

const char* to_string(SamplingMode m) {
    switch (m) {
        case SamplingMode::None: return "none";
        case SamplingMode::Oversample: return "over";
        case SamplingMode::Undersample: return "under";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "mlp") return ModelKind::Mlp1Hidden;
    if (s == "svm-linear") return ModelKind::SvmLinear;
    if (s == "svm-rbf") return ModelKind::SvmRbf;
    throw ConfigError("unknown model kind: " + s);
}

SamplingMode sampling_mode_from_string(const std::string& s) {
    if (s == "none") return SamplingMode::None;
    if (s == "over") return SamplingMode::Oversample;
    if (s == "under") return SamplingMode::Undersample;
    throw ConfigError("unknown sampling mode: " + s);
}

Dataset Dataset::subset(const std::vector<int>& rows) const {
    Dataset out;
    out.x.resize(rows.size(), x.cols());
    out.y.resize(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        out.x.row(i) = x.row(rows[i]);
        out.y[i] = y[rows[i]];
    }
    return out;
}

Dataset dataset_from_table(const FeatureTable& table) {
    Dataset d;
    d.x.resize(table.rows.size(), table.n_features());
    d.y.resize(table.rows.size());
    for (size_t i = 0; i < table.rows.size(); ++i) {
        for (size_t j = 0; j < table.n_features(); ++j) d.x(i, j) = table.rows[i].features[j];
        d.y[i] = static_cast<int>(table.rows[i].risk_label);
    }
    return d;
}

Dataset restrict_features(const Dataset& data, const std::vector<std::string>& all_names,
                          const std::vector<std::string>& keep) {
    std::vector<int> cols;
    for (const auto& name : keep) {
        auto it = std::find(all_names.begin(), all_names.end(), name);
        if (it == all_names.end()) throw Error("unknown feature in selection: " + name);
        cols.push_back(static_cast<int>(it - all_names.begin()));
    }
    Dataset out;
    out.y = data.y;
    out.x.resize(data.x.rows(), cols.size());
    for (size_t j = 0; j < cols.size(); ++j) out.x.col(j) = data.x.col(cols[j]);
    return out;
}

Dataset resample(const Dataset& train, SamplingMode mode, std::uint64_t seed) {
    if (mode == SamplingMode::None) return train;
    std::map<int, std::vector<int>> by_class;
    for (size_t i = 0; i < train.y.size(); ++i)
        by_class[train.y[i]].push_back(static_cast<int>(i));
    size_t target = mode == SamplingMode::Oversample ? 0 : SIZE_MAX;
    for (const auto& [cls, idx] : by_class)
        target = mode == SamplingMode::Oversample ? std::max(target, idx.size())
                                                  : std::min(target, idx.size());
    std::mt19937_64 rng(seed);
    std::vector<int> rows;
    for (auto& [cls, idx] : by_class) {
        if (mode == SamplingMode::Undersample) {
            std::shuffle(idx.begin(), idx.end(), rng);
            rows.insert(rows.end(), idx.begin(), idx.begin() + target);
        } else {
            rows.insert(rows.end(), idx.begin(), idx.end());
            std::uniform_int_distribution<size_t> pick(0, idx.size() - 1);
            for (size_t i = idx.size(); i < target; ++i) rows.push_back(idx[pick(rng)]);
        }
    }
    std::sort(rows.begin(), rows.end());
    return train.subset(rows);
}

void MinMaxScaler::fit(const Eigen::MatrixXd& train) {
    lo = train.colwise().minCoeff();
    Eigen::VectorXd hi = train.colwise().maxCoeff();
    span = hi - lo;
    for (int j = 0; j < span.size(); ++j)
        if (span(j) < 1e-15) span(j) = 0.0;
}

Eigen::MatrixXd MinMaxScaler::transform(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (int j = 0; j < x.cols(); ++j) {
        if (span(j) == 0.0)
            out.col(j).setConstant(0.5);
        else
            out.col(j) = (x.col(j).array() - lo(j)) / span(j);
    }
    return out;
}

std::vector<int> mlp_hidden_grid(int n_features) {
    const int offset = n_features / 10 + 1;
    const int lo = offset, hi = n_features + offset;
    std::vector<int> grid(10);
    for (int i = 0; i < 10; ++i)
        grid[i] = static_cast<int>(std::lround(lo + (hi - lo) * i / 9.0));
    return grid;
}

std::vector<double> rbf_gamma_grid(const Eigen::MatrixXd& train) {
    double var = 0.0;
    for (int j = 0; j < train.cols(); ++j) {
        double mean = train.col(j).mean();
        var += (train.col(j).array() - mean).square().mean();
    }
    var /= static_cast<double>(train.cols());
    double base = 1.0 / (static_cast<double>(train.cols()) * std::max(var, 1e-12));
    return {0.1 * base, base, 10.0 * base};
}

double balanced_accuracy(const Confusion& confusion) {
    const int k = static_cast<int>(confusion.size());
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        int total = std::accumulate(confusion[i].begin(), confusion[i].end(), 0);
        if (total == 0) throw EmptyTrueClass("confusion row with no samples");
        sum += static_cast<double>(confusion[i][i]) / total;
    }
    return sum / k;
}

double mcc_multiclass(const Confusion& confusion) {
    const int k = static_cast<int>(confusion.size());
    double s = 0.0, c = 0.0;
    std::vector<double> t(k, 0.0), p(k, 0.0);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            double v = confusion[i][j];
            s += v;
            t[i] += v;
            p[j] += v;
            if (i == j) c += v;
        }
    double sum_tp = 0.0, sum_t2 = 0.0, sum_p2 = 0.0;
    for (int i = 0; i < k; ++i) {
        sum_tp += t[i] * p[i];
        sum_t2 += t[i] * t[i];
        sum_p2 += p[i] * p[i];
    }
    double denom = std::sqrt((s * s - sum_p2) * (s * s - sum_t2));
    if (denom <= 0.0) return 0.0;
    return (c * s - sum_tp) / denom;
}

namespace {

int count_classes(const std::vector<int>& y) {
    return 1 + *std::max_element(y.begin(), y.end());
}

std::vector<int> fit_predict(const Dataset& train, const Eigen::MatrixXd& x_test,
                             const ModelSpec& spec, const ChosenHyper& hyper,
                             std::uint64_t seed, double* kkt_out) {
    if (spec.kind == ModelKind::Mlp1Hidden) {
        MlpParams p;
        p.hidden_units = hyper.hidden_units;
        p.n_classes = count_classes(train.y);
        p.seed = seed;
        Mlp mlp;
        mlp.fit(train.x, train.y, p);
        return mlp.predict(x_test);
    }
    SvmParams p;
    p.kernel = spec.kind == ModelKind::SvmLinear ? KernelKind::Linear : KernelKind::Rbf;
    p.C = hyper.C;
    p.gamma = hyper.gamma;
    p.tol = spec.svm_tol;
    p.seed = seed;
    MulticlassSvm svm;
    svm.fit(train.x, train.y, p);
    if (kkt_out) *kkt_out = svm.kkt_violation();
    return svm.predict(x_test);
}

Confusion make_confusion(const std::vector<int>& truth, const std::vector<int>& pred,
                         int n_classes) {
    Confusion c(n_classes, std::vector<int>(n_classes, 0));
    for (size_t i = 0; i < truth.size(); ++i) ++c[truth[i]][pred[i]];
    return c;
}

double cv_balanced_accuracy(const Dataset& train, const ModelSpec& spec,
                            const ChosenHyper& hyper, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto folds = stratified_kfold(train.y, spec.cv_folds, rng);
    const int n_classes = count_classes(train.y);
    double sum = 0.0;
    int used = 0;
    for (int fold = 0; fold < spec.cv_folds; ++fold) {
        std::vector<int> tr, te;
        for (int i = 0; i < train.n(); ++i)
            (folds[i] == fold ? te : tr).push_back(i);
        if (te.empty()) continue;
        Dataset dtr = train.subset(tr), dte = train.subset(te);
        std::set<int> fold_classes(dte.y.begin(), dte.y.end());
        if (static_cast<int>(fold_classes.size()) < n_classes) continue;
        auto pred = fit_predict(dtr, dte.x, spec, hyper, derive_seed(seed, fold), nullptr);
        sum += balanced_accuracy(make_confusion(dte.y, pred, n_classes));
        ++used;
    }
    return used > 0 ? sum / used : 0.0;
}

} // namespace

ChosenHyper grid_search(const Dataset& train, const ModelSpec& spec, std::uint64_t seed) {
    ChosenHyper best;
    best.cv_score = -1.0;

    if (spec.kind == ModelKind::Mlp1Hidden) {
        // candidates visited in increasing size; strict improvement only,
        // so ties keep the smaller model
        for (int h : mlp_hidden_grid(static_cast<int>(train.x.cols()))) {
            ChosenHyper cand;
            cand.hidden_units = h;
            cand.cv_score = cv_balanced_accuracy(train, spec, cand, seed);
            if (cand.cv_score > best.cv_score) best = cand;
        }
        return best;
    }

    std::vector<double> gammas = spec.kind == ModelKind::SvmRbf
                                     ? rbf_gamma_grid(train.x)
                                     : std::vector<double>{0.0};

    for (double gamma : gammas) {
        // coarse pass over (0, 1], optionally extended above 1
        std::vector<double> coarse;
        for (int i = 1; i <= 10; ++i) coarse.push_back(0.1 * i);
        if (spec.extend_c_grid) {
            coarse.push_back(10.0);
            coarse.push_back(100.0);
        }
        ChosenHyper coarse_best;
        coarse_best.cv_score = -1.0;
        for (double c : coarse) {
            ChosenHyper cand;
            cand.C = c;
            cand.gamma = gamma;
            cand.cv_score = cv_balanced_accuracy(train, spec, cand, seed);
            if (cand.cv_score > coarse_best.cv_score) coarse_best = cand;
        }
        // narrow to 0.01 resolution around the coarse winner
        if (coarse_best.C <= 1.0) {
            double center = coarse_best.C;
            for (int i = -9; i <= 9; ++i) {
                double c = center + 0.01 * i;
                if (c <= 0.0 || c > 1.0 || i == 0) continue;
                ChosenHyper cand;
                cand.C = c;
                cand.gamma = gamma;
                cand.cv_score = cv_balanced_accuracy(train, spec, cand, seed);
                if (cand.cv_score > coarse_best.cv_score) coarse_best = cand;
            }
        }
        if (coarse_best.cv_score > best.cv_score) best = coarse_best;
    }
    return best;
}

TrialResult run_trial(const Dataset& data, const ModelSpec& spec, int trial_index,
                      std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto [train_rows, test_rows] = stratified_split(data.y, 0.25, rng);
    Dataset train = data.subset(train_rows);
    Dataset test = data.subset(test_rows);

    train = resample(train, spec.sampling, derive_seed(seed, 1));

    MinMaxScaler scaler;
    scaler.fit(train.x);
    train.x = scaler.transform(train.x);
    test.x = scaler.transform(test.x);

    TrialResult result;
    result.trial_index = trial_index;
    result.chosen_hyper = grid_search(train, spec, derive_seed(seed, 2));
    auto pred = fit_predict(train, test.x, spec, result.chosen_hyper, derive_seed(seed, 3),
                            &result.kkt_violation);
    result.confusion = make_confusion(test.y, pred, count_classes(data.y));
    result.balanced_accuracy = balanced_accuracy(result.confusion);
    result.mcc = mcc_multiclass(result.confusion);
    return result;
}

void ExperimentResult::recompute_aggregates() {
    const double n = static_cast<double>(trials.size());
    avg_accuracy = 0.0;
    avg_mcc = 0.0;
    for (const auto& t : trials) {
        avg_accuracy += t.balanced_accuracy / n;
        avg_mcc += t.mcc / n;
    }
    double ss = 0.0;
    for (const auto& t : trials)
        ss += (t.balanced_accuracy - avg_accuracy) * (t.balanced_accuracy - avg_accuracy);
    std_accuracy = trials.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
}

ExperimentResult run_experiment(const Dataset& data, const ModelSpec& spec, int n_trials,
                                std::uint64_t master_seed) {
    ExperimentResult result;
    result.spec = spec;
    for (int t = 0; t < n_trials; ++t)
        result.trials.push_back(run_trial(data, spec, t, derive_seed(master_seed, t)));
    result.recompute_aggregates();
    return result;
}

ControlResults randomization_controls(const Dataset& data, const ModelSpec& spec, int n_trials,
                                      std::uint64_t master_seed) {
    ControlResults out;
    out.shuffled_labels.spec = spec;
    out.shuffled_features.spec = spec;
    for (int t = 0; t < n_trials; ++t) {
        std::uint64_t trial_seed = derive_seed(master_seed, t);

        Dataset shuffled_y = data;
        {
            std::mt19937_64 rng(derive_seed(trial_seed, 101));
            std::shuffle(shuffled_y.y.begin(), shuffled_y.y.end(), rng);
        }
        out.shuffled_labels.trials.push_back(run_trial(shuffled_y, spec, t, trial_seed));

        Dataset shuffled_x = data;
        {
            std::mt19937_64 rng(derive_seed(trial_seed, 202));
            std::vector<int> perm(shuffled_x.n());
            for (int j = 0; j < shuffled_x.x.cols(); ++j) {
                std::iota(perm.begin(), perm.end(), 0);
                std::shuffle(perm.begin(), perm.end(), rng);
                Eigen::VectorXd col = shuffled_x.x.col(j);
                for (int i = 0; i < shuffled_x.n(); ++i) shuffled_x.x(i, j) = col(perm[i]);
            }
        }
        out.shuffled_features.trials.push_back(run_trial(shuffled_x, spec, t, trial_seed));
    }
    out.shuffled_labels.recompute_aggregates();
    out.shuffled_features.recompute_aggregates();
    return out;
}

namespace {
std::string fmt(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}
} // namespace

void ExperimentResult::write_json(const std::string& path) const {
    nlohmann::json j;
    j["model"] = to_string(spec.kind);
    j["sampling"] = to_string(spec.sampling);
    j["avg_accuracy"] = avg_accuracy;
    j["std_accuracy"] = std_accuracy;
    j["avg_mcc"] = avg_mcc;
    nlohmann::json trials_json = nlohmann::json::array();
    for (const auto& t : trials) {
        nlohmann::json tj;
        tj["trial_index"] = t.trial_index;
        tj["balanced_accuracy"] = t.balanced_accuracy;
        tj["mcc"] = t.mcc;
        tj["confusion"] = t.confusion;
        tj["kkt_violation"] = t.kkt_violation;
        nlohmann::json hj;
        hj["hidden_units"] = t.chosen_hyper.hidden_units;
        hj["C"] = t.chosen_hyper.C;
        hj["gamma"] = t.chosen_hyper.gamma;
        hj["cv_score"] = t.chosen_hyper.cv_score;
        tj["chosen_hyper"] = std::move(hj);
        trials_json.push_back(std::move(tj));
    }
    j["trials"] = std::move(trials_json);
    std::ofstream out(path);
    if (!out) throw Error("cannot write experiment json: " + path);
    out << j.dump(2) << "\n";
}

void write_results_csv(const std::vector<std::pair<std::string, const ExperimentResult*>>& results,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write results csv: " + path);
    out << "metric";
    for (const auto& [name, r] : results) out << "," << name;
    out << "\nsampling method";
    for (const auto& [name, r] : results) out << "," << to_string(r->spec.sampling);
    out << "\nmodel";
    for (const auto& [name, r] : results) out << "," << to_string(r->spec.kind);
    out << "\navg accuracy";
    for (const auto& [name, r] : results) out << "," << fmt(r->avg_accuracy);
    out << "\nstd. accuracy";
    for (const auto& [name, r] : results) out << "," << fmt(r->std_accuracy);
    out << "\navg MCC";
    for (const auto& [name, r] : results) out << "," << fmt(r->avg_mcc);
    out << "\n";
}

} // namespace facesig
