#include "facesig/svm.hpp"
#include "facesig/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

namespace facesig {

double BinarySvm::kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    if (params_.kernel == KernelKind::Linear) return a.dot(b);
    return std::exp(-params_.gamma * (a - b).squaredNorm());
}

void BinarySvm::fit(const Eigen::MatrixXd& x, const std::vector<int>& y, const SvmParams& params) {
    params_ = params;
    const int n = static_cast<int>(x.rows());
    x_ = x;
    y_.resize(n);
    for (int i = 0; i < n; ++i) y_(i) = y[i];

    k_.resize(n, n);
    if (params_.kernel == KernelKind::Linear) {
        k_ = x * x.transpose();
    } else {
        Eigen::VectorXd sq = x.rowwise().squaredNorm();
        k_ = -2.0 * (x * x.transpose());
        k_.colwise() += sq;
        k_.rowwise() += sq.transpose();
        k_ = (-params_.gamma * k_.array()).exp();
    }

    alpha_ = Eigen::VectorXd::Zero(n);
    b_ = 0.0;
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n); // f_i = sum_j a_j y_j K_ij + b

    std::mt19937_64 rng(params_.seed);
    const double c = params_.C;
    const double tol = params_.tol;

    auto error = [&](int i) { return f(i) - y_(i); };

    auto take_step = [&](int i, int j) -> bool {
        if (i == j) return false;
        double ei = error(i), ej = error(j);
        double lo, hi;
        if (y_(i) != y_(j)) {
            lo = std::max(0.0, alpha_(j) - alpha_(i));
            hi = std::min(c, c + alpha_(j) - alpha_(i));
        } else {
            lo = std::max(0.0, alpha_(i) + alpha_(j) - c);
            hi = std::min(c, alpha_(i) + alpha_(j));
        }
        if (hi - lo < 1e-12) return false;
        double eta = 2.0 * k_(i, j) - k_(i, i) - k_(j, j);
        if (eta >= -1e-12) return false;
        double aj_new = alpha_(j) - y_(j) * (ei - ej) / eta;
        aj_new = std::clamp(aj_new, lo, hi);
        if (std::fabs(aj_new - alpha_(j)) < 1e-7 * (aj_new + alpha_(j) + 1e-7)) return false;
        double ai_new = alpha_(i) + y_(i) * y_(j) * (alpha_(j) - aj_new);

        double b1 = b_ - ei - y_(i) * (ai_new - alpha_(i)) * k_(i, i) -
                    y_(j) * (aj_new - alpha_(j)) * k_(i, j);
        double b2 = b_ - ej - y_(i) * (ai_new - alpha_(i)) * k_(i, j) -
                    y_(j) * (aj_new - alpha_(j)) * k_(j, j);
        double b_new;
        if (ai_new > 0.0 && ai_new < c)
            b_new = b1;
        else if (aj_new > 0.0 && aj_new < c)
            b_new = b2;
        else
            b_new = 0.5 * (b1 + b2);

        f += y_(i) * (ai_new - alpha_(i)) * k_.col(i) +
             y_(j) * (aj_new - alpha_(j)) * k_.col(j) +
             Eigen::VectorXd::Constant(f.size(), b_new - b_);
        alpha_(i) = ai_new;
        alpha_(j) = aj_new;
        b_ = b_new;
        return true;
    };

    // Recompute exact kernel sums, then place b optimally for the
    // current alphas: free points pin it, bound points only bound it.
    auto refine_bias = [&] {
        Eigen::VectorXd g = k_ * (alpha_.array() * y_.array()).matrix();
        double free_sum = 0.0;
        int free_count = 0;
        double b_lo = -std::numeric_limits<double>::infinity();
        double b_hi = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            const double r = y_(i) - g(i);
            if (alpha_(i) > 1e-9 && alpha_(i) < c - 1e-9) {
                free_sum += r;
                ++free_count;
            } else if ((alpha_(i) <= 1e-9 && y_(i) > 0) || (alpha_(i) >= c - 1e-9 && y_(i) < 0)) {
                b_lo = std::max(b_lo, r);
            } else {
                b_hi = std::min(b_hi, r);
            }
        }
        if (free_count > 0)
            b_ = free_sum / free_count;
        else if (std::isfinite(b_lo) && std::isfinite(b_hi))
            b_ = 0.5 * (b_lo + b_hi);
        f = g.array() + b_;
    };

    std::uniform_int_distribution<int> pick(0, n - 1);
    int passes = 0, iters = 0;
    for (int round = 0; round < 10; ++round) {
        passes = 0;
        while (passes < params_.max_passes && iters < params_.max_iters) {
        int changed = 0;
        for (int i = 0; i < n; ++i) {
            ++iters;
            double ri = error(i) * y_(i);
            if ((ri < -tol && alpha_(i) < c) || (ri > tol && alpha_(i) > 0.0)) {
                // second-choice heuristic: maximize |E_i - E_j|
                int best_j = -1;
                double best_gap = -1.0;
                for (int j = 0; j < n; ++j) {
                    if (j == i || alpha_(j) <= 0.0 || alpha_(j) >= c) continue;
                    double gap = std::fabs(error(i) - error(j));
                    if (gap > best_gap) {
                        best_gap = gap;
                        best_j = j;
                    }
                }
                bool stepped = best_j >= 0 && take_step(i, best_j);
                if (!stepped) {
                    int j0 = pick(rng);
                    for (int off = 0; off < n && !stepped; ++off)
                        stepped = take_step(i, (j0 + off) % n);
                }
                if (stepped) ++changed;
            }
        }
            passes = changed == 0 ? passes + 1 : 0;
        }
        refine_bias();
        if (kkt_violation() <= params_.tol || iters >= params_.max_iters) break;
    }
}

double BinarySvm::decision(const Eigen::VectorXd& x) const {
    double sum = b_;
    for (int i = 0; i < alpha_.size(); ++i)
        if (alpha_(i) > 0.0) sum += alpha_(i) * y_(i) * kernel(x_.row(i), x);
    return sum;
}

double BinarySvm::kkt_violation() const {
    const int n = static_cast<int>(alpha_.size());
    Eigen::VectorXd f = k_ * (alpha_.array() * y_.array()).matrix();
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        double margin = y_(i) * (f(i) + b_);
        double v = 0.0;
        if (alpha_(i) < 1e-9)
            v = std::max(0.0, 1.0 - margin);
        else if (alpha_(i) > params_.C - 1e-9)
            v = std::max(0.0, margin - 1.0);
        else
            v = std::fabs(margin - 1.0);
        worst = std::max(worst, v);
    }
    return worst;
}

double BinarySvm::dual_objective() const {
    Eigen::VectorXd ay = alpha_.array() * y_.array();
    return alpha_.sum() - 0.5 * ay.dot(k_ * ay);
}

void MulticlassSvm::fit(const Eigen::MatrixXd& x, const std::vector<int>& y,
                        const SvmParams& params) {
    std::set<int> classes(y.begin(), y.end());
    if (classes.size() < 2) throw SingleClassTrain("training set holds a single class");
    n_classes_ = *classes.rbegin() + 1;
    pairs_.clear();
    std::vector<int> class_list(classes.begin(), classes.end());
    for (size_t a = 0; a < class_list.size(); ++a) {
        for (size_t b = a + 1; b < class_list.size(); ++b) {
            Pair pair;
            pair.class_a = class_list[a];
            pair.class_b = class_list[b];
            std::vector<int> rows, labels;
            for (size_t i = 0; i < y.size(); ++i) {
                if (y[i] == pair.class_a) {
                    rows.push_back(static_cast<int>(i));
                    labels.push_back(+1);
                } else if (y[i] == pair.class_b) {
                    rows.push_back(static_cast<int>(i));
                    labels.push_back(-1);
                }
            }
            Eigen::MatrixXd sub(rows.size(), x.cols());
            for (size_t i = 0; i < rows.size(); ++i) sub.row(i) = x.row(rows[i]);
            SvmParams p = params;
            p.seed = params.seed + pairs_.size() + 1;
            pair.svm.fit(sub, labels, p);
            pairs_.push_back(std::move(pair));
        }
    }
}

int MulticlassSvm::predict(const Eigen::VectorXd& x) const {
    std::vector<int> votes(n_classes_, 0);
    std::vector<double> signed_sum(n_classes_, 0.0);
    for (const auto& pair : pairs_) {
        double d = pair.svm.decision(x);
        votes[d >= 0.0 ? pair.class_a : pair.class_b] += 1;
        signed_sum[pair.class_a] += d;
        signed_sum[pair.class_b] -= d;
    }
    int best = 0;
    for (int c = 1; c < n_classes_; ++c) {
        if (votes[c] > votes[best] ||
            (votes[c] == votes[best] && signed_sum[c] > signed_sum[best]))
            best = c;
    }
    return best;
}

std::vector<int> MulticlassSvm::predict(const Eigen::MatrixXd& x) const {
    std::vector<int> out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        out[i] = predict(Eigen::VectorXd(x.row(i).transpose()));
    return out;
}

double MulticlassSvm::kkt_violation() const {
    double worst = 0.0;
    for (const auto& pair : pairs_) worst = std::max(worst, pair.svm.kkt_violation());
    return worst;
}

} // namespace facesig
