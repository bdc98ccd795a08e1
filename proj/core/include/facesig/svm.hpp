#ifndef FACESIG_SVM_HPP
#define FACESIG_SVM_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace facesig {

enum class KernelKind { Linear, Rbf };

struct SvmParams {
    KernelKind kernel = KernelKind::Linear;
    double C = 1.0;
    double gamma = 1.0; // rbf only: k(x,z) = exp(-gamma ||x-z||^2)
    double tol = 1e-3;
    int max_passes = 10;
    int max_iters = 200000;
    std::uint64_t seed = 1;
};

/// Soft-margin binary SVM trained by sequential minimal optimization.
/// Labels are +1/-1.
class BinarySvm {
public:
    void fit(const Eigen::MatrixXd& x, const std::vector<int>& y, const SvmParams& params);

    double decision(const Eigen::VectorXd& x) const;

    /// Largest KKT violation over the training set; <= tol after fit.
    double kkt_violation() const;
    /// Dual objective at the current alphas.
    double dual_objective() const;

    const Eigen::VectorXd& alphas() const { return alpha_; }
    double bias() const { return b_; }

private:
    double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

    SvmParams params_;
    Eigen::MatrixXd x_;
    Eigen::VectorXd y_;
    Eigen::VectorXd alpha_;
    Eigen::MatrixXd k_; // cached kernel matrix
    double b_ = 0.0;
};

/// One-vs-one multiclass wrapper: majority vote, ties broken by summed
/// signed decision values, then by class index. Throws SingleClassTrain
/// when the training set holds one class.
class MulticlassSvm {
public:
    void fit(const Eigen::MatrixXd& x, const std::vector<int>& y, const SvmParams& params);
    int predict(const Eigen::VectorXd& x) const;
    std::vector<int> predict(const Eigen::MatrixXd& x) const;

    /// Max KKT violation across all pairwise machines.
    double kkt_violation() const;

private:
    struct Pair {
        int class_a = 0;
        int class_b = 0;
        BinarySvm svm;
    };
    std::vector<Pair> pairs_;
    int n_classes_ = 0;
};

} // namespace facesig

#endif
