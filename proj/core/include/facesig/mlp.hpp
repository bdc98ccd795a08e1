#ifndef FACESIG_MLP_HPP
#define FACESIG_MLP_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace facesig {

struct MlpParams {
    int hidden_units = 16;
    int n_classes = 3;
    double learning_rate = 1e-2;
    int batch_size = 32;
    int max_epochs = 400;
    // early stop: relative training-loss improvement below plateau_tol
    // for patience consecutive epochs
    double plateau_tol = 1e-4;
    int patience = 15;
    std::uint64_t seed = 1;
};

/// One-hidden-layer perceptron: ReLU hidden activation, softmax
/// output, cross-entropy loss, mini-batch gradient descent with
/// adaptive-moment (Adam) updates. Deterministic given the seed.
class Mlp {
public:
    void fit(const Eigen::MatrixXd& x, const std::vector<int>& y, const MlpParams& params);

    int predict(const Eigen::VectorXd& x) const;
    std::vector<int> predict(const Eigen::MatrixXd& x) const;

    /// Mean cross-entropy over a batch; fills parameter gradients when
    /// the pointers are non-null. Public so tests can check analytic
    /// gradients against finite differences.
    double loss_and_grad(const Eigen::MatrixXd& x, const std::vector<int>& y,
                         Eigen::MatrixXd* g_w1, Eigen::VectorXd* g_b1,
                         Eigen::MatrixXd* g_w2, Eigen::VectorXd* g_b2) const;

    void init_weights(int n_features, const MlpParams& params);

    Eigen::MatrixXd w1; // hidden x features
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2; // classes x hidden
    Eigen::VectorXd b2;

private:
    MlpParams params_;
};

} // namespace facesig

#endif
