#include "facesig/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace facesig {

void Mlp::init_weights(int n_features, const MlpParams& params) {
    params_ = params;
    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    const double s1 = std::sqrt(2.0 / n_features);
    const double s2 = std::sqrt(2.0 / params.hidden_units);
    w1.resize(params.hidden_units, n_features);
    w2.resize(params.n_classes, params.hidden_units);
    for (int i = 0; i < w1.rows(); ++i)
        for (int j = 0; j < w1.cols(); ++j) w1(i, j) = s1 * dist(rng);
    for (int i = 0; i < w2.rows(); ++i)
        for (int j = 0; j < w2.cols(); ++j) w2(i, j) = s2 * dist(rng);
    b1 = Eigen::VectorXd::Zero(params.hidden_units);
    b2 = Eigen::VectorXd::Zero(params.n_classes);
}

double Mlp::loss_and_grad(const Eigen::MatrixXd& x, const std::vector<int>& y,
                          Eigen::MatrixXd* g_w1, Eigen::VectorXd* g_b1,
                          Eigen::MatrixXd* g_w2, Eigen::VectorXd* g_b2) const {
    const int n = static_cast<int>(x.rows());
    // forward
    Eigen::MatrixXd z1 = (w1 * x.transpose()).colwise() + b1; // hidden x n
    Eigen::MatrixXd h = z1.cwiseMax(0.0);
    Eigen::MatrixXd z2 = (w2 * h).colwise() + b2; // classes x n

    Eigen::MatrixXd p = z2;
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
        double m = p.col(i).maxCoeff();
        p.col(i) = (p.col(i).array() - m).exp();
        double sum = p.col(i).sum();
        p.col(i) /= sum;
        loss -= std::log(std::max(p(y[i], i), 1e-300));
    }
    loss /= n;

    if (g_w1) {
        Eigen::MatrixXd dz2 = p; // classes x n
        for (int i = 0; i < n; ++i) dz2(y[i], i) -= 1.0;
        dz2 /= static_cast<double>(n);
        *g_w2 = dz2 * h.transpose();
        *g_b2 = dz2.rowwise().sum();
        Eigen::MatrixXd dh = w2.transpose() * dz2;
        Eigen::MatrixXd dz1 = (z1.array() > 0.0).select(dh, 0.0);
        *g_w1 = dz1 * x;
        *g_b1 = dz1.rowwise().sum();
    }
    return loss;
}

void Mlp::fit(const Eigen::MatrixXd& x, const std::vector<int>& y, const MlpParams& params) {
    init_weights(static_cast<int>(x.cols()), params);
    const int n = static_cast<int>(x.rows());
    std::mt19937_64 rng(params.seed ^ 0x5bf0e9a1d2c3b4a5ull);

    // Adam state
    Eigen::MatrixXd m_w1 = Eigen::MatrixXd::Zero(w1.rows(), w1.cols()), v_w1 = m_w1;
    Eigen::MatrixXd m_w2 = Eigen::MatrixXd::Zero(w2.rows(), w2.cols()), v_w2 = m_w2;
    Eigen::VectorXd m_b1 = Eigen::VectorXd::Zero(b1.size()), v_b1 = m_b1;
    Eigen::VectorXd m_b2 = Eigen::VectorXd::Zero(b2.size()), v_b2 = m_b2;
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long step = 0;

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);

    double prev_loss = std::numeric_limits<double>::infinity();
    int stalled = 0;
    Eigen::MatrixXd g_w1, g_w2;
    Eigen::VectorXd g_b1, g_b2;

    for (int epoch = 0; epoch < params.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (int start = 0; start < n; start += params.batch_size) {
            int len = std::min(params.batch_size, n - start);
            Eigen::MatrixXd xb(len, x.cols());
            std::vector<int> yb(len);
            for (int i = 0; i < len; ++i) {
                xb.row(i) = x.row(order[start + i]);
                yb[i] = y[order[start + i]];
            }
            loss_and_grad(xb, yb, &g_w1, &g_b1, &g_w2, &g_b2);
            ++step;
            const double corr = params.learning_rate *
                                std::sqrt(1.0 - std::pow(beta2, step)) /
                                (1.0 - std::pow(beta1, step));
            auto adam = [&](auto& w, auto& m, auto& v, const auto& g) {
                m = beta1 * m + (1.0 - beta1) * g;
                v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
                w -= corr * (m.array() / (v.array().sqrt() + eps)).matrix();
            };
            adam(w1, m_w1, v_w1, g_w1);
            adam(b1, m_b1, v_b1, g_b1);
            adam(w2, m_w2, v_w2, g_w2);
            adam(b2, m_b2, v_b2, g_b2);
        }
        double loss = loss_and_grad(x, y, nullptr, nullptr, nullptr, nullptr);
        if (prev_loss - loss < params.plateau_tol * std::max(1.0, prev_loss)) {
            if (++stalled >= params.patience) break;
        } else {
            stalled = 0;
        }
        prev_loss = std::min(prev_loss, loss);
    }
}

int Mlp::predict(const Eigen::VectorXd& x) const {
    Eigen::VectorXd h = ((w1 * x) + b1).cwiseMax(0.0);
    Eigen::VectorXd z = (w2 * h) + b2;
    Eigen::Index best;
    z.maxCoeff(&best);
    return static_cast<int>(best);
}

std::vector<int> Mlp::predict(const Eigen::MatrixXd& x) const {
    std::vector<int> out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        out[i] = predict(Eigen::VectorXd(x.row(i).transpose()));
    return out;
}

} // namespace facesig
