#include "nextbuy/stacking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nextbuy/nn/core.hpp"

namespace nextbuy {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::vector<int> select_k_best(const std::vector<double>& test1_losses, int k) {
    if (k < 1) throw ContractError("select_k_best: k must be >= 1");
    if (k > static_cast<int>(test1_losses.size()))
        throw ContractError("select_k_best: k=" + std::to_string(k) + " exceeds pool of " +
                            std::to_string(test1_losses.size()));
    std::vector<int> idx(test1_losses.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return test1_losses[static_cast<std::size_t>(a)] <
               test1_losses[static_cast<std::size_t>(b)];
    });
    idx.resize(static_cast<std::size_t>(k));
    return idx;
}

VectorXd init_weights(const std::vector<double>& losses) {
    VectorXd w(static_cast<Eigen::Index>(losses.size()));
    double denom = 0.0;
    for (double l : losses) {
        if (!(l > 0.0)) throw ContractError("init_weights: losses must be positive");
        denom += 1.0 / l;
    }
    for (Eigen::Index j = 0; j < w.size(); ++j)
        w[j] = 1.0 / losses[static_cast<std::size_t>(j)] / denom;
    return w;
}

namespace {

VectorXd softmax(const VectorXd& z) {
    VectorXd e = (z.array() - z.maxCoeff()).exp();
    return e / e.sum();
}

double blend_bce(const MatrixXd& probs, const VectorXd& labels, const VectorXd& w) {
    return nn::bce_loss(probs * w, labels);
}

}  // namespace

StackerModel fit_stacker(const MatrixXd& probs, const VectorXd& labels,
                         const VectorXd& initial_weights, const StackerFitOptions& options) {
    const Eigen::Index n = probs.rows();
    const Eigen::Index k = probs.cols();
    if (n == 0 || k == 0) throw ContractError("fit_stacker: empty probability matrix");
    if (labels.size() != n) throw ContractError("fit_stacker: label count mismatch");
    if (initial_weights.size() != k) throw ContractError("fit_stacker: weight count mismatch");
    if (!probs.allFinite()) throw ContractError("fit_stacker: non-finite probabilities");

    StackerModel model;
    model.simplex = options.simplex;

    if (k == 1) {
        model.weights = VectorXd::Ones(1);
        model.test1_bce = blend_bce(probs, labels, model.weights);
        return model;
    }

    // Free parameters: softmax logits when constrained to the simplex, raw
    // weights otherwise.
    VectorXd z(k);
    if (options.simplex) {
        for (Eigen::Index j = 0; j < k; ++j)
            z[j] = std::log(std::max(initial_weights[j], 1e-12));
    } else {
        z = initial_weights;
    }

    auto weights_of = [&](const VectorXd& free) {
        return options.simplex ? softmax(free) : free;
    };

    const double inv_n = 1.0 / static_cast<double>(n);
    double best_bce = blend_bce(probs, labels, weights_of(z));
    VectorXd best_z = z;
    double prev = best_bce;
    int iters = 0;
    for (int it = 0; it < options.max_iterations; ++it) {
        const VectorXd w = weights_of(z);
        const VectorXd p_raw = probs * w;
        // d(BCE)/dp with the same clamping as the loss
        VectorXd dp(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p = std::clamp(p_raw[i], nn::kProbEps, 1.0 - nn::kProbEps);
            const bool clamped = p_raw[i] < nn::kProbEps || p_raw[i] > 1.0 - nn::kProbEps;
            dp[i] = clamped ? 0.0 : (p - labels[i]) / (p * (1.0 - p)) * inv_n;
        }
        VectorXd dw = probs.transpose() * dp;
        VectorXd dz;
        if (options.simplex) {
            const double inner = w.dot(dw);
            dz = w.cwiseProduct(dw.array().matrix() - VectorXd::Constant(k, inner));
        } else {
            dz = dw;
        }
        z -= options.learning_rate * dz;
        ++iters;

        const double bce = blend_bce(probs, labels, weights_of(z));
        if (bce < best_bce) {
            best_bce = bce;
            best_z = z;
        }
        if (std::abs(prev - bce) < options.rel_tolerance * std::max(1.0, std::abs(prev))) break;
        prev = bce;
    }

    VectorXd best_w = weights_of(best_z);
    // One-hot fallback: the blend must never lose to a single submodel.
    for (Eigen::Index j = 0; j < k; ++j) {
        VectorXd onehot = VectorXd::Zero(k);
        onehot[j] = 1.0;
        const double bce = blend_bce(probs, labels, onehot);
        if (bce < best_bce) {
            best_bce = bce;
            best_w = onehot;
        }
    }
    {
        const double bce = blend_bce(probs, labels, initial_weights);
        if (bce < best_bce) {
            best_bce = bce;
            best_w = initial_weights;
        }
    }

    model.weights = best_w;
    model.iterations = iters;
    model.test1_bce = best_bce;
    return model;
}

VectorXd stack_predict(const StackerModel& model, const MatrixXd& probs) {
    if (probs.cols() != model.weights.size())
        throw ContractError("stack_predict: expected " + std::to_string(model.weights.size()) +
                            " probability columns, got " + std::to_string(probs.cols()));
    VectorXd out = probs * model.weights;
    if (!model.simplex)
        for (Eigen::Index i = 0; i < out.size(); ++i)
            out[i] = std::clamp(out[i], nn::kProbEps, 1.0 - nn::kProbEps);
    return out;
}

}  // namespace nextbuy
