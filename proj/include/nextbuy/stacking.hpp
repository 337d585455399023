#ifndef NEXTBUY_STACKING_HPP
#define NEXTBUY_STACKING_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "nextbuy/common.hpp"

namespace nextbuy {

/// Weighted K-best blend over submodel probabilities.
struct StackerModel {
    std::vector<int> selected;  // indices into the candidate pool, best first
    Eigen::VectorXd weights;    // aligned with `selected`
    int iterations = 0;
    double test1_bce = 0.0;
    bool simplex = true;

    bool operator==(const StackerModel&) const = default;
};

struct StackerFitOptions {
    double learning_rate = 0.05;
    int max_iterations = 2000;
    double rel_tolerance = 1e-9;
    bool simplex = true;  // softmax-parameterized weights; otherwise unconstrained
};

/// Indices of the k smallest losses; ties break toward the lower index.
/// Throws ContractError when k exceeds the pool.
std::vector<int> select_k_best(const std::vector<double>& test1_losses, int k);

/// w_j = (1/loss_j) / sum_i (1/loss_i); losses must be positive.
Eigen::VectorXd init_weights(const std::vector<double>& losses);

/// Gradient descent on the blend's BCE over `probs` (rows x K). The returned
/// weights are never worse than the initialization or any single submodel:
/// every one-hot vector is evaluated as a fallback and the argmin kept.
StackerModel fit_stacker(const Eigen::MatrixXd& probs, const Eigen::VectorXd& labels,
                         const Eigen::VectorXd& initial_weights,
                         const StackerFitOptions& options = {});

/// Convex combination per row; column order must match model.selected.
Eigen::VectorXd stack_predict(const StackerModel& model, const Eigen::MatrixXd& probs);

}  // namespace nextbuy

#endif
