#ifndef NEXTBUY_NN_OPTIM_HPP
#define NEXTBUY_NN_OPTIM_HPP

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "nextbuy/nn/core.hpp"

namespace nextbuy::nn {

enum class OptKind { RmsProp, Adam };
enum class SchedKind { Cyclic, Plateau };

const char* opt_kind_name(OptKind k);
const char* sched_kind_name(SchedKind k);
OptKind opt_kind_from(const std::string& s);
SchedKind sched_kind_from(const std::string& s);

/// RMSProp (decay 0.99) or bias-corrected Adam (0.9, 0.999), both eps 1e-8.
/// Throws TrainingError naming the parameter when a gradient is non-finite.
class Optimizer {
public:
    Optimizer(OptKind kind, const std::vector<ParamRef>& params);

    void step(std::vector<ParamRef>& params, double lr);

    OptKind kind;
    double rho = 0.99;
    double beta1 = 0.9, beta2 = 0.999;
    double eps = 1e-8;

private:
    std::vector<Mat> m_, v_;
    std::int64_t t_ = 0;
};

/// Triangular cycle between base_lr and max_lr; one full ascent takes
/// step_size iterations (the number of train batches per epoch).
class CyclicLr {
public:
    CyclicLr(int step_size, double base_lr = 1e-6, double max_lr = 1e-3)
        : step_size_(step_size), base_(base_lr), max_(max_lr) {
        if (step_size <= 0) throw ContractError("cyclic: step size must be positive");
    }
    double at(std::int64_t iteration) const;

private:
    int step_size_;
    double base_, max_;
};

/// Multiplies the rate by `factor` after `patience` consecutive epochs
/// without validation improvement; never drops below min_lr.
class PlateauLr {
public:
    PlateauLr(double initial_lr = 1e-3, double factor = 0.1, int patience = 2,
              double min_lr = 1e-6)
        : lr_(initial_lr), factor_(factor), patience_(patience), min_(min_lr) {}

    /// Feed one epoch's validation loss; returns the rate for the next epoch.
    double observe(double val_loss);
    double current() const { return lr_; }

private:
    double lr_, factor_;
    int patience_;
    double min_;
    double best_ = std::numeric_limits<double>::infinity();
    int bad_ = 0;
};

/// Running equal average of parameter snapshots.
struct SwaState {
    Vec mean;
    std::int64_t count = 0;

    void accumulate(const Vec& params);
    /// Arithmetic mean of everything accumulated; throws ContractError when
    /// no snapshot was taken.
    Vec finalize() const;
};

/// Inverse-validation-loss weighted combination of the n best checkpoints:
/// w_i = (1/loss_i) / sum_j (1/loss_j).
Vec parameter_average(const std::vector<std::pair<Vec, double>>& checkpoints);

}  // namespace nextbuy::nn

#endif
