#include "nextbuy/nn/optim.hpp"

#include <cmath>

namespace nextbuy::nn {

const char* opt_kind_name(OptKind k) { return k == OptKind::RmsProp ? "rmsprop" : "adam"; }
const char* sched_kind_name(SchedKind k) { return k == SchedKind::Cyclic ? "cyclic" : "plateau"; }

OptKind opt_kind_from(const std::string& s) {
    if (s == "rmsprop") return OptKind::RmsProp;
    if (s == "adam") return OptKind::Adam;
    throw ConfigError("unknown optimizer: " + s);
}

SchedKind sched_kind_from(const std::string& s) {
    if (s == "cyclic") return SchedKind::Cyclic;
    if (s == "plateau") return SchedKind::Plateau;
    throw ConfigError("unknown scheduler: " + s);
}

Optimizer::Optimizer(OptKind k, const std::vector<ParamRef>& params) : kind(k) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const auto& p : params) {
        m_.push_back(Mat::Zero(p.value->rows(), p.value->cols()));
        v_.push_back(Mat::Zero(p.value->rows(), p.value->cols()));
    }
}

void Optimizer::step(std::vector<ParamRef>& params, double lr) {
    if (params.size() != v_.size()) throw ContractError("optimizer: parameter set changed");
    ++t_;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Mat& g = *params[i].grad;
        if (!g.allFinite())
            throw TrainingError("non-finite gradient in " + params[i].name);
        Mat& theta = *params[i].value;
        if (kind == OptKind::RmsProp) {
            v_[i] = rho * v_[i] + (1.0 - rho) * g.cwiseProduct(g);
            theta.array() -= lr * g.array() / (v_[i].array().sqrt() + eps);
        } else {
            m_[i] = beta1 * m_[i] + (1.0 - beta1) * g;
            v_[i] = beta2 * v_[i] + (1.0 - beta2) * g.cwiseProduct(g);
            const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
            const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
            theta.array() -=
                lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + eps);
        }
    }
}

double CyclicLr::at(std::int64_t iteration) const {
    const std::int64_t cycle = 2LL * step_size_;
    const double x = static_cast<double>(iteration % cycle);
    const double dist = std::abs(x - static_cast<double>(step_size_));
    return base_ + (max_ - base_) * (1.0 - dist / static_cast<double>(step_size_));
}

double PlateauLr::observe(double val_loss) {
    if (val_loss < best_) {
        best_ = val_loss;
        bad_ = 0;
    } else {
        ++bad_;
        if (bad_ >= patience_) {
            lr_ = std::max(min_, lr_ * factor_);
            bad_ = 0;
        }
    }
    return lr_;
}

void SwaState::accumulate(const Vec& params) {
    if (count == 0) {
        mean = params;
    } else {
        mean += (params - mean) / static_cast<double>(count + 1);
    }
    ++count;
}

Vec SwaState::finalize() const {
    if (count == 0) throw ContractError("swa_finalize: no snapshots accumulated");
    return mean;
}

Vec parameter_average(const std::vector<std::pair<Vec, double>>& checkpoints) {
    if (checkpoints.empty()) throw ContractError("parameter_average: empty checkpoint set");
    double denom = 0.0;
    for (const auto& [params, loss] : checkpoints) {
        if (!(loss > 0.0)) throw ContractError("parameter_average: losses must be positive");
        denom += 1.0 / loss;
    }
    Vec out = Vec::Zero(checkpoints.front().first.size());
    for (const auto& [params, loss] : checkpoints) {
        if (params.size() != out.size())
            throw ContractError("parameter_average: checkpoint shapes differ");
        out += (1.0 / loss / denom) * params;
    }
    return out;
}

}  // namespace nextbuy::nn
