#include "nextbuy/f1max.hpp"

#include <algorithm>
#include <fstream>

namespace nextbuy {

int ConsumerPredictions::positives() const {
    int b = 0;
    for (std::uint8_t a : actuals) b += a;
    return b;
}

std::vector<std::uint8_t> decision_rule(std::span<const double> probs, double threshold) {
    std::vector<std::uint8_t> out(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] >= threshold ? 1 : 0;
    return out;
}

F1Stats f1_at_threshold(std::span<const std::uint8_t> actuals, std::span<const double> probs,
                        double threshold) {
    if (actuals.size() != probs.size()) throw ContractError("f1_at_threshold: length mismatch");
    F1Stats s;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const bool hit = probs[i] >= threshold;
        s.predicted += hit;
        s.positives += actuals[i];
        if (hit && actuals[i]) s.true_positives += 1.0;
    }
    s.precision = s.predicted > 0 ? s.true_positives / s.predicted : 0.0;
    s.recall = s.positives > 0 ? s.true_positives / s.positives : 0.0;
    s.f1 = (s.predicted + s.positives) > 0
               ? 2.0 * s.true_positives / (s.predicted + s.positives)
               : 0.0;
    return s;
}

double optimize_threshold(std::span<const std::uint8_t> actuals, std::span<const double> probs) {
    if (probs.empty()) throw ContractError("optimize_threshold: empty predictions");
    if (actuals.size() != probs.size()) throw ContractError("optimize_threshold: length mismatch");

    int b = 0;
    for (std::uint8_t a : actuals) b += a;
    if (b == 0) return threshold_sentinel();

    std::vector<double> candidates(probs.begin(), probs.end());
    candidates.push_back(0.5);
    candidates.push_back(threshold_sentinel());
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    double best_thr = threshold_sentinel();
    double best_f1 = -1.0;
    for (double thr : candidates) {
        const double f1 = f1_at_threshold(actuals, probs, thr).f1;
        if (f1 > best_f1 || (f1 == best_f1 && thr > best_thr)) {
            best_f1 = f1;
            best_thr = thr;
        }
    }
    return best_thr;
}

ThresholdMap fit_thresholds(const std::vector<ConsumerPredictions>& groups) {
    ThresholdMap map;
    std::vector<double> fitted;
    for (const auto& g : groups) {
        if (g.probs.empty()) continue;
        const double thr = optimize_threshold(g.actuals, g.probs);
        map.by_consumer[g.consumer] = thr;
        fitted.push_back(thr);
    }
    if (!fitted.empty()) {
        std::sort(fitted.begin(), fitted.end());
        map.fallback = fitted[(fitted.size() - 1) / 2];  // lower median
    }
    return map;
}

std::vector<std::vector<std::uint8_t>> apply_thresholds(
    const std::vector<ConsumerPredictions>& groups, const ThresholdMap& thresholds) {
    std::vector<std::vector<std::uint8_t>> out;
    out.reserve(groups.size());
    for (const auto& g : groups)
        out.push_back(decision_rule(g.probs, thresholds.threshold_for(g.consumer)));
    return out;
}

void write_threshold_map(const ThresholdMap& map, const std::vector<std::string>& consumer_ids,
                         const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write: " + path);
    out.precision(17);
    for (const auto& [code, thr] : map.by_consumer) {
        const std::string& id =
            code < consumer_ids.size() ? consumer_ids[code] : std::to_string(code);
        out << id << '\t' << thr << '\n';
    }
    out << "#fallback\t" << map.fallback << '\n';
}

}  // namespace nextbuy
