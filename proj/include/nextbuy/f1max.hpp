#ifndef NEXTBUY_F1MAX_HPP
#define NEXTBUY_F1MAX_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "nextbuy/common.hpp"

namespace nextbuy {

/// Threshold strictly above every probability: "predict nothing".
inline double threshold_sentinel() { return std::nextafter(1.0, 2.0); }

/// One consumer's scored item-week entries on a split.
struct ConsumerPredictions {
    std::uint32_t consumer = 0;
    std::vector<double> probs;
    std::vector<std::uint8_t> actuals;  // empty when unknown (pure scoring)

    std::size_t n() const { return probs.size(); }
    int positives() const;  // b
};

/// p'_j = 1 iff p_j >= threshold.
std::vector<std::uint8_t> decision_rule(std::span<const double> probs, double threshold);

struct F1Stats {
    double true_positives = 0;  // V
    int predicted = 0;          // k
    int positives = 0;          // b
    double precision = 0, recall = 0, f1 = 0;
};

/// Precision = V/k, recall = V/b, F1 = 2V/(k+b); zero denominators give 0.
F1Stats f1_at_threshold(std::span<const std::uint8_t> actuals, std::span<const double> probs,
                        double threshold);

/// Exhaustive search over {distinct probabilities} + {0.5} + {sentinel};
/// ties go to the larger threshold (fewer predicted positives). Consumers
/// with no positives get the sentinel.
double optimize_threshold(std::span<const std::uint8_t> actuals, std::span<const double> probs);

struct ThresholdMap {
    std::map<std::uint32_t, double> by_consumer;
    double fallback = 0.5;  // applied to consumers unseen at fit time

    double threshold_for(std::uint32_t consumer) const {
        auto it = by_consumer.find(consumer);
        return it == by_consumer.end() ? fallback : it->second;
    }
};

/// Optimizes one threshold per consumer on the fitting split; the fallback
/// is the lower median of the fitted thresholds.
ThresholdMap fit_thresholds(const std::vector<ConsumerPredictions>& groups);

/// Binary predictions per group, aligned with the group's entries.
std::vector<std::vector<std::uint8_t>> apply_thresholds(
    const std::vector<ConsumerPredictions>& groups, const ThresholdMap& thresholds);

void write_threshold_map(const ThresholdMap& map, const std::vector<std::string>& consumer_ids,
                         const std::string& path);

}  // namespace nextbuy

#endif
