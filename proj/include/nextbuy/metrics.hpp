#ifndef NEXTBUY_METRICS_HPP
#define NEXTBUY_METRICS_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "nextbuy/f1max.hpp"
#include "nextbuy/ingest.hpp"
#include "nextbuy/panel.hpp"

namespace nextbuy {

struct MicroPrf {
    double precision = 0, recall = 0, f1 = 0;
    double true_positives = 0;
    std::int64_t predicted = 0, positives = 0;
};

/// Pooled (micro) precision/recall/F1 over aligned prediction/actual rows.
MicroPrf micro_prf(std::span<const std::uint8_t> predictions,
                   std::span<const std::uint8_t> actuals);

struct ProbabilityHistogram {
    static constexpr int kBins = 20;
    std::array<std::array<double, kBins>, 2> density{};  // per label, sums to 1
    std::array<std::int64_t, 2> counts{};
    bool label0_mode_in_first_decile = false;  // mass peak within [0, 0.1]
};

ProbabilityHistogram probability_histogram(std::span<const double> probs,
                                           std::span<const double> labels);

struct EdaReport {
    // density of consumers over mean basket size, integer bins 1..30 (last pooled)
    static constexpr int kBasketBins = 30;
    std::array<double, kBasketBins> basket_density{};
    int basket_mode_bin = 0;  // 1-based basket size with peak density

    // P(transaction is a reorder | add-to-cart position), buckets 1..20 and 21+
    static constexpr int kCartBuckets = 21;
    std::array<double, kCartBuckets> reorder_by_cart{};
    std::array<std::int64_t, kCartBuckets> cart_counts{};
};

EdaReport eda_report(const TransactionLog& log);

}  // namespace nextbuy

#endif
