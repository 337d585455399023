#include "nextbuy/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace nextbuy {

MicroPrf micro_prf(std::span<const std::uint8_t> predictions,
                   std::span<const std::uint8_t> actuals) {
    if (predictions.size() != actuals.size()) throw ContractError("micro_prf: length mismatch");
    MicroPrf m;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        m.predicted += predictions[i];
        m.positives += actuals[i];
        if (predictions[i] && actuals[i]) m.true_positives += 1.0;
    }
    m.precision = m.predicted > 0 ? m.true_positives / static_cast<double>(m.predicted) : 0.0;
    m.recall = m.positives > 0 ? m.true_positives / static_cast<double>(m.positives) : 0.0;
    m.f1 = (m.predicted + m.positives) > 0
               ? 2.0 * m.true_positives / static_cast<double>(m.predicted + m.positives)
               : 0.0;
    return m;
}

ProbabilityHistogram probability_histogram(std::span<const double> probs,
                                           std::span<const double> labels) {
    if (probs.size() != labels.size())
        throw ContractError("probability_histogram: length mismatch");
    ProbabilityHistogram h;
    std::array<std::array<std::int64_t, ProbabilityHistogram::kBins>, 2> raw{};
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const int label = labels[i] >= 0.5 ? 1 : 0;
        int bin = static_cast<int>(probs[i] * ProbabilityHistogram::kBins);
        bin = std::clamp(bin, 0, ProbabilityHistogram::kBins - 1);
        ++raw[static_cast<std::size_t>(label)][static_cast<std::size_t>(bin)];
        ++h.counts[static_cast<std::size_t>(label)];
    }
    for (int label = 0; label < 2; ++label) {
        if (h.counts[static_cast<std::size_t>(label)] == 0) continue;
        for (int b = 0; b < ProbabilityHistogram::kBins; ++b)
            h.density[static_cast<std::size_t>(label)][static_cast<std::size_t>(b)] =
                static_cast<double>(raw[static_cast<std::size_t>(label)][static_cast<std::size_t>(b)]) /
                static_cast<double>(h.counts[static_cast<std::size_t>(label)]);
    }
    if (h.counts[0] > 0) {
        int mode = 0;
        for (int b = 1; b < ProbabilityHistogram::kBins; ++b)
            if (h.density[0][static_cast<std::size_t>(b)] > h.density[0][static_cast<std::size_t>(mode)])
                mode = b;
        // bins 0 and 1 cover [0, 0.1) with 20 uniform bins
        h.label0_mode_in_first_decile = mode <= 1;
    }
    return h;
}

EdaReport eda_report(const TransactionLog& log) {
    EdaReport r;

    // Basket sizes: transactions per order, then each consumer's mean.
    std::map<std::uint32_t, std::int64_t> order_size;
    std::map<std::uint32_t, std::uint32_t> order_consumer;
    for (const Transaction& t : log.transactions) {
        ++order_size[t.order];
        order_consumer[t.order] = t.consumer;
    }
    std::map<std::uint32_t, std::pair<double, std::int64_t>> consumer_sum;  // sum, orders
    for (const auto& [order, size] : order_size) {
        auto& acc = consumer_sum[order_consumer[order]];
        acc.first += static_cast<double>(size);
        acc.second += 1;
    }
    std::int64_t consumers = 0;
    for (const auto& [consumer, acc] : consumer_sum) {
        const double mean = acc.first / static_cast<double>(acc.second);
        int bin = static_cast<int>(std::lround(mean));
        bin = std::clamp(bin, 1, EdaReport::kBasketBins);
        r.basket_density[static_cast<std::size_t>(bin - 1)] += 1.0;
        ++consumers;
    }
    if (consumers > 0) {
        int mode = 0;
        for (int b = 0; b < EdaReport::kBasketBins; ++b) {
            r.basket_density[static_cast<std::size_t>(b)] /= static_cast<double>(consumers);
            if (r.basket_density[static_cast<std::size_t>(b)] >
                r.basket_density[static_cast<std::size_t>(mode)])
                mode = b;
        }
        r.basket_mode_bin = mode + 1;
    }

    // Reorder probability by cart position; the canonical sort makes a
    // single pass chronological within each consumer.
    std::array<std::int64_t, EdaReport::kCartBuckets> reorders{};
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    for (const Transaction& t : log.transactions) {
        const int bucket =
            std::min<int>(static_cast<int>(t.cart_pos), EdaReport::kCartBuckets) - 1;
        const bool reorder = !seen.insert({t.consumer, t.item}).second;
        ++r.cart_counts[static_cast<std::size_t>(bucket)];
        if (reorder) ++reorders[static_cast<std::size_t>(bucket)];
    }
    for (int b = 0; b < EdaReport::kCartBuckets; ++b)
        r.reorder_by_cart[static_cast<std::size_t>(b)] =
            r.cart_counts[static_cast<std::size_t>(b)] > 0
                ? static_cast<double>(reorders[static_cast<std::size_t>(b)]) /
                      static_cast<double>(r.cart_counts[static_cast<std::size_t>(b)])
                : 0.0;
    return r;
}

}  // namespace nextbuy
