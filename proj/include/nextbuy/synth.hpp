#ifndef NEXTBUY_SYNTH_HPP
#define NEXTBUY_SYNTH_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nextbuy/ingest.hpp"

namespace nextbuy {

/// Static consumer attributes emitted alongside synthetic transactions.
struct ConsumerAttribute {
    double age = 0.0;
    double weight = 0.0;
    std::string sex;
    std::string marital_status;
    std::string location;
};

using ConsumerAttributes = std::map<std::string, ConsumerAttribute>;  // by external id

struct SynthConfig {
    int consumers = 500;
    int items = 50;
    int weeks = 52;
    int items_per_consumer = 4;  // mean; actual draw uniform in [1, 2*mean-1]
    int cadence_min = 2;         // periodic purchase gap in weeks
    int cadence_max = 8;
    double jitter = 0.35;        // 0 = perfectly periodic purchases
    double seasonality = 0.15;   // annual propensity modulation amplitude
    double reorder_decay = 1.0;  // 1 = reordered items always lead the cart
    double activation_span = 0.75;  // pairs activate within the first span*weeks
    int aisles = 10;
    int departments = 5;
    Date epoch = Date::from_ymd(2019, 1, 7);  // a Monday
    std::uint64_t seed = 7;
};

/// Planted weekly purchase probabilities for one consumer-item pair.
struct PairTruth {
    std::string consumer;
    std::string item;
    int activation = 0;  // first scheduled week
    int period = 1;
    std::vector<double> weekly_propensity;  // index = week, 0 before activation
};

struct GroundTruth {
    std::size_t consumer_count = 0;  // materialized (>=1 transaction)
    std::size_t item_count = 0;
    std::size_t order_count = 0;
    std::size_t transaction_count = 0;
    std::vector<PairTruth> pairs;
};

struct SynthResult {
    TransactionLog log;
    ConsumerAttributes attributes;
    GroundTruth truth;
};

/// Generates an Instacart-shaped transaction log with planted periodic
/// purchase patterns. Deterministic for a fixed seed; generation is
/// partitioned by consumer with per-partition derived streams.
SynthResult generate(const SynthConfig& cfg);

void write_consumer_attributes(const ConsumerAttributes& attrs, const std::string& path);
ConsumerAttributes read_consumer_attributes(const std::string& path);

}  // namespace nextbuy

#endif
