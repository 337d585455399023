#ifndef NEXTBUY_FEATURES_HPP
#define NEXTBUY_FEATURES_HPP

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "nextbuy/panel.hpp"
#include "nextbuy/synth.hpp"

namespace nextbuy {

// ============================================================================
// Schema
// ============================================================================

enum class FeatureGroup {
    StaticCategorical,
    TemporalCategorical,
    StaticContinuous,
    TemporalContinuous,
};
const char* feature_group_name(FeatureGroup g);

/// Routing tag used by the model architectures: sequence models consume raw
/// temporal channels instead of the lagged rolling block.
enum class FeatureRole { Entity, Datetime, StaticAttr, Profile, Rolling };
const char* feature_role_name(FeatureRole r);

struct CategoricalFeature {
    std::string name;
    FeatureGroup group;
    FeatureRole role;
    int cardinality = 1;  // includes the reserved unknown code 0
};

struct ContinuousFeature {
    std::string name;
    FeatureGroup group;
    FeatureRole role;
    double mean = 0.0;  // train-split standardization stats
    double stddev = 0.0;
};

struct SeqChannel {
    std::string name;
    int shift = 0;  // weeks the value is delayed when fed as a sequence input
    double mean = 0.0;
    double stddev = 0.0;
};

struct FeatureSchema {
    std::vector<CategoricalFeature> categoricals;
    std::vector<ContinuousFeature> continuous;
    std::vector<SeqChannel> seq_channels;
    int seq_window = 15;

    int cat_index(const std::string& name) const;
    int cont_index(const std::string& name) const;
    /// Identity over names, groups, roles and cardinalities (not stats).
    std::uint64_t hash() const;
};

// ============================================================================
// Datetime features
// ============================================================================

struct DatetimeFeatures {
    int week_of_year = 0;  // 0..51, panel-periodic and calendar-anchored
    int month = 0;         // 0..11 from the week start date
    int quarter = 0;       // 0..3
    double sin_phase = 0.0;
    double cos_phase = 0.0;
    double trend = 0.0;  // linear week index
};

DatetimeFeatures datetime_features(int week, const WeekAssignment& calendar);

// ============================================================================
// Profile features (history strictly before the as-of week)
// ============================================================================

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

struct ConsumerProfile {
    double orders = 0, weeks_since_last = kMissing, weeks_since_first = kMissing,
           mean_basket = kMissing, distinct_items = 0, active_weeks = 0, mean_gap = kMissing;
};
struct ItemProfile {
    double txns = 0, consumers = 0, reorder_rate = kMissing, mean_cart_pos = kMissing;
};
struct PairProfile {
    double orders = 0, weeks_since_last = kMissing, weeks_since_first = kMissing,
           mean_gap = kMissing, streak = 0, reorder_rate = kMissing, reorder_freq = kMissing,
           mean_cart_pos = kMissing;
};

/// Incremental single-pass aggregator. advance_to(w) absorbs all transactions
/// in weeks < w; queries then reflect exactly the history before w. The same
/// sweep drives both the public snapshot op and matrix assembly, so there is
/// one leakage-sensitive code path.
class ProfileScanner {
public:
    ProfileScanner(const TransactionLog& log, const WeekAssignment& weeks);

    void advance_to(int as_of_week);
    int week() const { return current_week_; }

    ConsumerProfile consumer(std::uint32_t c) const;
    ItemProfile item(std::uint32_t i) const;
    PairProfile pair(std::uint32_t c, std::uint32_t i) const;
    double aisle_txns(std::uint32_t a) const;
    double department_txns(std::uint32_t d) const;

private:
    struct ConsumerState {
        std::int64_t orders = 0, txns = 0, distinct_items = 0, active_weeks = 0;
        int first_week = -1, last_week = -1;
        std::int64_t gap_sum = 0, gap_n = 0;
    };
    struct ItemState {
        std::int64_t txns = 0, consumers = 0, reorders = 0;
        std::int64_t cart_sum = 0;
    };
    struct PairState {
        std::int64_t txns = 0, active_weeks = 0;
        int first_week = -1, last_week = -1;
        std::int64_t gap_sum = 0, gap_n = 0, streak = 0, cart_sum = 0;
    };

    void absorb_week(int w);

    const TransactionLog& log_;
    const WeekAssignment& weeks_;
    std::vector<std::vector<std::size_t>> buckets_;  // transaction indices per week
    std::vector<ConsumerState> consumers_;
    std::vector<ItemState> items_;
    std::vector<std::unordered_map<std::uint32_t, int>> pair_index_;  // consumer -> item -> slot
    std::vector<std::vector<PairState>> pairs_;
    std::vector<double> aisle_txns_, dept_txns_;
    int current_week_ = 0;
};

// ============================================================================
// Rolling offsets
// ============================================================================

enum class RollingStat { Mean, Median, Q25, Q75, Variance, Skewness, Kurtosis };
constexpr std::array<RollingStat, 7> kRollingStats = {
    RollingStat::Mean,     RollingStat::Median,   RollingStat::Q25,     RollingStat::Q75,
    RollingStat::Variance, RollingStat::Skewness, RollingStat::Kurtosis};
const char* rolling_stat_name(RollingStat s);

/// Population-moment statistic of a window of values. Zero-variance windows
/// yield 0 for skewness and kurtosis (excess).
double rolling_stat(std::span<const double> window, RollingStat stat);

/// Statistic over the trailing `window` weeks ending `lag` weeks before
/// `target_week`; nullopt when the window reaches before week 0.
std::optional<double> rolling_offset(std::span<const double> series, int target_week, int window,
                                     int lag, RollingStat stat);

// ============================================================================
// Assembled matrices
// ============================================================================

struct RowKey {
    std::uint32_t series = 0;
    std::uint32_t consumer = 0;
    std::uint32_t item = 0;
    std::uint16_t week = 0;
    bool operator==(const RowKey&) const = default;
};

struct FeatureMatrix {
    std::string split;
    std::vector<RowKey> keys;
    Eigen::MatrixXi cats;  // n x |categoricals|, codes with 0 = unknown
    Eigen::MatrixXd cont;  // n x |continuous|, standardized, imputed
    Eigen::VectorXd labels;

    Eigen::Index n() const { return labels.size(); }
};

/// Per-series standardized temporal channels for sequence models.
struct SeqStore {
    int n_weeks = 0;
    int window = 15;
    std::vector<Eigen::MatrixXd> per_series;  // channels x weeks, standardized
    std::vector<int> shifts;

    /// Writes the trailing window for (series, target_week) into `out`
    /// (window rows x channels), zero-filled outside history.
    void gather(std::uint32_t series, int target_week, Eigen::Ref<Eigen::MatrixXd> out) const;
};

struct FeatureBundle {
    FeatureSchema schema;
    std::array<FeatureMatrix, kSplitCount> splits;
    SeqStore seq;

    const FeatureMatrix& split(Split s) const { return splits[static_cast<int>(s)]; }
};

struct FeatureParams {
    std::vector<int> windows = {4, 8, 12};
    std::vector<int> lags = {1, 2, 4};
};

/// Builds the four split matrices plus sequence channels. Vocabularies for
/// entity categoricals come from the train split only; levels first seen
/// later map to the unknown code. Continuous features are standardized with
/// train-split moments and missing values imputed to 0 afterwards.
FeatureBundle assemble_features(const TransactionLog& log, const SplitPanel& panel,
                                const ConsumerAttributes& attrs, const FeatureParams& params);

}  // namespace nextbuy

#endif
