#ifndef NEXTBUY_PANEL_HPP
#define NEXTBUY_PANEL_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "nextbuy/ingest.hpp"

namespace nextbuy {

/// Maps calendar dates onto consecutive week indices. Week 0 starts on the
/// last anchor weekday on or before the earliest transaction date.
struct WeekAssignment {
    Date week0_start;
    int n_weeks = 0;

    int week_of(Date d) const {
        return static_cast<int>((d.days - week0_start.days) / 7);
    }
    Date week_start(int week) const { return week0_start.plus_days(7LL * week); }
};

/// anchor: 0 = Monday .. 6 = Sunday.
WeekAssignment assign_weeks(const TransactionLog& log, int anchor_weekday);

/// One relevant consumer-item pair's weekly 0/1 target sequence, from its
/// first purchase week through the panel end.
struct ConsumerItemSeries {
    std::uint32_t consumer = 0;
    std::uint32_t item = 0;
    int first_week = 0;
    std::vector<std::uint8_t> labels;  // labels[w - first_week]

    std::uint8_t label_at(int week) const {
        return week < first_week ? 0 : labels[static_cast<std::size_t>(week - first_week)];
    }
};

/// Builds one series per pair with at least one purchase inside
/// [train_lo, train_hi] (the relevancy rule). Throws ConfigError when the
/// relevancy set is empty.
std::vector<ConsumerItemSeries> build_series(const TransactionLog& log,
                                             const WeekAssignment& weeks, int train_lo,
                                             int train_hi);

struct SplitConfig {
    int train_weeks = 46;
    int validation_weeks = 2;
    int test1_weeks = 2;
    int test2_weeks = 2;
};

enum class Split : int { Train = 0, Validation = 1, Test1 = 2, Test2 = 3 };
inline const char* split_name(Split s) {
    static const char* names[] = {"train", "validation", "test1", "test2"};
    return names[static_cast<int>(s)];
}
constexpr int kSplitCount = 4;

struct PanelRow {
    std::uint32_t series = 0;  // index into SplitPanel::series
    std::uint16_t week = 0;
    std::uint8_t label = 0;

    bool operator==(const PanelRow&) const = default;
};

/// Four disjoint chronological slices of all series rows. Row order within a
/// split is (series index, week), series sorted by (consumer, item).
struct SplitPanel {
    WeekAssignment weeks;
    SplitConfig cfg;
    std::array<int, kSplitCount> lo{};  // inclusive week ranges per split
    std::array<int, kSplitCount> hi{};
    std::vector<ConsumerItemSeries> series;
    std::array<std::vector<PanelRow>, kSplitCount> rows;
    std::array<std::size_t, kSplitCount> relevant_pairs{};  // pairs with a purchase up to hi[s]

    const std::vector<PanelRow>& split_rows(Split s) const { return rows[static_cast<int>(s)]; }
    int split_lo(Split s) const { return lo[static_cast<int>(s)]; }
    int split_hi(Split s) const { return hi[static_cast<int>(s)]; }
};

/// Chronological carve-up per the configured widths: the last test2 weeks go
/// to test2, preceding test1 weeks to test1, then validation, and up to
/// train_weeks before that to train. Throws ConfigError on insufficient
/// history.
SplitPanel split_panel(const TransactionLog& log, const WeekAssignment& weeks,
                       const SplitConfig& cfg);

}  // namespace nextbuy

#endif
