#include "nextbuy/panel.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace nextbuy {

WeekAssignment assign_weeks(const TransactionLog& log, int anchor_weekday) {
    if (log.transactions.empty()) throw ContractError("assign_weeks: empty log");
    if (anchor_weekday < 0 || anchor_weekday > 6)
        throw ConfigError("week anchor must be 0 (Monday) .. 6 (Sunday)");

    Date min_date = log.transactions.front().date;
    Date max_date = min_date;
    for (const Transaction& t : log.transactions) {
        min_date = std::min(min_date, t.date);
        max_date = std::max(max_date, t.date);
    }
    int back = (min_date.weekday() - anchor_weekday + 7) % 7;
    WeekAssignment w;
    w.week0_start = min_date.plus_days(-back);
    w.n_weeks = w.week_of(max_date) + 1;
    return w;
}

std::vector<ConsumerItemSeries> build_series(const TransactionLog& log,
                                             const WeekAssignment& weeks, int train_lo,
                                             int train_hi) {
    // Purchase weeks per pair; transactions are sorted by consumer, so pairs
    // come out grouped and the final series order is (consumer, item).
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::set<int>> purchase_weeks;
    for (const Transaction& t : log.transactions)
        purchase_weeks[{t.consumer, t.item}].insert(weeks.week_of(t.date));

    std::vector<ConsumerItemSeries> out;
    for (const auto& [key, wk] : purchase_weeks) {
        auto lo = wk.lower_bound(train_lo);
        if (lo == wk.end() || *lo > train_hi) continue;  // no purchase in the training window
        ConsumerItemSeries s;
        s.consumer = key.first;
        s.item = key.second;
        s.first_week = *wk.begin();
        s.labels.assign(static_cast<std::size_t>(weeks.n_weeks - s.first_week), 0);
        for (int w : wk) s.labels[static_cast<std::size_t>(w - s.first_week)] = 1;
        out.push_back(std::move(s));
    }
    if (out.empty())
        throw ConfigError(
            "no relevant consumer-item pairs in the training window; widen the window");
    return out;
}

SplitPanel split_panel(const TransactionLog& log, const WeekAssignment& weeks,
                       const SplitConfig& cfg) {
    if (cfg.train_weeks <= 0 || cfg.validation_weeks <= 0 || cfg.test1_weeks <= 0 ||
        cfg.test2_weeks <= 0)
        throw ConfigError("split widths must be positive");
    const int total = cfg.train_weeks + cfg.validation_weeks + cfg.test1_weeks + cfg.test2_weeks;
    if (weeks.n_weeks < total)
        throw ConfigError("insufficient history: " + std::to_string(weeks.n_weeks) +
                          " weeks available, " + std::to_string(total) + " configured");

    SplitPanel p;
    p.weeks = weeks;
    p.cfg = cfg;
    const int W = weeks.n_weeks;
    p.hi[3] = W - 1;
    p.lo[3] = W - cfg.test2_weeks;
    p.hi[2] = p.lo[3] - 1;
    p.lo[2] = p.hi[2] - cfg.test1_weeks + 1;
    p.hi[1] = p.lo[2] - 1;
    p.lo[1] = p.hi[1] - cfg.validation_weeks + 1;
    p.hi[0] = p.lo[1] - 1;
    p.lo[0] = std::max(0, p.hi[0] - cfg.train_weeks + 1);

    p.series = build_series(log, weeks, p.lo[0], p.hi[0]);

    for (std::uint32_t si = 0; si < p.series.size(); ++si) {
        const ConsumerItemSeries& s = p.series[si];
        for (int s_idx = 0; s_idx < kSplitCount; ++s_idx) {
            const int from = std::max(s.first_week, p.lo[s_idx]);
            for (int w = from; w <= p.hi[s_idx]; ++w)
                p.rows[s_idx].push_back(
                    {si, static_cast<std::uint16_t>(w), s.label_at(w)});
        }
    }
    // Reorder each split to (series, week); filling order already guarantees
    // it, so this is just the documented canonical sort.
    for (auto& rows : p.rows)
        std::sort(rows.begin(), rows.end(), [](const PanelRow& a, const PanelRow& b) {
            return a.series != b.series ? a.series < b.series : a.week < b.week;
        });

    // Relevancy growth report: pairs with at least one purchase up to each
    // split's end.
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> first_purchase;
    for (const Transaction& t : log.transactions) {
        auto key = std::make_pair(t.consumer, t.item);
        int w = weeks.week_of(t.date);
        auto it = first_purchase.find(key);
        if (it == first_purchase.end() || w < it->second) first_purchase[key] = w;
    }
    for (int s_idx = 0; s_idx < kSplitCount; ++s_idx) {
        std::size_t n = 0;
        for (const auto& [key, w] : first_purchase)
            if (w <= p.hi[s_idx]) ++n;
        p.relevant_pairs[s_idx] = n;
    }
    return p;
}

}  // namespace nextbuy
