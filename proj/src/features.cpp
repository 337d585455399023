#include "nextbuy/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace nextbuy {

// ----------------------------------------------------------------------------
// Schema
// ----------------------------------------------------------------------------

const char* feature_group_name(FeatureGroup g) {
    switch (g) {
        case FeatureGroup::StaticCategorical: return "static-categorical";
        case FeatureGroup::TemporalCategorical: return "temporal-categorical";
        case FeatureGroup::StaticContinuous: return "static-continuous";
        case FeatureGroup::TemporalContinuous: return "temporal-continuous";
    }
    return "?";
}

const char* feature_role_name(FeatureRole r) {
    switch (r) {
        case FeatureRole::Entity: return "entity";
        case FeatureRole::Datetime: return "datetime";
        case FeatureRole::StaticAttr: return "static-attr";
        case FeatureRole::Profile: return "profile";
        case FeatureRole::Rolling: return "rolling";
    }
    return "?";
}

const char* rolling_stat_name(RollingStat s) {
    switch (s) {
        case RollingStat::Mean: return "mean";
        case RollingStat::Median: return "median";
        case RollingStat::Q25: return "q25";
        case RollingStat::Q75: return "q75";
        case RollingStat::Variance: return "var";
        case RollingStat::Skewness: return "skew";
        case RollingStat::Kurtosis: return "kurt";
    }
    return "?";
}

int FeatureSchema::cat_index(const std::string& name) const {
    for (std::size_t i = 0; i < categoricals.size(); ++i)
        if (categoricals[i].name == name) return static_cast<int>(i);
    throw ContractError("unknown categorical feature: " + name);
}

int FeatureSchema::cont_index(const std::string& name) const {
    for (std::size_t i = 0; i < continuous.size(); ++i)
        if (continuous[i].name == name) return static_cast<int>(i);
    throw ContractError("unknown continuous feature: " + name);
}

std::uint64_t FeatureSchema::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& c : categoricals) {
        h = fnv1a(c.name, h);
        h = fnv1a(feature_group_name(c.group), h);
        std::uint64_t card = static_cast<std::uint64_t>(c.cardinality);
        h = fnv1a(&card, sizeof card, h);
    }
    for (const auto& c : continuous) {
        h = fnv1a(c.name, h);
        h = fnv1a(feature_group_name(c.group), h);
    }
    for (const auto& c : seq_channels) {
        h = fnv1a(c.name, h);
        std::uint64_t sh = static_cast<std::uint64_t>(c.shift);
        h = fnv1a(&sh, sizeof sh, h);
    }
    std::uint64_t win = static_cast<std::uint64_t>(seq_window);
    return fnv1a(&win, sizeof win, h);
}

// ----------------------------------------------------------------------------
// Datetime features
// ----------------------------------------------------------------------------

DatetimeFeatures datetime_features(int week, const WeekAssignment& calendar) {
    const Date start = calendar.week_start(week);
    // Fold the panel's week counter at 52 so that week w and w+52 share a
    // code; the offset aligns code 0 with the calendar year start.
    const int offset = ((calendar.week0_start.day_of_year() - 1) / 7) % 52;
    DatetimeFeatures f;
    f.week_of_year = (offset + week) % 52;
    f.month = start.month() - 1;
    f.quarter = f.month / 3;
    const double phase = 2.0 * M_PI * f.week_of_year / 52.0;
    f.sin_phase = std::sin(phase);
    f.cos_phase = std::cos(phase);
    f.trend = static_cast<double>(week);
    return f;
}

// ----------------------------------------------------------------------------
// Profile scanner
// ----------------------------------------------------------------------------

ProfileScanner::ProfileScanner(const TransactionLog& log, const WeekAssignment& weeks)
    : log_(log), weeks_(weeks) {
    consumers_.resize(log.consumer_count());
    items_.resize(log.item_count());
    aisle_txns_.assign(log.aisle_ids.size(), 0.0);
    dept_txns_.assign(log.department_ids.size(), 0.0);
    pairs_.resize(log.consumer_count());
    pair_index_.resize(log.consumer_count());

    // Bucket transaction indices by week, preserving canonical order.
    buckets_.assign(static_cast<std::size_t>(weeks.n_weeks), {});
    for (std::size_t i = 0; i < log.transactions.size(); ++i) {
        int w = weeks.week_of(log.transactions[i].date);
        if (w >= 0 && w < weeks.n_weeks) buckets_[static_cast<std::size_t>(w)].push_back(i);
    }
}

void ProfileScanner::advance_to(int as_of_week) {
    if (as_of_week < current_week_)
        throw ContractError("ProfileScanner cannot rewind");
    for (int w = current_week_; w < as_of_week && w < weeks_.n_weeks; ++w) absorb_week(w);
    current_week_ = as_of_week;
}

void ProfileScanner::absorb_week(int w) {
    std::uint32_t prev_consumer = 0;
    std::uint32_t prev_order = 0;
    bool have_prev = false;
    for (std::size_t idx : buckets_[static_cast<std::size_t>(w)]) {
        const Transaction& t = log_.transactions[idx];
        ConsumerState& cs = consumers_[t.consumer];

        if (!have_prev || prev_consumer != t.consumer || prev_order != t.order) {
            ++cs.orders;
            have_prev = true;
            prev_consumer = t.consumer;
            prev_order = t.order;
        }
        ++cs.txns;
        if (cs.first_week < 0) cs.first_week = w;
        if (cs.last_week != w) {
            if (cs.last_week >= 0) {
                cs.gap_sum += w - cs.last_week;
                ++cs.gap_n;
            }
            cs.last_week = w;
            ++cs.active_weeks;
        }

        ItemState& is = items_[t.item];
        ++is.txns;
        is.cart_sum += t.cart_pos;

        auto& slot_map = pair_index_[t.consumer];
        auto [it, inserted] =
            slot_map.try_emplace(t.item, static_cast<int>(pairs_[t.consumer].size()));
        if (inserted) {
            pairs_[t.consumer].emplace_back();
            ++cs.distinct_items;
            ++is.consumers;
        } else {
            ++is.reorders;
        }
        PairState& ps = pairs_[t.consumer][static_cast<std::size_t>(it->second)];
        ++ps.txns;
        ps.cart_sum += t.cart_pos;
        if (ps.first_week < 0) ps.first_week = w;
        if (ps.last_week != w) {
            if (ps.last_week >= 0) {
                ps.gap_sum += w - ps.last_week;
                ++ps.gap_n;
                ps.streak = (w - ps.last_week == 1) ? ps.streak + 1 : 1;
            } else {
                ps.streak = 1;
            }
            ps.last_week = w;
            ++ps.active_weeks;
        }

        aisle_txns_[t.aisle] += 1.0;
        dept_txns_[t.department] += 1.0;
    }
}

ConsumerProfile ProfileScanner::consumer(std::uint32_t c) const {
    ConsumerProfile p;
    if (c >= consumers_.size()) return p;
    const ConsumerState& s = consumers_[c];
    p.orders = static_cast<double>(s.orders);
    p.distinct_items = static_cast<double>(s.distinct_items);
    p.active_weeks = static_cast<double>(s.active_weeks);
    if (s.last_week >= 0) {
        p.weeks_since_last = current_week_ - s.last_week;
        p.weeks_since_first = current_week_ - s.first_week;
        p.mean_basket = static_cast<double>(s.txns) / static_cast<double>(s.orders);
    }
    if (s.gap_n > 0) p.mean_gap = static_cast<double>(s.gap_sum) / static_cast<double>(s.gap_n);
    return p;
}

ItemProfile ProfileScanner::item(std::uint32_t i) const {
    ItemProfile p;
    if (i >= items_.size()) return p;
    const ItemState& s = items_[i];
    p.txns = static_cast<double>(s.txns);
    p.consumers = static_cast<double>(s.consumers);
    if (s.txns > 0) {
        p.reorder_rate = static_cast<double>(s.reorders) / static_cast<double>(s.txns);
        p.mean_cart_pos = static_cast<double>(s.cart_sum) / static_cast<double>(s.txns);
    }
    return p;
}

PairProfile ProfileScanner::pair(std::uint32_t c, std::uint32_t i) const {
    PairProfile p;
    if (c >= pairs_.size()) return p;
    auto it = pair_index_[c].find(i);
    if (it == pair_index_[c].end()) return p;
    const PairState& s = pairs_[c][static_cast<std::size_t>(it->second)];
    p.orders = static_cast<double>(s.txns);
    p.streak = static_cast<double>(s.streak);
    if (s.last_week >= 0) {
        p.weeks_since_last = current_week_ - s.last_week;
        p.weeks_since_first = current_week_ - s.first_week;
        p.reorder_rate = static_cast<double>(s.txns - 1) / static_cast<double>(s.txns);
        p.reorder_freq =
            static_cast<double>(s.txns - 1) / static_cast<double>(s.active_weeks);
        p.mean_cart_pos = static_cast<double>(s.cart_sum) / static_cast<double>(s.txns);
    }
    if (s.gap_n > 0) p.mean_gap = static_cast<double>(s.gap_sum) / static_cast<double>(s.gap_n);
    return p;
}

double ProfileScanner::aisle_txns(std::uint32_t a) const {
    return a < aisle_txns_.size() ? aisle_txns_[a] : 0.0;
}

double ProfileScanner::department_txns(std::uint32_t d) const {
    return d < dept_txns_.size() ? dept_txns_[d] : 0.0;
}

// ----------------------------------------------------------------------------
// Rolling statistics
// ----------------------------------------------------------------------------

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double pos = q * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

struct Moments {
    double mean = 0, m2 = 0, m3 = 0, m4 = 0;
};

Moments central_moments(std::span<const double> w) {
    Moments m;
    const double n = static_cast<double>(w.size());
    for (double v : w) m.mean += v;
    m.mean /= n;
    for (double v : w) {
        const double d = v - m.mean;
        m.m2 += d * d;
        m.m3 += d * d * d;
        m.m4 += d * d * d * d;
    }
    m.m2 /= n;
    m.m3 /= n;
    m.m4 /= n;
    return m;
}

}  // namespace

double rolling_stat(std::span<const double> window, RollingStat stat) {
    if (window.empty()) throw ContractError("rolling_stat: empty window");
    switch (stat) {
        case RollingStat::Mean: {
            double s = 0;
            for (double v : window) s += v;
            return s / static_cast<double>(window.size());
        }
        case RollingStat::Median:
        case RollingStat::Q25:
        case RollingStat::Q75: {
            std::vector<double> sorted(window.begin(), window.end());
            std::sort(sorted.begin(), sorted.end());
            const double q = stat == RollingStat::Median ? 0.5
                             : stat == RollingStat::Q25  ? 0.25
                                                         : 0.75;
            return quantile_sorted(sorted, q);
        }
        case RollingStat::Variance:
            return central_moments(window).m2;
        case RollingStat::Skewness: {
            const Moments m = central_moments(window);
            return m.m2 > 0.0 ? m.m3 / std::pow(m.m2, 1.5) : 0.0;
        }
        case RollingStat::Kurtosis: {
            const Moments m = central_moments(window);
            return m.m2 > 0.0 ? m.m4 / (m.m2 * m.m2) - 3.0 : 0.0;
        }
    }
    throw ContractError("rolling_stat: bad stat");
}

std::optional<double> rolling_offset(std::span<const double> series, int target_week, int window,
                                     int lag, RollingStat stat) {
    const int end = target_week - lag;       // inclusive
    const int begin = end - window + 1;
    if (begin < 0 || end >= static_cast<int>(series.size())) return std::nullopt;
    return rolling_stat(series.subspan(static_cast<std::size_t>(begin),
                                       static_cast<std::size_t>(window)),
                        stat);
}

// ----------------------------------------------------------------------------
// Assembly
// ----------------------------------------------------------------------------

namespace {

/// Train-split vocabulary: entity level -> code, 0 reserved for unknown.
class Vocab {
public:
    int encode_or_add(const std::string& level) {
        auto it = map_.find(level);
        if (it != map_.end()) return it->second;
        int code = static_cast<int>(map_.size()) + 1;
        map_.emplace(level, code);
        return code;
    }
    int encode(const std::string& level) const {
        auto it = map_.find(level);
        return it == map_.end() ? 0 : it->second;
    }
    int cardinality() const { return static_cast<int>(map_.size()) + 1; }

private:
    std::unordered_map<std::string, int> map_;
};

struct WindowStats {
    std::array<double, 7> value;  // indexed like kRollingStats
};

WindowStats all_stats(std::span<const double> w) {
    WindowStats out;
    std::vector<double> sorted(w.begin(), w.end());
    std::sort(sorted.begin(), sorted.end());
    const Moments m = central_moments(w);
    out.value[0] = m.mean;
    out.value[1] = quantile_sorted(sorted, 0.5);
    out.value[2] = quantile_sorted(sorted, 0.25);
    out.value[3] = quantile_sorted(sorted, 0.75);
    out.value[4] = m.m2;
    out.value[5] = m.m2 > 0.0 ? m.m3 / std::pow(m.m2, 1.5) : 0.0;
    out.value[6] = m.m2 > 0.0 ? m.m4 / (m.m2 * m.m2) - 3.0 : 0.0;
    return out;
}

}  // namespace

FeatureBundle assemble_features(const TransactionLog& log, const SplitPanel& panel,
                                const ConsumerAttributes& attrs, const FeatureParams& params) {
    const int W = panel.weeks.n_weeks;
    FeatureBundle bundle;
    FeatureSchema& schema = bundle.schema;

    // --- static item attributes (first-seen mapping) ---
    std::vector<int> item_aisle(log.item_count(), -1), item_dept(log.item_count(), -1);
    for (const Transaction& t : log.transactions) {
        if (item_aisle[t.item] < 0) {
            item_aisle[t.item] = static_cast<int>(t.aisle);
            item_dept[t.item] = static_cast<int>(t.department);
        }
    }

    // --- vocabularies from train rows only ---
    Vocab v_consumer, v_item, v_aisle, v_dept, v_sex, v_marital, v_location;
    const auto& train_rows = panel.split_rows(Split::Train);
    for (const PanelRow& r : train_rows) {
        const ConsumerItemSeries& s = panel.series[r.series];
        v_consumer.encode_or_add(log.consumer_ids[s.consumer]);
        v_item.encode_or_add(log.item_ids[s.item]);
        v_aisle.encode_or_add(log.aisle_ids[static_cast<std::size_t>(item_aisle[s.item])]);
        v_dept.encode_or_add(log.department_ids[static_cast<std::size_t>(item_dept[s.item])]);
        auto a = attrs.find(log.consumer_ids[s.consumer]);
        if (a != attrs.end()) {
            v_sex.encode_or_add(a->second.sex);
            v_marital.encode_or_add(a->second.marital_status);
            v_location.encode_or_add(a->second.location);
        }
    }

    // --- schema ---
    auto cat = [&](const char* name, FeatureGroup g, FeatureRole role, int card) {
        schema.categoricals.push_back({name, g, role, card});
    };
    cat("consumer", FeatureGroup::StaticCategorical, FeatureRole::Entity, v_consumer.cardinality());
    cat("item", FeatureGroup::StaticCategorical, FeatureRole::Entity, v_item.cardinality());
    cat("aisle", FeatureGroup::StaticCategorical, FeatureRole::Entity, v_aisle.cardinality());
    cat("department", FeatureGroup::StaticCategorical, FeatureRole::Entity, v_dept.cardinality());
    cat("sex", FeatureGroup::StaticCategorical, FeatureRole::StaticAttr, v_sex.cardinality());
    cat("marital_status", FeatureGroup::StaticCategorical, FeatureRole::StaticAttr,
        v_marital.cardinality());
    cat("location", FeatureGroup::StaticCategorical, FeatureRole::StaticAttr,
        v_location.cardinality());
    cat("week_of_year", FeatureGroup::TemporalCategorical, FeatureRole::Datetime, 53);
    cat("month", FeatureGroup::TemporalCategorical, FeatureRole::Datetime, 13);
    cat("quarter", FeatureGroup::TemporalCategorical, FeatureRole::Datetime, 5);

    auto cont = [&](const std::string& name, FeatureGroup g, FeatureRole role) {
        schema.continuous.push_back({name, g, role, 0.0, 0.0});
    };
    cont("dt_sin_phase", FeatureGroup::TemporalContinuous, FeatureRole::Datetime);
    cont("dt_cos_phase", FeatureGroup::TemporalContinuous, FeatureRole::Datetime);
    cont("dt_trend", FeatureGroup::TemporalContinuous, FeatureRole::Datetime);
    cont("c_age", FeatureGroup::StaticContinuous, FeatureRole::StaticAttr);
    cont("c_weight", FeatureGroup::StaticContinuous, FeatureRole::StaticAttr);
    const char* profile_names[] = {
        "c_orders",       "c_weeks_since_last",  "c_weeks_since_first", "c_mean_basket",
        "c_distinct_items", "c_active_weeks",    "c_mean_gap",          "i_txns",
        "i_consumers",    "i_reorder_rate",      "i_mean_cart_pos",     "ci_orders",
        "ci_weeks_since_last", "ci_weeks_since_first", "ci_mean_gap",   "ci_streak",
        "ci_reorder_rate", "ci_reorder_freq",    "ci_mean_cart_pos",    "a_txns",
        "d_txns"};
    for (const char* n : profile_names)
        cont(n, FeatureGroup::TemporalContinuous, FeatureRole::Profile);
    const char* reg_names[] = {"ind", "orders", "basket"};
    for (const char* reg : reg_names)
        for (int win : params.windows)
            for (int lag : params.lags)
                for (RollingStat st : kRollingStats)
                    cont("roll_" + std::string(reg) + "_w" + std::to_string(win) + "_l" +
                             std::to_string(lag) + "_" + rolling_stat_name(st),
                         FeatureGroup::TemporalContinuous, FeatureRole::Rolling);

    const int n_cat = static_cast<int>(schema.categoricals.size());
    const int n_cont = static_cast<int>(schema.continuous.size());

    // --- raw temporal channels ---
    const std::size_t n_series = panel.series.size();
    std::vector<std::vector<double>> ch_ind(n_series), ch_orders(n_series);
    for (std::size_t s = 0; s < n_series; ++s) {
        ch_ind[s].assign(static_cast<std::size_t>(W), 0.0);
        ch_orders[s].assign(static_cast<std::size_t>(W), 0.0);
        const ConsumerItemSeries& cs = panel.series[s];
        for (int w = cs.first_week; w < W; ++w)
            ch_ind[s][static_cast<std::size_t>(w)] = cs.label_at(w);
    }
    std::vector<std::vector<double>> ch_basket(log.consumer_count());
    for (auto& v : ch_basket) v.assign(static_cast<std::size_t>(W), 0.0);
    {
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> series_of;
        for (std::size_t s = 0; s < n_series; ++s)
            series_of[{panel.series[s].consumer, panel.series[s].item}] = s;
        for (const Transaction& t : log.transactions) {
            const int w = panel.weeks.week_of(t.date);
            if (w < 0 || w >= W) continue;
            ch_basket[t.consumer][static_cast<std::size_t>(w)] += 1.0;
            auto it = series_of.find({t.consumer, t.item});
            if (it != series_of.end()) ch_orders[it->second][static_cast<std::size_t>(w)] += 1.0;
        }
    }

    // --- allocate split matrices, group rows by week ---
    struct RowRef {
        int split;
        Eigen::Index row;
    };
    std::vector<std::vector<RowRef>> rows_by_week(static_cast<std::size_t>(W));
    for (int si = 0; si < kSplitCount; ++si) {
        const auto& rows = panel.rows[static_cast<std::size_t>(si)];
        FeatureMatrix& m = bundle.splits[static_cast<std::size_t>(si)];
        m.split = split_name(static_cast<Split>(si));
        m.keys.resize(rows.size());
        m.cats.resize(static_cast<Eigen::Index>(rows.size()), n_cat);
        m.cont.resize(static_cast<Eigen::Index>(rows.size()), n_cont);
        m.labels.resize(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const ConsumerItemSeries& s = panel.series[rows[r].series];
            m.keys[r] = {rows[r].series, s.consumer, s.item, rows[r].week};
            m.labels[static_cast<Eigen::Index>(r)] = rows[r].label;
            rows_by_week[rows[r].week].push_back({si, static_cast<Eigen::Index>(r)});
        }
    }

    // --- sweep weeks, fill raw values ---
    ProfileScanner scanner(log, panel.weeks);
    const int ix_sex = schema.cat_index("sex");
    std::vector<double> window_buf;
    for (int w = 0; w < W; ++w) {
        if (rows_by_week[static_cast<std::size_t>(w)].empty()) continue;
        scanner.advance_to(w);
        const DatetimeFeatures dt = datetime_features(w, panel.weeks);
        for (const RowRef& ref : rows_by_week[static_cast<std::size_t>(w)]) {
            FeatureMatrix& m = bundle.splits[static_cast<std::size_t>(ref.split)];
            const RowKey& key = m.keys[static_cast<std::size_t>(ref.row)];
            const std::string& consumer_id = log.consumer_ids[key.consumer];

            // categoricals
            Eigen::Index r = ref.row;
            m.cats(r, 0) = v_consumer.encode(consumer_id);
            m.cats(r, 1) = v_item.encode(log.item_ids[key.item]);
            m.cats(r, 2) =
                v_aisle.encode(log.aisle_ids[static_cast<std::size_t>(item_aisle[key.item])]);
            m.cats(r, 3) =
                v_dept.encode(log.department_ids[static_cast<std::size_t>(item_dept[key.item])]);
            auto a = attrs.find(consumer_id);
            if (a != attrs.end()) {
                m.cats(r, ix_sex) = v_sex.encode(a->second.sex);
                m.cats(r, ix_sex + 1) = v_marital.encode(a->second.marital_status);
                m.cats(r, ix_sex + 2) = v_location.encode(a->second.location);
            } else {
                m.cats(r, ix_sex) = 0;
                m.cats(r, ix_sex + 1) = 0;
                m.cats(r, ix_sex + 2) = 0;
            }
            m.cats(r, 7) = dt.week_of_year + 1;
            m.cats(r, 8) = dt.month + 1;
            m.cats(r, 9) = dt.quarter + 1;

            // continuous
            int c = 0;
            m.cont(r, c++) = dt.sin_phase;
            m.cont(r, c++) = dt.cos_phase;
            m.cont(r, c++) = dt.trend;
            if (a != attrs.end()) {
                m.cont(r, c++) = a->second.age;
                m.cont(r, c++) = a->second.weight;
            } else {
                m.cont(r, c++) = kMissing;
                m.cont(r, c++) = kMissing;
            }
            const ConsumerProfile cp = scanner.consumer(key.consumer);
            m.cont(r, c++) = cp.orders;
            m.cont(r, c++) = cp.weeks_since_last;
            m.cont(r, c++) = cp.weeks_since_first;
            m.cont(r, c++) = cp.mean_basket;
            m.cont(r, c++) = cp.distinct_items;
            m.cont(r, c++) = cp.active_weeks;
            m.cont(r, c++) = cp.mean_gap;
            const ItemProfile ip = scanner.item(key.item);
            m.cont(r, c++) = ip.txns;
            m.cont(r, c++) = ip.consumers;
            m.cont(r, c++) = ip.reorder_rate;
            m.cont(r, c++) = ip.mean_cart_pos;
            const PairProfile pp = scanner.pair(key.consumer, key.item);
            m.cont(r, c++) = pp.orders;
            m.cont(r, c++) = pp.weeks_since_last;
            m.cont(r, c++) = pp.weeks_since_first;
            m.cont(r, c++) = pp.mean_gap;
            m.cont(r, c++) = pp.streak;
            m.cont(r, c++) = pp.reorder_rate;
            m.cont(r, c++) = pp.reorder_freq;
            m.cont(r, c++) = pp.mean_cart_pos;
            m.cont(r, c++) = scanner.aisle_txns(static_cast<std::uint32_t>(item_aisle[key.item]));
            m.cont(r, c++) =
                scanner.department_txns(static_cast<std::uint32_t>(item_dept[key.item]));

            // rolling offsets
            const std::vector<double>* regs[3] = {&ch_ind[key.series], &ch_orders[key.series],
                                                  &ch_basket[key.consumer]};
            for (const auto* reg : regs) {
                for (int win : params.windows) {
                    for (int lag : params.lags) {
                        const int end = w - lag;
                        const int begin = end - win + 1;
                        if (begin < 0) {
                            for (int k = 0; k < 7; ++k) m.cont(r, c++) = kMissing;
                        } else {
                            const WindowStats st = all_stats(
                                std::span<const double>(reg->data() + begin,
                                                        static_cast<std::size_t>(win)));
                            for (int k = 0; k < 7; ++k) m.cont(r, c++) = st.value[k];
                        }
                    }
                }
            }
        }
    }

    // --- standardization with train-split moments ---
    FeatureMatrix& train = bundle.splits[0];
    for (int c = 0; c < n_cont; ++c) {
        double sum = 0.0, sum2 = 0.0;
        Eigen::Index n = 0;
        for (Eigen::Index r = 0; r < train.n(); ++r) {
            const double v = train.cont(r, c);
            if (std::isnan(v)) continue;
            sum += v;
            sum2 += v * v;
            ++n;
        }
        double mean = n > 0 ? sum / static_cast<double>(n) : 0.0;
        double var = n > 0 ? std::max(0.0, sum2 / static_cast<double>(n) - mean * mean) : 0.0;
        double sd = std::sqrt(var);
        schema.continuous[static_cast<std::size_t>(c)].mean = mean;
        schema.continuous[static_cast<std::size_t>(c)].stddev = sd;
        for (auto& m : bundle.splits) {
            for (Eigen::Index r = 0; r < m.n(); ++r) {
                double& v = m.cont(r, c);
                v = (std::isnan(v) || sd == 0.0) ? 0.0 : (v - mean) / sd;
            }
        }
    }

    // --- sequence channels (standardized with train-week moments) ---
    SeqStore& seq = bundle.seq;
    seq.n_weeks = W;
    seq.window = schema.seq_window;
    const int train_lo = panel.split_lo(Split::Train), train_hi = panel.split_hi(Split::Train);
    std::vector<double> dt_sin(static_cast<std::size_t>(W)), dt_cos(static_cast<std::size_t>(W)),
        dt_trend(static_cast<std::size_t>(W));
    for (int w = 0; w < W; ++w) {
        const DatetimeFeatures dt = datetime_features(w, panel.weeks);
        dt_sin[static_cast<std::size_t>(w)] = dt.sin_phase;
        dt_cos[static_cast<std::size_t>(w)] = dt.cos_phase;
        dt_trend[static_cast<std::size_t>(w)] = dt.trend;
    }
    struct ChannelDef {
        const char* name;
        int shift;
    };
    const ChannelDef defs[6] = {{"seq_ind", 1},    {"seq_orders", 1}, {"seq_basket", 1},
                                {"seq_sin", 0},    {"seq_cos", 0},    {"seq_trend", 0}};
    auto channel_value = [&](int ch, std::size_t s, int w) -> double {
        switch (ch) {
            case 0: return ch_ind[s][static_cast<std::size_t>(w)];
            case 1: return ch_orders[s][static_cast<std::size_t>(w)];
            case 2: return ch_basket[panel.series[s].consumer][static_cast<std::size_t>(w)];
            case 3: return dt_sin[static_cast<std::size_t>(w)];
            case 4: return dt_cos[static_cast<std::size_t>(w)];
            default: return dt_trend[static_cast<std::size_t>(w)];
        }
    };
    for (int ch = 0; ch < 6; ++ch) {
        double sum = 0.0, sum2 = 0.0;
        std::int64_t n = 0;
        for (std::size_t s = 0; s < n_series; ++s) {
            for (int w = train_lo; w <= train_hi; ++w) {
                const double v = channel_value(ch, s, w);
                sum += v;
                sum2 += v * v;
                ++n;
            }
        }
        const double mean = n > 0 ? sum / static_cast<double>(n) : 0.0;
        const double sd =
            n > 0 ? std::sqrt(std::max(0.0, sum2 / static_cast<double>(n) - mean * mean)) : 0.0;
        schema.seq_channels.push_back({defs[ch].name, defs[ch].shift, mean, sd});
        seq.shifts.push_back(defs[ch].shift);
    }
    seq.per_series.resize(n_series);
    for (std::size_t s = 0; s < n_series; ++s) {
        Eigen::MatrixXd& m = seq.per_series[s];
        m.resize(6, W);
        for (int ch = 0; ch < 6; ++ch) {
            const double mean = schema.seq_channels[static_cast<std::size_t>(ch)].mean;
            const double sd = schema.seq_channels[static_cast<std::size_t>(ch)].stddev;
            for (int w = 0; w < W; ++w)
                m(ch, w) = sd == 0.0 ? 0.0 : (channel_value(ch, s, w) - mean) / sd;
        }
    }
    return bundle;
}

void SeqStore::gather(std::uint32_t series, int target_week,
                      Eigen::Ref<Eigen::MatrixXd> out) const {
    const Eigen::MatrixXd& m = per_series[series];
    const int T = static_cast<int>(out.rows());
    const int C = static_cast<int>(out.cols());
    for (int pos = 0; pos < T; ++pos) {
        const int w = target_week - (T - 1 - pos);
        for (int ch = 0; ch < C; ++ch) {
            const int src = w - shifts[static_cast<std::size_t>(ch)];
            out(pos, ch) = (src < 0 || src >= n_weeks) ? 0.0 : m(ch, src);
        }
    }
}

}  // namespace nextbuy
