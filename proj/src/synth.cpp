#include "nextbuy/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace nextbuy {

namespace {

std::string zero_pad(const char* prefix, int value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, value);
    return buf;
}

const char* kSexes[] = {"female", "male", "undisclosed"};
const char* kMarital[] = {"single", "married", "undisclosed"};
const char* kLocations[] = {"north", "south", "east", "west", "central"};

}  // namespace

SynthResult generate(const SynthConfig& cfg) {
    if (cfg.consumers <= 0 || cfg.items <= 0 || cfg.weeks <= 0 || cfg.items_per_consumer <= 0)
        throw ConfigError("synth: all counts must be positive");
    if (cfg.cadence_min < 1 || cfg.cadence_max < cfg.cadence_min)
        throw ConfigError("synth: cadence range invalid");

    SynthResult out;
    Rng master(cfg.seed);

    std::vector<RawEvent> events;
    const int activation_limit = std::max(1, static_cast<int>(cfg.weeks * cfg.activation_span));

    for (int c = 0; c < cfg.consumers; ++c) {
        Rng rng = master.fork(0x5EED0000ULL + static_cast<std::uint64_t>(c));
        const std::string consumer_id = zero_pad("c", c, 5);

        ConsumerAttribute attr;
        attr.age = 18.0 + std::floor(rng.uniform() * 62.0);
        attr.weight = 50.0 + std::floor(rng.uniform() * 60.0);
        attr.sex = kSexes[rng.below(3)];
        attr.marital_status = kMarital[rng.below(3)];
        attr.location = kLocations[rng.below(5)];
        const double season_phase = rng.uniform(0.0, 2.0 * M_PI);
        const int shop_day = static_cast<int>(rng.below(7));  // habitual weekday offset

        // Preferred item set for this consumer.
        const int span = 2 * cfg.items_per_consumer - 1;
        int n_pref = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(span)));
        n_pref = std::min(n_pref, cfg.items);
        std::set<int> pref;
        while (static_cast<int>(pref.size()) < n_pref)
            pref.insert(static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.items))));

        struct PairState {
            int item;
            int activation;
            int period;
            std::vector<double> propensity;
            std::vector<int> purchase_weeks;
        };
        std::vector<PairState> pairs;
        for (int item : pref) {
            PairState p;
            p.item = item;
            p.activation = static_cast<int>(rng.below(static_cast<std::uint64_t>(activation_limit)));
            p.period = cfg.cadence_min +
                       static_cast<int>(rng.below(
                           static_cast<std::uint64_t>(cfg.cadence_max - cfg.cadence_min + 1)));
            p.propensity.assign(cfg.weeks, 0.0);
            pairs.push_back(std::move(p));
        }

        // Weekly purchase process: deterministic cadence gate softened by
        // jitter, modulated by annual seasonality.
        for (PairState& p : pairs) {
            for (int w = p.activation; w < cfg.weeks; ++w) {
                const double season =
                    cfg.seasonality * std::sin(2.0 * M_PI * (w % 52) / 52.0 + season_phase);
                const bool scheduled = (w - p.activation) % p.period == 0;
                double prob = scheduled ? 1.0 - 0.6 * cfg.jitter + season
                                        : 0.35 * cfg.jitter + std::max(season, 0.0) * 0.25;
                prob = std::clamp(prob, 0.0, 1.0);
                p.propensity[w] = prob;
                if (rng.uniform() < prob) p.purchase_weeks.push_back(w);
            }
        }

        // Materialize weekly orders; reordered items lead the cart when the
        // decay rule fires.
        std::vector<std::vector<int>> weekly(cfg.weeks);
        std::map<int, int> seen_count;  // item -> prior purchases
        for (const PairState& p : pairs)
            for (int w : p.purchase_weeks) weekly[w].push_back(p.item);

        for (int w = 0; w < cfg.weeks; ++w) {
            if (weekly[w].empty()) continue;
            std::vector<int>& basket = weekly[w];
            std::sort(basket.begin(), basket.end());
            const bool ordered_rule = rng.uniform() < cfg.reorder_decay;
            if (ordered_rule) {
                std::stable_sort(basket.begin(), basket.end(), [&](int a, int b) {
                    return (seen_count[a] > 0) > (seen_count[b] > 0);
                });
            } else {
                for (std::size_t i = basket.size(); i > 1; --i)
                    std::swap(basket[i - 1], basket[rng.below(i)]);
            }
            const std::string order_id = consumer_id + "_w" + std::to_string(w);
            const Date date = cfg.epoch.plus_days(7LL * w + shop_day);
            for (std::size_t pos = 0; pos < basket.size(); ++pos) {
                const int item = basket[pos];
                const int aisle = item % cfg.aisles;
                RawEvent e;
                e.consumer = consumer_id;
                e.item = zero_pad("i", item, 4);
                e.order = order_id;
                e.aisle = zero_pad("a", aisle, 3);
                e.department = zero_pad("d", aisle % cfg.departments, 2);
                e.date = date;
                e.cart_pos = static_cast<std::uint32_t>(pos + 1);
                events.push_back(std::move(e));
                ++seen_count[item];
            }
        }

        bool any = false;
        for (const PairState& p : pairs) {
            if (p.purchase_weeks.empty()) continue;
            any = true;
            PairTruth t;
            t.consumer = consumer_id;
            t.item = zero_pad("i", p.item, 4);
            t.activation = p.activation;
            t.period = p.period;
            t.weekly_propensity = p.propensity;
            out.truth.pairs.push_back(std::move(t));
        }
        if (any) out.attributes[consumer_id] = attr;
    }

    out.log = build_log(std::move(events));
    out.truth.consumer_count = out.log.consumer_count();
    out.truth.item_count = out.log.item_count();
    out.truth.order_count = out.log.order_count();
    out.truth.transaction_count = out.log.transactions.size();
    return out;
}

void write_consumer_attributes(const ConsumerAttributes& attrs, const std::string& path) {
    std::ofstream outf(path, std::ios::trunc);
    if (!outf) throw ConfigError("cannot write: " + path);
    outf << "consumer_id,age,weight,sex,marital_status,location\n";
    for (const auto& [id, a] : attrs)
        outf << id << ',' << a.age << ',' << a.weight << ',' << a.sex << ',' << a.marital_status
             << ',' << a.location << '\n';
}

ConsumerAttributes read_consumer_attributes(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty attribute file: " + path);
    ConsumerAttributes attrs;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::vector<std::string> f = split(line, ',');
        if (f.size() != 6) throw ParseError("expected 6 fields", lineno);
        ConsumerAttribute a;
        if (!parse_f64(f[1], a.age) || !parse_f64(f[2], a.weight))
            throw ParseError("bad numeric attribute", lineno);
        a.sex = trim(f[3]);
        a.marital_status = trim(f[4]);
        a.location = trim(f[5]);
        attrs[trim(f[0])] = a;
    }
    return attrs;
}

}  // namespace nextbuy
