#include "nextbuy/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace nextbuy {

namespace {

class Interner {
public:
    std::uint32_t code(const std::string& id) {
        auto it = map_.find(id);
        if (it != map_.end()) return it->second;
        std::uint32_t c = static_cast<std::uint32_t>(ids_.size());
        map_.emplace(id, c);
        ids_.push_back(id);
        return c;
    }
    std::vector<std::string> take() { return std::move(ids_); }

private:
    std::unordered_map<std::string, std::uint32_t> map_;
    std::vector<std::string> ids_;
};

}  // namespace

std::uint32_t TransactionLog::consumer_code(const std::string& id) const {
    auto it = std::find(consumer_ids.begin(), consumer_ids.end(), id);
    if (it == consumer_ids.end()) throw ContractError("unknown consumer id: " + id);
    return static_cast<std::uint32_t>(it - consumer_ids.begin());
}

std::uint32_t TransactionLog::item_code(const std::string& id) const {
    auto it = std::find(item_ids.begin(), item_ids.end(), id);
    if (it == item_ids.end()) throw ContractError("unknown item id: " + id);
    return static_cast<std::uint32_t>(it - item_ids.begin());
}

FormatConfig FormatConfig::from_keyvals(const std::map<std::string, std::string>& kv) {
    FormatConfig f;
    for (const auto& [key, value] : kv) {
        if (key == "delimiter") {
            if (value.size() != 1) throw ConfigError("delimiter must be one character");
            f.delimiter = value[0];
        } else if (key == "col.consumer") {
            f.col_consumer = value;
        } else if (key == "col.item") {
            f.col_item = value;
        } else if (key == "col.order") {
            f.col_order = value;
        } else if (key == "col.date") {
            f.col_date = value;
        } else if (key == "col.cart_pos") {
            f.col_cart_pos = value;
        } else if (key == "col.aisle") {
            f.col_aisle = value;
        } else if (key == "col.department") {
            f.col_department = value;
        } else if (key == "date.mode") {
            if (value == "iso")
                f.date_mode = DateMode::Iso;
            else if (value == "offset")
                f.date_mode = DateMode::Offset;
            else
                throw ConfigError("date.mode must be iso or offset, got '" + value + "'");
        } else if (key == "date.epoch") {
            f.epoch = Date::parse_iso(value);
        } else if (key == "date.min") {
            f.history_min = Date::parse_iso(value);
        } else if (key == "date.max") {
            f.history_max = Date::parse_iso(value);
        } else {
            throw ConfigError("unknown format key: " + key);
        }
    }
    return f;
}

FormatConfig FormatConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open format config: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("bad config line: " + t);
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return from_keyvals(kv);
}

TransactionLog parse_transactions(const std::string& path, const FormatConfig& format) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open input file: " + path);

    std::string header;
    if (!std::getline(in, header)) throw SchemaError("empty file, header row required: " + path);
    if (!header.empty() && header.back() == '\r') header.pop_back();

    std::vector<std::string> cols = split(header, format.delimiter);
    auto col_index = [&](const std::string& name) {
        for (std::size_t i = 0; i < cols.size(); ++i)
            if (trim(cols[i]) == name) return static_cast<std::ptrdiff_t>(i);
        throw SchemaError("missing column '" + name + "' in " + path);
    };
    const std::ptrdiff_t ix_consumer = col_index(format.col_consumer);
    const std::ptrdiff_t ix_item = col_index(format.col_item);
    const std::ptrdiff_t ix_order = col_index(format.col_order);
    const std::ptrdiff_t ix_date = col_index(format.col_date);
    const std::ptrdiff_t ix_cart = col_index(format.col_cart_pos);
    const std::ptrdiff_t ix_aisle = col_index(format.col_aisle);
    const std::ptrdiff_t ix_dept = col_index(format.col_department);

    std::vector<RawEvent> rows;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        std::vector<std::string> f = split(line, format.delimiter);
        if (f.size() != cols.size())
            throw ParseError("expected " + std::to_string(cols.size()) + " fields, got " +
                                 std::to_string(f.size()),
                             lineno);

        RawEvent r;
        r.consumer = trim(f[ix_consumer]);
        r.item = trim(f[ix_item]);
        r.order = trim(f[ix_order]);
        r.aisle = trim(f[ix_aisle]);
        r.department = trim(f[ix_dept]);
        if (r.consumer.empty() || r.item.empty() || r.order.empty() || r.aisle.empty() ||
            r.department.empty())
            throw ParseError("empty identifier field", lineno);

        const std::string date_field = trim(f[ix_date]);
        if (format.date_mode == FormatConfig::DateMode::Iso) {
            try {
                r.date = Date::parse_iso(date_field);
            } catch (const ParseError& e) {
                throw ParseError(e.what(), lineno);
            }
        } else {
            std::int64_t off;
            if (!parse_i64(date_field, off) || off < 0)
                throw ParseError("invalid day offset '" + date_field + "'", lineno);
            r.date = format.epoch.plus_days(off);
        }
        if ((format.history_min && r.date < *format.history_min) ||
            (format.history_max && *format.history_max < r.date))
            throw ParseError("date " + r.date.to_iso() + " outside configured history window",
                             lineno);

        std::int64_t cart;
        if (!parse_i64(trim(f[ix_cart]), cart) || cart < 1)
            throw ParseError("add-to-cart order must be a positive integer, got '" +
                                 trim(f[ix_cart]) + "'",
                             lineno);
        r.cart_pos = static_cast<std::uint32_t>(cart);
        rows.push_back(std::move(r));
    }
    return build_log(std::move(rows));
}

TransactionLog build_log(std::vector<RawEvent> events) {
    TransactionLog log;
    Interner consumers;
    for (const RawEvent& e : events) consumers.code(e.consumer);
    log.consumer_ids = consumers.take();

    std::unordered_map<std::string, std::uint32_t> consumer_code;
    for (std::uint32_t i = 0; i < log.consumer_ids.size(); ++i)
        consumer_code[log.consumer_ids[i]] = i;

    std::stable_sort(events.begin(), events.end(), [&](const RawEvent& a, const RawEvent& b) {
        std::uint32_t ca = consumer_code[a.consumer], cb = consumer_code[b.consumer];
        if (ca != cb) return ca < cb;
        if (a.date != b.date) return a.date < b.date;
        if (a.order != b.order) return a.order < b.order;
        return a.cart_pos < b.cart_pos;
    });

    // Remaining codes follow first appearance in the sorted sequence; this
    // makes parse(write(log)) reproduce the log exactly.
    Interner items, orders, aisles, departments;
    log.transactions.reserve(events.size());
    for (const RawEvent& r : events) {
        Transaction t;
        t.consumer = consumer_code[r.consumer];
        t.item = items.code(r.item);
        t.order = orders.code(r.order);
        t.aisle = aisles.code(r.aisle);
        t.department = departments.code(r.department);
        t.date = r.date;
        t.cart_pos = r.cart_pos;
        log.transactions.push_back(t);
    }
    log.item_ids = items.take();
    log.order_ids = orders.take();
    log.aisle_ids = aisles.take();
    log.department_ids = departments.take();
    return log;
}

void write_transactions(const TransactionLog& log, const std::string& path,
                        const FormatConfig& format) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write: " + path);
    const char d = format.delimiter;
    out << format.col_consumer << d << format.col_item << d << format.col_order << d
        << format.col_date << d << format.col_cart_pos << d << format.col_aisle << d
        << format.col_department << '\n';
    for (const Transaction& t : log.transactions) {
        out << log.consumer_ids[t.consumer] << d << log.item_ids[t.item] << d
            << log.order_ids[t.order] << d;
        if (format.date_mode == FormatConfig::DateMode::Iso)
            out << t.date.to_iso();
        else
            out << (t.date.days - format.epoch.days);
        out << d << t.cart_pos << d << log.aisle_ids[t.aisle] << d
            << log.department_ids[t.department] << '\n';
    }
    if (!out) throw ConfigError("write failed: " + path);
}

ValidationReport validate_log(const TransactionLog& log) {
    ValidationReport rep;
    rep.transaction_count = log.transactions.size();
    rep.consumer_count = log.consumer_count();
    rep.item_count = log.item_count();
    rep.order_count = log.order_count();

    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> pair_counts;
    bool first = true;
    for (const Transaction& t : log.transactions) {
        ++pair_counts[{t.order, t.item}];
        if (first || t.date < rep.date_min) rep.date_min = t.date;
        if (first || rep.date_max < t.date) rep.date_max = t.date;
        first = false;
    }
    for (const auto& [key, n] : pair_counts) {
        if (n > 1) {
            ++rep.duplicates;
            rep.duplicate_pairs.emplace_back(log.order_ids[key.first], log.item_ids[key.second]);
        }
    }
    return rep;
}

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    os << "transactions=" << transaction_count << " consumers=" << consumer_count
       << " items=" << item_count << " orders=" << order_count << " duplicates=" << duplicates;
    if (transaction_count > 0)
        os << " dates=" << date_min.to_iso() << ".." << date_max.to_iso();
    return os.str();
}

}  // namespace nextbuy
