#ifndef NEXTBUY_INGEST_HPP
#define NEXTBUY_INGEST_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nextbuy/common.hpp"

namespace nextbuy {

/// One consumer-item purchase event. Entity fields are dense codes; the
/// owning TransactionLog maps them back to external ids.
struct Transaction {
    std::uint32_t consumer = 0;
    std::uint32_t item = 0;
    std::uint32_t order = 0;
    Date date;
    std::uint32_t cart_pos = 1;  // add-to-cart order, 1-based
    std::uint32_t aisle = 0;
    std::uint32_t department = 0;

    bool operator==(const Transaction&) const = default;
};

/// Canonical in-memory event log. Transactions are sorted by
/// (consumer, date, order id, cart position); dense codes are contiguous
/// from 0. Immutable once built, safe to share across threads.
struct TransactionLog {
    std::vector<Transaction> transactions;
    std::vector<std::string> consumer_ids;  // dense code -> external id
    std::vector<std::string> item_ids;
    std::vector<std::string> order_ids;
    std::vector<std::string> aisle_ids;
    std::vector<std::string> department_ids;

    std::size_t consumer_count() const { return consumer_ids.size(); }
    std::size_t item_count() const { return item_ids.size(); }
    std::size_t order_count() const { return order_ids.size(); }

    std::uint32_t consumer_code(const std::string& id) const;
    std::uint32_t item_code(const std::string& id) const;

    bool operator==(const TransactionLog&) const = default;
};

/// Column mapping and date handling for the delimited input format.
struct FormatConfig {
    char delimiter = ',';
    std::string col_consumer = "consumer_id";
    std::string col_item = "item_id";
    std::string col_order = "order_id";
    std::string col_date = "order_date";
    std::string col_cart_pos = "add_to_cart_order";
    std::string col_aisle = "aisle_id";
    std::string col_department = "department_id";
    enum class DateMode { Iso, Offset };
    DateMode date_mode = DateMode::Iso;
    Date epoch = Date::from_ymd(2019, 1, 7);  // used by Offset mode
    std::optional<Date> history_min;
    std::optional<Date> history_max;

    /// Reads `key = value` lines; `#` starts a comment. Unknown keys error.
    static FormatConfig from_file(const std::string& path);
    static FormatConfig from_keyvals(const std::map<std::string, std::string>& kv);
};

/// Per-log sanity summary; reporting only, never throws on content.
struct ValidationReport {
    std::size_t transaction_count = 0;
    std::size_t consumer_count = 0;
    std::size_t item_count = 0;
    std::size_t order_count = 0;
    std::size_t duplicates = 0;  // distinct (order,item) pairs seen more than once
    std::vector<std::pair<std::string, std::string>> duplicate_pairs;
    Date date_min;
    Date date_max;

    std::string to_string() const;
};

/// A purchase event with external ids, before canonicalization.
struct RawEvent {
    std::string consumer, item, order, aisle, department;
    Date date;
    std::uint32_t cart_pos = 1;
};

/// Canonicalizes raw events into a TransactionLog: consumer codes by first
/// appearance in `events`, rows sorted by (consumer, date, order id, cart
/// position), remaining codes by first appearance in the sorted sequence.
TransactionLog build_log(std::vector<RawEvent> events);

/// Parses a delimited transaction file into a canonical TransactionLog.
/// Fail-fast: a missing column throws SchemaError; a malformed row throws
/// ParseError with its line number. Consumer codes follow first appearance
/// in the file; item/order/aisle/department codes follow first appearance
/// in the canonical sorted sequence so that write + parse round-trips.
TransactionLog parse_transactions(const std::string& path, const FormatConfig& format);

/// Writes the log back to the tabular format (canonical row order).
void write_transactions(const TransactionLog& log, const std::string& path,
                        const FormatConfig& format);

ValidationReport validate_log(const TransactionLog& log);

}  // namespace nextbuy

#endif
