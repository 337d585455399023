#ifndef NEXTBUY_COMMON_HPP
#define NEXTBUY_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nextbuy {

// ============================================================================
// Errors
// ============================================================================

/// Bad file contents or malformed rows (carries a line number when known).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t line = 0)
        : std::runtime_error(line ? msg + " (line " + std::to_string(line) + ")" : msg),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Input schema does not match what the caller declared.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration (bad split widths, missing paths, ...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller violated an operation's precondition.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Numerical failure during model training (divergence, non-finite gradient).
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ============================================================================
// Calendar dates
// ============================================================================

/// Calendar date stored as days since 1970-01-01 (proleptic Gregorian).
struct Date {
    std::int64_t days = 0;

    auto operator<=>(const Date&) const = default;

    Date plus_days(std::int64_t n) const { return Date{days + n}; }

    int year() const;
    int month() const;        // 1..12
    int day() const;          // 1..31
    int day_of_year() const;  // 1..366
    int weekday() const;      // 0 = Monday .. 6 = Sunday

    std::string to_iso() const;

    static Date from_ymd(int year, int month, int day);
    /// Parses "YYYY-MM-DD". Throws ParseError on malformed or invalid dates.
    static Date parse_iso(const std::string& text);
};

// ============================================================================
// Deterministic random streams
// ============================================================================

/// splitmix64 step; used for stateless hashing and seeding.
std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic 64-bit generator (xoshiro-free: splitmix stream).
/// Distributions are hand-rolled so results are identical on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return splitmix64(state_);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    /// Standard normal via Box-Muller.
    double normal();

    /// Derives an independent stream; stable under call order.
    Rng fork(std::uint64_t salt) const { return Rng(splitmix64(state_ ^ salt)); }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// ============================================================================
// Content hashing (change detection, schema identity)
// ============================================================================

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a(const std::string& s, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hash_hex(std::uint64_t h);

/// FNV-1a over a whole file's bytes. Throws ConfigError if unreadable.
std::uint64_t hash_file(const std::string& path);

// ============================================================================
// Small string/CSV helpers
// ============================================================================

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char delim);
bool parse_i64(const std::string& s, std::int64_t& out);
bool parse_f64(const std::string& s, double& out);

}  // namespace nextbuy

#endif
