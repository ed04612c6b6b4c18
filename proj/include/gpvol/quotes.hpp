#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "gpvol/blackscholes.hpp"

namespace gpvol {

using Date = std::chrono::year_month_day;

/// Parses YYYY-MM-DD. Throws ParseError.
Date parse_date(std::string_view text);
std::string format_date(const Date& d);
/// Calendar days from `from` to `to`.
int days_between(const Date& from, const Date& to);
Date add_days(const Date& d, int days);

inline constexpr double kDaysPerYear = 365.0;

/// One dated market observation of one option contract.
struct OptionQuote {
    Date quote_date{};
    Date expiry_date{};
    double strike = 0.0;
    double bid = 0.0;
    double ask = 0.0;
    double underlying = 0.0;
    double rate = 0.0;
    OptionKind kind = OptionKind::Call;

    int days_to_expiry() const { return days_between(quote_date, expiry_date); }
    /// ACT/365 year fraction.
    double tau() const { return days_to_expiry() / kDaysPerYear; }
    double moneyness() const { return underlying / strike; }

    friend bool operator==(const OptionQuote&, const OptionQuote&) = default;
};

/// (bid + ask) / 2
double mid_price(const OptionQuote& q);

/// Throws ValidationError naming the violated invariant.
void validate(const OptionQuote& q);

/// Parses the quotes CSV (header: quote_date, expiry_date, strike, bid, ask,
/// underlying, rate, kind; any column order, extra columns ignored).
/// Throws ParseError (row and column named) or ValidationError.
std::vector<OptionQuote> parse_quotes(std::string_view text);

/// Writes the canonical quotes CSV. Numbers use the shortest round-trip form.
std::string write_quotes(const std::vector<OptionQuote>& quotes);

struct FilterConfig {
    int min_days = 10;
    double min_quote = 0.125;
    double moneyness_low = 0.90;
    double moneyness_high = 1.15;
};

struct FilterCounts {
    std::size_t input = 0;
    std::size_t short_maturity = 0;
    std::size_t low_quote = 0;
    std::size_t deep_moneyness = 0;
    std::size_t arbitrage = 0;
    std::size_t kept = 0;
};

/// Drops, in order: maturity below min_days, mid below min_quote, S/K outside
/// the band, and prices violating the Merton lower bound
/// (call: C >= S - K e^{-r tau}; put: P >= K e^{-r tau} - S).
std::vector<OptionQuote> apply_filters(const std::vector<OptionQuote>& quotes,
                                       const FilterConfig& cfg = {},
                                       FilterCounts* counts = nullptr);

enum class MoneynessClass { OTM, ATM, ITM };
enum class MaturityClass { ST, MT, LT };

struct QuoteClass {
    MoneynessClass moneyness = MoneynessClass::ATM;
    MaturityClass maturity = MaturityClass::ST;

    friend bool operator==(const QuoteClass&, const QuoteClass&) = default;
};

std::string_view to_string(MoneynessClass c);
std::string_view to_string(MaturityClass c);

MoneynessClass classify_moneyness(double moneyness);
MaturityClass classify_maturity(int days_to_expiry);
QuoteClass classify(const OptionQuote& q);

/// Nine classes in (OTM, ATM, ITM) x (ST, MT, LT) order; index = 3*m + t.
inline constexpr std::size_t kClassCount = 9;
std::size_t class_index(const QuoteClass& c);
QuoteClass class_from_index(std::size_t index);

enum class Scheme { TS, MTM, Global };
std::string_view to_string(Scheme s);
Scheme scheme_from_string(std::string_view text);

template <typename T>
struct NamedSet {
    std::string name;
    std::vector<T> items;
};

/// Training samples plus named test sets for one division scheme.
///
/// TS: samples S1..S(k-1), test set Sk. MTM: samples C1L..C9L, test sets
/// C1T..C9T. Global: the union of both, 18 samples and 10 test sets.
template <typename T>
struct BasicPartition {
    Scheme scheme = Scheme::TS;
    std::vector<NamedSet<T>> samples;
    std::vector<NamedSet<T>> test_sets;

    const NamedSet<T>* find(std::string_view name) const {
        for (const auto& s : samples) if (s.name == name) return &s;
        for (const auto& s : test_sets) if (s.name == name) return &s;
        return nullptr;
    }
};

using Partition = BasicPartition<OptionQuote>;

/// TS: k equal contiguous-by-date samples (remainder after k*floor(n/k) dropped).
/// MTM: per class, date-sorted first ceil(n/2) quotes train, the rest test.
/// Throws ValidationError when there are fewer quotes than k.
Partition build_partition(const std::vector<OptionQuote>& quotes, Scheme scheme, std::size_t k = 10);

/// Model inputs and the implied-volatility target of one quote.
struct Record {
    double price_over_strike = 0.0;
    double moneyness = 0.0;
    double tau = 0.0;
    double target = 0.0;

    friend bool operator==(const Record&, const Record&) = default;
};

struct RecordConversion {
    std::vector<Record> records;
    std::size_t dropped = 0;  // quotes without an implied volatility
};

RecordConversion to_records(const std::vector<OptionQuote>& quotes);

using RecordSet = NamedSet<Record>;
using RecordPartition = BasicPartition<Record>;

struct RecordPartitionConversion {
    RecordPartition partition;
    std::size_t dropped = 0;
};

RecordPartitionConversion to_records(const Partition& partition);

/// Concatenation of every training sample and test set (the enlarged sample).
/// Global partitions count each quote once via the class half.
std::vector<Record> enlarged_sample(const RecordPartition& partition);

}  // namespace gpvol
