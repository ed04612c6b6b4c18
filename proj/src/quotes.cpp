#include "gpvol/quotes.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>

#include "gpvol/csv.hpp"
#include "gpvol/errors.hpp"

namespace gpvol {

Date parse_date(std::string_view text) {
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    auto bad = [&] { return ParseError("invalid ISO-8601 date '" + std::string(text) + "'"); };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
    auto num = [&](std::size_t pos, std::size_t len, auto& out) {
        const auto res = std::from_chars(text.data() + pos, text.data() + pos + len, out);
        if (res.ec != std::errc() || res.ptr != text.data() + pos + len) throw bad();
    };
    num(0, 4, y);
    num(5, 2, m);
    num(8, 2, d);
    const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) throw bad();
    return date;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

int days_between(const Date& from, const Date& to) {
    return static_cast<int>((std::chrono::sys_days{to} - std::chrono::sys_days{from}).count());
}

Date add_days(const Date& d, int days) { return Date{std::chrono::sys_days{d} + std::chrono::days{days}}; }

double mid_price(const OptionQuote& q) { return 0.5 * (q.bid + q.ask); }

void validate(const OptionQuote& q) {
    if (!(q.bid <= q.ask)) throw ValidationError("bid exceeds ask");
    if (!(q.bid >= 0.0)) throw ValidationError("negative bid");
    if (!(q.strike > 0.0)) throw ValidationError("strike must be positive");
    if (!(q.underlying > 0.0)) throw ValidationError("underlying must be positive");
    if (!(q.rate >= 0.0)) throw ValidationError("rate must be non-negative");
    if (!(q.expiry_date > q.quote_date)) throw ValidationError("expiry must follow the quote date");
}

namespace {

constexpr std::array<std::string_view, 8> kColumns{"quote_date", "expiry_date", "strike", "bid",
                                                   "ask",        "underlying",  "rate",   "kind"};

double parse_number(std::string_view cell) {
    double value = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || !std::isfinite(value)) {
        throw ParseError("not a finite number");
    }
    return value;
}

}  // namespace

std::vector<OptionQuote> parse_quotes(std::string_view text) {
    const csv::Table table = csv::parse(text);
    std::array<std::size_t, kColumns.size()> col{};
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
        const auto idx = table.column(kColumns[c]);
        if (!idx) throw ParseError("quotes CSV: missing column '" + std::string(kColumns[c]) + "'");
        col[c] = *idx;
    }

    std::vector<OptionQuote> quotes;
    quotes.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::size_t row_number = r + 2;  // 1-based, header is row 1
        auto cell = [&](std::size_t c) -> std::string_view {
            if (col[c] >= row.size()) {
                throw ParseError("quotes CSV row " + std::to_string(row_number) + ", column '" +
                                 std::string(kColumns[c]) + "': missing value");
            }
            return row[col[c]];
        };
        OptionQuote q;
        std::size_t c = 0;
        try {
            q.quote_date = parse_date(cell(c = 0));
            q.expiry_date = parse_date(cell(c = 1));
            q.strike = parse_number(cell(c = 2));
            q.bid = parse_number(cell(c = 3));
            q.ask = parse_number(cell(c = 4));
            q.underlying = parse_number(cell(c = 5));
            q.rate = parse_number(cell(c = 6));
            q.kind = option_kind_from_string(cell(c = 7));
        } catch (const ParseError& e) {
            const std::string what = e.what();
            if (what.rfind("quotes CSV row", 0) == 0) throw;
            throw ParseError("quotes CSV row " + std::to_string(row_number) + ", column '" +
                             std::string(kColumns[c]) + "': " + what);
        }
        try {
            validate(q);
        } catch (const ValidationError& e) {
            throw ValidationError("quotes CSV row " + std::to_string(row_number) + ": " + e.what());
        }
        quotes.push_back(q);
    }
    return quotes;
}

std::string write_quotes(const std::vector<OptionQuote>& quotes) {
    std::string out = "quote_date,expiry_date,strike,bid,ask,underlying,rate,kind\n";
    for (const auto& q : quotes) {
        out += format_date(q.quote_date);
        out += ',';
        out += format_date(q.expiry_date);
        for (double v : {q.strike, q.bid, q.ask, q.underlying, q.rate}) {
            out += ',';
            out += csv::format_number(v);
        }
        out += ',';
        out += to_string(q.kind);
        out += '\n';
    }
    return out;
}

namespace {

bool violates_merton_bound(const OptionQuote& q) {
    const double discounted_strike = q.strike * std::exp(-q.rate * q.tau());
    const double mid = mid_price(q);
    if (q.kind == OptionKind::Call) return mid < q.underlying - discounted_strike;
    return mid < discounted_strike - q.underlying;
}

}  // namespace

std::vector<OptionQuote> apply_filters(const std::vector<OptionQuote>& quotes, const FilterConfig& cfg,
                                       FilterCounts* counts) {
    FilterCounts local;
    local.input = quotes.size();
    std::vector<OptionQuote> kept;
    kept.reserve(quotes.size());
    for (const auto& q : quotes) {
        if (q.days_to_expiry() < cfg.min_days) {
            ++local.short_maturity;
        } else if (mid_price(q) < cfg.min_quote) {
            ++local.low_quote;
        } else if (q.moneyness() < cfg.moneyness_low || q.moneyness() > cfg.moneyness_high) {
            ++local.deep_moneyness;
        } else if (violates_merton_bound(q)) {
            ++local.arbitrage;
        } else {
            kept.push_back(q);
        }
    }
    local.kept = kept.size();
    if (counts) *counts = local;
    return kept;
}

std::string_view to_string(MoneynessClass c) {
    switch (c) {
        case MoneynessClass::OTM: return "OTM";
        case MoneynessClass::ATM: return "ATM";
        case MoneynessClass::ITM: return "ITM";
    }
    return "?";
}

std::string_view to_string(MaturityClass c) {
    switch (c) {
        case MaturityClass::ST: return "ST";
        case MaturityClass::MT: return "MT";
        case MaturityClass::LT: return "LT";
    }
    return "?";
}

MoneynessClass classify_moneyness(double moneyness) {
    if (moneyness < 0.98) return MoneynessClass::OTM;
    if (moneyness < 1.03) return MoneynessClass::ATM;
    return MoneynessClass::ITM;
}

MaturityClass classify_maturity(int days_to_expiry) {
    if (days_to_expiry < 60) return MaturityClass::ST;
    if (days_to_expiry <= 180) return MaturityClass::MT;
    return MaturityClass::LT;
}

QuoteClass classify(const OptionQuote& q) {
    return {classify_moneyness(q.moneyness()), classify_maturity(q.days_to_expiry())};
}

std::size_t class_index(const QuoteClass& c) {
    return 3 * static_cast<std::size_t>(c.moneyness) + static_cast<std::size_t>(c.maturity);
}

QuoteClass class_from_index(std::size_t index) {
    return {static_cast<MoneynessClass>(index / 3), static_cast<MaturityClass>(index % 3)};
}

std::string_view to_string(Scheme s) {
    switch (s) {
        case Scheme::TS: return "ts";
        case Scheme::MTM: return "mtm";
        case Scheme::Global: return "global";
    }
    return "?";
}

Scheme scheme_from_string(std::string_view text) {
    if (text == "ts") return Scheme::TS;
    if (text == "mtm") return Scheme::MTM;
    if (text == "global") return Scheme::Global;
    throw ConfigError("unknown division scheme '" + std::string(text) + "' (expected ts|mtm|global)");
}

namespace {

std::vector<OptionQuote> date_sorted(std::vector<OptionQuote> quotes) {
    std::stable_sort(quotes.begin(), quotes.end(),
                     [](const OptionQuote& a, const OptionQuote& b) { return a.quote_date < b.quote_date; });
    return quotes;
}

void add_time_series(Partition& p, const std::vector<OptionQuote>& sorted, std::size_t k) {
    const std::size_t per_sample = sorted.size() / k;
    for (std::size_t s = 0; s < k; ++s) {
        NamedSet<OptionQuote> set{"S" + std::to_string(s + 1), {}};
        const auto first = sorted.begin() + static_cast<std::ptrdiff_t>(s * per_sample);
        set.items.assign(first, first + static_cast<std::ptrdiff_t>(per_sample));
        if (s + 1 == k && k > 1) {
            p.test_sets.push_back(std::move(set));
        } else {
            p.samples.push_back(std::move(set));
        }
    }
}

void add_classes(Partition& p, const std::vector<OptionQuote>& sorted) {
    std::array<std::vector<OptionQuote>, kClassCount> classes;
    for (const auto& q : sorted) classes[class_index(classify(q))].push_back(q);
    for (std::size_t c = 0; c < kClassCount; ++c) {
        const auto& members = classes[c];
        const std::size_t n_train = (members.size() + 1) / 2;
        const auto split = members.begin() + static_cast<std::ptrdiff_t>(n_train);
        p.samples.push_back({"C" + std::to_string(c + 1) + "L", {members.begin(), split}});
        p.test_sets.push_back({"C" + std::to_string(c + 1) + "T", {split, members.end()}});
    }
}

}  // namespace

Partition build_partition(const std::vector<OptionQuote>& quotes, Scheme scheme, std::size_t k) {
    if (k == 0) throw ValidationError("build_partition: k must be positive");
    if (scheme != Scheme::MTM && quotes.size() < k) {
        throw ValidationError("build_partition: " + std::to_string(quotes.size()) +
                              " quotes cannot fill " + std::to_string(k) + " samples");
    }
    if (quotes.empty()) throw ValidationError("build_partition: no quotes");

    const std::vector<OptionQuote> sorted = date_sorted(quotes);
    Partition p;
    p.scheme = scheme;
    switch (scheme) {
        case Scheme::TS:
            add_time_series(p, sorted, k);
            break;
        case Scheme::MTM:
            add_classes(p, sorted);
            break;
        case Scheme::Global: {
            Partition ts;
            add_time_series(ts, sorted, k);
            Partition mtm;
            add_classes(mtm, sorted);
            p.samples = std::move(ts.samples);
            p.samples.insert(p.samples.end(), mtm.samples.begin(), mtm.samples.end());
            p.test_sets = std::move(ts.test_sets);
            p.test_sets.insert(p.test_sets.end(), mtm.test_sets.begin(), mtm.test_sets.end());
            break;
        }
    }
    return p;
}

RecordConversion to_records(const std::vector<OptionQuote>& quotes) {
    RecordConversion out;
    out.records.reserve(quotes.size());
    for (const auto& q : quotes) {
        const double mid = mid_price(q);
        try {
            const double sigma = bs::implied_vol(mid, q.underlying, q.strike, q.rate, q.tau(), q.kind);
            out.records.push_back({mid / q.strike, q.moneyness(), q.tau(), sigma});
        } catch (const NoRootError&) {
            ++out.dropped;
        } catch (const ConvergenceError&) {
            ++out.dropped;
        }
    }
    return out;
}

RecordPartitionConversion to_records(const Partition& partition) {
    RecordPartitionConversion out;
    out.partition.scheme = partition.scheme;
    auto convert = [&](const std::vector<NamedSet<OptionQuote>>& sets, std::vector<RecordSet>& dest) {
        for (const auto& s : sets) {
            RecordConversion conv = to_records(s.items);
            out.dropped += conv.dropped;
            dest.push_back({s.name, std::move(conv.records)});
        }
    };
    convert(partition.samples, out.partition.samples);
    convert(partition.test_sets, out.partition.test_sets);
    return out;
}

std::vector<Record> enlarged_sample(const RecordPartition& partition) {
    auto is_class_set = [](const std::string& name) { return !name.empty() && name.front() == 'C'; };
    const bool global = partition.scheme == Scheme::Global;
    std::vector<Record> all;
    auto append = [&](const std::vector<RecordSet>& sets) {
        for (const auto& s : sets) {
            if (global && !is_class_set(s.name)) continue;
            all.insert(all.end(), s.items.begin(), s.items.end());
        }
    };
    append(partition.samples);
    append(partition.test_sets);
    return all;
}

}  // namespace gpvol
