#include "gpvol/synthmarket.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "gpvol/csv.hpp"
#include "gpvol/errors.hpp"

namespace gpvol {

double TrueVol::operator()(double moneyness, int days_to_expiry) const {
    const double tau = days_to_expiry / kDaysPerYear;
    switch (model) {
        case VolModel::Constant: return smile.level;
        case VolModel::Smile: return smile(moneyness, tau);
        case VolModel::ClassSmile: {
            const QuoteClass c{classify_moneyness(moneyness), classify_maturity(days_to_expiry)};
            return per_class[class_index(c)](moneyness, tau);
        }
    }
    return smile.level;
}

void MarketSpec::validate() const {
    if (!(spot > 0.0)) throw ConfigError("market spec: spot must be positive");
    if (!(rate >= 0.0)) throw ConfigError("market spec: rate must be non-negative");
    if (!(path_vol >= 0.0)) throw ConfigError("market spec: path_vol must be non-negative");
    if (days < 0) throw ConfigError("market spec: days must be non-negative");
    if (strikes.empty()) throw ConfigError("market spec: strikes must be non-empty");
    if (expiries.empty()) throw ConfigError("market spec: expiries must be non-empty");
    if (kinds.empty()) throw ConfigError("market spec: kinds must be non-empty");
    if (!(spread >= 0.0)) throw ConfigError("market spec: spread must be non-negative");
    for (double k : strikes) {
        if (!(k > 0.0)) throw ConfigError("market spec: strikes must be positive");
    }
    for (int e : expiries) {
        if (e <= 0) throw ConfigError("market spec: expiries must be positive day counts");
    }
}

namespace {

double to_double(std::string_view key, std::string_view text) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw ConfigError("market spec key '" + std::string(key) + "': invalid number '" + std::string(text) + "'");
    }
    return v;
}

template <typename T>
T to_integer(std::string_view key, std::string_view text) {
    T v{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw ConfigError("market spec key '" + std::string(key) + "': invalid integer '" + std::string(text) + "'");
    }
    return v;
}

std::vector<std::string_view> split(std::string_view text) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(',', start), text.size());
        std::string_view item = text.substr(start, end - start);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (!item.empty()) parts.push_back(item);
        start = end + 1;
    }
    return parts;
}

Smile parse_smile(std::string_view key, std::string_view text) {
    const auto parts = split(text);
    if (parts.size() != 4) {
        throw ConfigError("market spec key '" + std::string(key) + "': expected level,slope,curvature,term");
    }
    return {to_double(key, parts[0]), to_double(key, parts[1]), to_double(key, parts[2]), to_double(key, parts[3])};
}

}  // namespace

MarketSpec parse_market_spec(std::string_view text) {
    kv::Map entries;
    try {
        entries = kv::parse(text);
    } catch (const ParseError& e) {
        throw ConfigError(std::string("market spec: ") + e.what());
    }

    MarketSpec spec;
    bool path_vol_set = false;
    for (const auto& [key, value] : entries) {
        if (key == "spot") spec.spot = to_double(key, value);
        else if (key == "rate") spec.rate = to_double(key, value);
        else if (key == "path_vol") {
            spec.path_vol = to_double(key, value);
            path_vol_set = true;
        } else if (key == "days") spec.days = to_integer<int>(key, value);
        else if (key == "start_date") {
            try {
                spec.start_date = parse_date(value);
            } catch (const ParseError& e) {
                throw ConfigError(std::string("market spec key 'start_date': ") + e.what());
            }
        } else if (key == "strikes") {
            spec.strikes.clear();
            for (auto s : split(value)) spec.strikes.push_back(to_double(key, s));
        } else if (key == "expiries") {
            spec.expiries.clear();
            for (auto s : split(value)) spec.expiries.push_back(to_integer<int>(key, s));
        } else if (key == "kinds") {
            spec.kinds.clear();
            for (auto s : split(value)) {
                try {
                    spec.kinds.push_back(option_kind_from_string(s));
                } catch (const std::exception& e) {
                    throw ConfigError(std::string("market spec key 'kinds': ") + e.what());
                }
            }
        } else if (key == "spread") spec.spread = to_double(key, value);
        else if (key == "weekdays_only") {
            if (value == "true" || value == "1") spec.weekdays_only = true;
            else if (value == "false" || value == "0") spec.weekdays_only = false;
            else throw ConfigError("market spec key 'weekdays_only': expected true|false");
        } else if (key == "seed") spec.seed = to_integer<std::uint64_t>(key, value);
        else if (key == "vol_model") {
            if (value == "constant") spec.true_vol.model = VolModel::Constant;
            else if (value == "smile") spec.true_vol.model = VolModel::Smile;
            else if (value == "class_smile") spec.true_vol.model = VolModel::ClassSmile;
            else throw ConfigError("market spec key 'vol_model': expected constant|smile|class_smile");
        } else if (key == "vol" || key == "vol_level") spec.true_vol.smile.level = to_double(key, value);
        else if (key == "vol_slope") spec.true_vol.smile.slope = to_double(key, value);
        else if (key == "vol_curvature") spec.true_vol.smile.curvature = to_double(key, value);
        else if (key == "vol_term") spec.true_vol.smile.term = to_double(key, value);
        else if (key.starts_with("vol_")) {
            bool matched = false;
            for (std::size_t c = 0; c < kClassCount && !matched; ++c) {
                const QuoteClass qc = class_from_index(c);
                const std::string name =
                    "vol_" + std::string(to_string(qc.moneyness)) + "_" + std::string(to_string(qc.maturity));
                if (key == name) {
                    spec.true_vol.per_class[c] = parse_smile(key, value);
                    matched = true;
                }
            }
            if (!matched) throw ConfigError("unknown market spec key '" + key + "'");
        } else {
            throw ConfigError("unknown market spec key '" + key + "'");
        }
    }
    if (!path_vol_set) spec.path_vol = spec.true_vol.smile.level;
    spec.validate();
    return spec;
}

std::vector<double> gbm_path(double spot, double rate, double sigma, int days, Rng& rng) {
    const double dt = 1.0 / kDaysPerYear;
    const double drift = (rate - 0.5 * sigma * sigma) * dt;
    const double diffusion = sigma * std::sqrt(dt);
    std::vector<double> path;
    path.reserve(static_cast<std::size_t>(days) + 1);
    path.push_back(spot);
    for (int t = 0; t < days; ++t) path.push_back(path.back() * std::exp(drift + diffusion * rng.normal()));
    return path;
}

std::vector<double> gbm_path(const MarketSpec& spec, Rng& rng) {
    return gbm_path(spec.spot, spec.rate, spec.path_vol, spec.days, rng);
}

namespace {

bool is_weekday(const Date& d) {
    const std::chrono::weekday w{std::chrono::sys_days(d)};
    return w != std::chrono::Saturday && w != std::chrono::Sunday;
}

}  // namespace

std::vector<OptionQuote> quote_surface(const std::vector<double>& path, const MarketSpec& spec) {
    spec.validate();
    std::vector<OptionQuote> quotes;
    for (std::size_t t = 0; t < path.size(); ++t) {
        const Date date = add_days(spec.start_date, static_cast<int>(t));
        if (spec.weekdays_only && !is_weekday(date)) continue;
        const double spot = path[t];
        for (int expiry_day : spec.expiries) {
            const int days_left = expiry_day - static_cast<int>(t);
            if (days_left <= 0) continue;
            const double tau = days_left / kDaysPerYear;
            for (double strike : spec.strikes) {
                const double sigma = spec.true_vol(spot / strike, days_left);
                if (!(sigma > 0.0)) {
                    throw ConfigError("market spec: true volatility is not positive at S/K=" +
                                      csv::format_number(spot / strike) + ", days=" + std::to_string(days_left));
                }
                for (OptionKind kind : spec.kinds) {
                    const double lower = bs::price_bounds(spot, strike, spec.rate, tau, kind).lower;
                    const double mid = std::max(bs::price({spot, strike, spec.rate, tau, sigma, kind}), lower);
                    OptionQuote q;
                    q.quote_date = date;
                    q.expiry_date = add_days(spec.start_date, expiry_day);
                    q.strike = strike;
                    q.bid = std::max(mid - spec.spread, 0.0);
                    q.ask = mid + spec.spread;
                    q.underlying = spot;
                    q.rate = spec.rate;
                    q.kind = kind;
                    while (mid_price(q) < lower) q.ask = std::nextafter(q.ask, HUGE_VAL);
                    quotes.push_back(q);
                }
            }
        }
    }
    return quotes;
}

std::vector<OptionQuote> generate_quotes(const MarketSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    return quote_surface(gbm_path(spec, rng), spec);
}

HedgePath make_hedge_path(const HedgeScenario& s, Rng& rng) {
    if (s.horizon_days < 0 || s.horizon_days >= s.expiry_days) {
        throw ConfigError("hedge scenario: horizon must end before expiry");
    }
    const std::vector<double> spots = gbm_path(s.spot, s.rate, s.sigma, s.horizon_days, rng);
    HedgePath path;
    path.id = "gbm";
    path.kind = s.kind;
    path.strike = s.strike;
    path.companion_strike = s.companion_strike;
    path.expiry = add_days(s.start_date, s.expiry_days);
    path.spacing = Spacing::Calendar;
    path.points.reserve(spots.size());
    for (std::size_t t = 0; t < spots.size(); ++t) {
        const double tau = (s.expiry_days - static_cast<int>(t)) / kDaysPerYear;
        const double v = bs::price({spots[t], s.strike, s.rate, tau, s.sigma, s.kind});
        const double v1 = bs::price({spots[t], s.companion_strike, s.rate, tau, s.sigma, s.kind});
        path.points.push_back({add_days(s.start_date, static_cast<int>(t)), spots[t], s.rate, v, v1});
    }
    return path;
}

}  // namespace gpvol
