#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gpvol/hedging.hpp"
#include "gpvol/quotes.hpp"
#include "gpvol/rng.hpp"

namespace gpvol {

/// sigma(m, tau) = level + slope (m - 1) + curvature (m - 1)^2 + term tau
struct Smile {
    double level = 0.2;
    double slope = 0.0;
    double curvature = 0.0;
    double term = 0.0;

    double operator()(double moneyness, double tau) const {
        const double x = moneyness - 1.0;
        return level + slope * x + curvature * x * x + term * tau;
    }
};

enum class VolModel { Constant, Smile, ClassSmile };

/// Volatility surface used to price synthetic quotes. ClassSmile picks one of
/// nine smiles by the quote's moneyness-maturity class.
struct TrueVol {
    VolModel model = VolModel::Constant;
    Smile smile;
    std::array<Smile, kClassCount> per_class{};

    double operator()(double moneyness, int days_to_expiry) const;
};

struct MarketSpec {
    double spot = 1000.0;
    double rate = 0.02;
    double path_vol = 0.2;  // GBM volatility of the index
    TrueVol true_vol;
    int days = 250;         // calendar days simulated after start_date
    Date start_date{std::chrono::year{2003}, std::chrono::month{1}, std::chrono::day{2}};
    std::vector<double> strikes;
    std::vector<int> expiries;  // calendar days after start_date
    std::vector<OptionKind> kinds{OptionKind::Call};
    double spread = 0.0;        // half-spread in currency
    bool weekdays_only = true;
    std::uint64_t seed = 1;

    /// Throws ConfigError.
    void validate() const;
};

/// Flat key=value spec. Keys: spot, rate, path_vol, days, start_date,
/// strikes (comma list), expiries (comma list of days), kinds (call,put),
/// spread, weekdays_only, seed, vol_model (constant|smile|class_smile),
/// vol (constant), vol_level/vol_slope/vol_curvature/vol_term (smile),
/// vol_<OTM|ATM|ITM>_<ST|MT|LT> = level,slope,curvature,term (class_smile).
/// Throws ConfigError on unknown keys or bad values.
MarketSpec parse_market_spec(std::string_view text);

/// Daily index levels S_0..S_days with
/// S_{t+1} = S_t exp((r - sigma^2/2) dt + sigma sqrt(dt) z), dt = 1/365.
std::vector<double> gbm_path(double spot, double rate, double sigma, int days, Rng& rng);
std::vector<double> gbm_path(const MarketSpec& spec, Rng& rng);

/// BS-priced quotes for every (date, expiry, strike, kind) with the expiry
/// still ahead. bid = max(mid - spread, 0), ask = mid + spread. Mid prices
/// are lifted to the no-arbitrage lower bound if rounding puts them below it.
std::vector<OptionQuote> quote_surface(const std::vector<double>& path, const MarketSpec& spec);

/// Seeded path and surface in one call.
std::vector<OptionQuote> generate_quotes(const MarketSpec& spec);

/// One BS-consistent hedging scenario on a fresh GBM path.
struct HedgeScenario {
    double spot = 100.0;
    double strike = 100.0;
    double companion_strike = 105.0;
    double rate = 0.0;
    double sigma = 0.2;
    int horizon_days = 56;
    int expiry_days = 90;
    OptionKind kind = OptionKind::Call;
    Date start_date{std::chrono::year{2003}, std::chrono::month{1}, std::chrono::day{2}};
};

/// Daily calendar path whose option values are BS prices at `sigma`.
HedgePath make_hedge_path(const HedgeScenario& scenario, Rng& rng);

}  // namespace gpvol
