#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gpvol/blackscholes.hpp"
#include "gpvol/gptree.hpp"
#include "gpvol/kernels.hpp"
#include "gpvol/quotes.hpp"

namespace gpvol {

inline constexpr double kGpVolFloor = 1e-4;
inline constexpr double kDegenerateThreshold = 1e-12;

/// Where hedge ratios get their volatility: the market implied vol of each
/// contract, or a GP model evaluated at (price/K, S/K, tau).
struct VolSource {
    enum class Kind { BsImplied, GpModel };

    Kind kind = Kind::BsImplied;
    ExprTree tree;

    static VolSource bs_implied() { return {}; }
    static VolSource gp_model(ExprTree t) { return {Kind::GpModel, std::move(t)}; }
};

struct HedgeFactors {
    double delta = 0.0;
    double gamma = 0.0;
    double vega = 0.0;
    double sigma = 0.0;
};

/// Greeks at the volatility chosen by `src`. GP output is floored at
/// kGpVolFloor. Throws NoRootError/ConvergenceError for bs_implied prices that
/// do not invert.
HedgeFactors hedge_factors(const VolSource& src, double spot, double strike, double rate, double tau,
                           OptionKind kind, double market_price);

struct HedgePoint {
    Date date{};
    double spot = 0.0;
    double rate = 0.0;
    double value = 0.0;            // mid of the hedged option
    double companion_value = 0.0;  // mid of the companion (same expiry, strike K1)
};

/// Date spacing of the underlying observations; decides what "7-day" means.
enum class Spacing { Calendar, Trading };

struct HedgePath {
    std::string id;
    OptionKind kind = OptionKind::Call;
    double strike = 0.0;
    double companion_strike = 0.0;
    Date expiry{};
    Spacing spacing = Spacing::Calendar;
    std::vector<HedgePoint> points;

    double tau_at(std::size_t i) const;
    /// Class of the hedged option on the first date.
    QuoteClass quote_class() const;
};

/// Throws ValidationError: empty path, non-increasing dates, a date past
/// expiry, non-positive spot/strike, or negative prices.
void validate(const HedgePath& path);

/// Observation stride for a rebalancing frequency given in days: calendar
/// paths step `days`, trading-day paths step days * 5 / 7 (7 days -> 5).
std::size_t stride_for(const HedgePath& path, int days);

/// Points 0, stride, 2*stride, ... plus the final point.
HedgePath subsample(const HedgePath& path, std::size_t stride);

enum class Strategy { Delta, DeltaGamma, DeltaVega };
std::string_view to_string(Strategy s);
/// Accepts delta | gamma | vega (and delta_gamma, delta_vega).
Strategy strategy_from_string(std::string_view text);

struct HedgeOutcome {
    double terminal = 0.0;  // P(tau)
    double initial = 0.0;   // P(0), zero by construction
    std::size_t dates = 0;  // N: observation dates on the path, endpoints included
    // Per rebalance date t_0..t_{n-1}:
    std::vector<double> underlying_units;   // x(t), or Delta_V(t) for the delta strategy
    std::vector<double> companion_units;    // y(t); empty for the delta strategy
    std::vector<double> delta_residual;     // model delta of the whole position
    std::vector<double> second_residual;    // gamma or vega of the position; empty for delta

    double abs_error() const { return terminal < 0 ? -terminal : terminal; }
};

/// Delta hedge: long the option, Delta_V = -(model delta) units of the
/// underlying, money account beta. Rebalances at every point but the last,
/// which only values the position. Accrual uses the previous date's rate.
HedgeOutcome run_delta(const HedgePath& path, const VolSource& src);

/// Delta-gamma hedge with the companion option. Throws DegenerateHedgeError
/// naming the date when the companion gamma falls below kDegenerateThreshold.
HedgeOutcome run_delta_gamma(const HedgePath& path, const VolSource& src);

/// Delta-vega hedge with the companion option; same degeneracy rule on vega.
HedgeOutcome run_delta_vega(const HedgePath& path, const VolSource& src);

HedgeOutcome run_strategy(const HedgePath& path, Strategy s, const VolSource& src);

/// Per-option inputs of the tracking error.
struct ErrorSample {
    double abs_error = 0.0;
    std::size_t dates = 0;
    double initial_price = 0.0;  // V(0)
    double rate = 0.0;
    double maturity = 0.0;       // T, years
};

/// e^{-rT} |P(tau)| / (N V(0)); nullopt when V(0) = 0.
std::optional<double> option_error(const ErrorSample& s);

struct TrackingError {
    double mean = 0.0;
    std::size_t count = 0;
    std::size_t excluded = 0;  // V(0) = 0
};

/// Class average of option_error. count == 0 when nothing qualifies.
TrackingError tracking_error(std::span<const ErrorSample> samples);

struct ReportOptions {
    std::vector<Strategy> strategies{Strategy::Delta, Strategy::DeltaGamma, Strategy::DeltaVega};
    std::vector<int> frequencies{1, 7};
    bool baseline = true;  // include the BS-implied model
};

struct ReportCell {
    OptionKind kind = OptionKind::Call;
    QuoteClass cls;
    Strategy strategy = Strategy::Delta;
    std::string model;  // "BS" or "GP"
    int frequency = 1;
    double error = 0.0;
    std::size_t count = 0;
};

struct WinRate {
    OptionKind kind = OptionKind::Call;
    std::size_t cases = 0;
    std::size_t gp_wins = 0;

    double rate() const { return cases == 0 ? 0.0 : static_cast<double>(gp_wins) / static_cast<double>(cases); }
};

struct HedgeReport {
    std::vector<int> frequencies;
    std::vector<ReportCell> cells;
    std::vector<WinRate> win_rates;  // only when both models are present
    std::vector<std::string> notes;  // omitted classes, excluded or degenerate paths
};

/// Hedges every path under every (strategy, model, frequency) and averages
/// per class. `gp` may be empty for a baseline-only report. Paths are
/// simulated independently (in parallel for Execution::Parallel); the
/// aggregation is serial, so both modes give identical reports. A cell
/// where GP is strictly below BS is a GP win; ties are not.
HedgeReport build_report(std::span<const HedgePath> paths, const std::optional<VolSource>& gp,
                         const ReportOptions& options, Execution exec = Execution::Parallel);

/// Per option kind: cells with both a GP and a BS value, and how many GP
/// wins strictly.
std::vector<WinRate> win_rates(std::span<const ReportCell> cells);

/// Wide layout: kind,moneyness,strategy,model then one column per
/// (frequency, maturity class), followed by one win_rate row per kind.
std::string format_report_wide(const HedgeReport& report);
/// Long layout: kind,moneyness,maturity,strategy,model,frequency,error,count.
std::string format_report_long(const HedgeReport& report);
/// kind,cases,gp_wins,win_rate
std::string format_win_rates(const HedgeReport& report);
/// Parses format_report_long output back into cells.
std::vector<ReportCell> parse_report_long(std::string_view text);

/// Builds one path per hedged contract from a quote panel. The companion is
/// the same-kind, same-expiry contract with the nearest distinct strike
/// (lower strike on ties). Dates are those on which both contracts are
/// quoted; the horizon ends at the last such date. Contracts without a
/// companion or with fewer than two dates are reported in `skipped`.
struct PathSelection {
    std::vector<HedgePath> paths;
    std::vector<std::string> skipped;
};

struct ContractId {
    OptionKind kind = OptionKind::Call;
    double strike = 0.0;
    Date expiry{};
};

/// `contracts` restricts the hedged options; empty means every contract
/// that has quotes on the first quote date.
PathSelection build_hedge_paths(const std::vector<OptionQuote>& quotes, std::span<const ContractId> contracts,
                                Spacing spacing = Spacing::Trading);

}  // namespace gpvol
