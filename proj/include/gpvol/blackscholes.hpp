#pragma once

#include <string_view>

namespace gpvol {

enum class OptionKind { Call, Put };

std::string_view to_string(OptionKind kind);
OptionKind option_kind_from_string(std::string_view text);

namespace bs {

/// Inputs to the Black-Scholes formula. S, K, tau and sigma must be positive.
struct PricingInputs {
    double spot = 0.0;
    double strike = 0.0;
    double rate = 0.0;
    double tau = 0.0;  // years to expiry
    double sigma = 0.0;
    OptionKind kind = OptionKind::Call;
};

/// Vega is per unit of volatility, not per percentage point.
struct Greeks {
    double delta = 0.0;
    double gamma = 0.0;
    double vega = 0.0;
};

double norm_cdf(double x);
double norm_pdf(double x);

/// European price without dividends.
/// Throws std::domain_error when an input invariant is violated.
double price(const PricingInputs& in);

Greeks greeks(const PricingInputs& in);

/// No-arbitrage price bounds (lower, upper) for the given contract.
struct PriceBounds {
    double lower = 0.0;
    double upper = 0.0;
};
PriceBounds price_bounds(double spot, double strike, double rate, double tau, OptionKind kind);

inline constexpr double kSigmaMin = 1e-6;
inline constexpr double kSigmaMax = 5.0;
inline constexpr int kMaxIterations = 100;

/// Volatility that reproduces `market_price`.
///
/// Newton steps on vega, safeguarded by a bisection bracket on
/// [kSigmaMin, kSigmaMax]. The result satisfies
/// |price(sigma) - market_price| <= 1e-10 * strike.
///
/// Throws NoRootError when the price is outside the open no-arbitrage
/// interval or outside the prices reachable on the bracket, and
/// ConvergenceError if the iteration cap is hit first.
double implied_vol(double market_price, double spot, double strike, double rate, double tau,
                   OptionKind kind);

}  // namespace bs
}  // namespace gpvol
