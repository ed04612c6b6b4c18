#include "gpvol/blackscholes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "gpvol/errors.hpp"

namespace gpvol {

std::string_view to_string(OptionKind kind) { return kind == OptionKind::Call ? "call" : "put"; }

OptionKind option_kind_from_string(std::string_view text) {
    if (text == "call" || text == "C" || text == "c") return OptionKind::Call;
    if (text == "put" || text == "P" || text == "p") return OptionKind::Put;
    throw ParseError("unknown option kind '" + std::string(text) + "'");
}

namespace bs {
namespace {

void check_inputs(const PricingInputs& in) {
    if (!(in.spot > 0.0) || !(in.strike > 0.0) || !(in.tau > 0.0) || !(in.sigma > 0.0) ||
        !std::isfinite(in.rate) || !std::isfinite(in.spot) || !std::isfinite(in.strike) ||
        !std::isfinite(in.tau) || !std::isfinite(in.sigma)) {
        throw std::domain_error("Black-Scholes inputs require S, K, tau, sigma > 0 and finite");
    }
}

struct D12 {
    double d1;
    double d2;
};

D12 d_terms(const PricingInputs& in) {
    const double vol_sqrt_t = in.sigma * std::sqrt(in.tau);
    const double d1 =
        (std::log(in.spot / in.strike) + (in.rate + 0.5 * in.sigma * in.sigma) * in.tau) / vol_sqrt_t;
    return {d1, d1 - vol_sqrt_t};
}

}  // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 * 0.5); }

double norm_pdf(double x) { return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2); }

double price(const PricingInputs& in) {
    check_inputs(in);
    const auto [d1, d2] = d_terms(in);
    const double df_strike = in.strike * std::exp(-in.rate * in.tau);
    if (in.kind == OptionKind::Call) return in.spot * norm_cdf(d1) - df_strike * norm_cdf(d2);
    return df_strike * norm_cdf(-d2) - in.spot * norm_cdf(-d1);
}

Greeks greeks(const PricingInputs& in) {
    check_inputs(in);
    const auto [d1, d2] = d_terms(in);
    (void)d2;
    const double sqrt_t = std::sqrt(in.tau);
    const double pdf = norm_pdf(d1);
    Greeks g;
    g.delta = in.kind == OptionKind::Call ? norm_cdf(d1) : -norm_cdf(-d1);
    g.gamma = pdf / (in.spot * in.sigma * sqrt_t);
    g.vega = in.spot * pdf * sqrt_t;
    return g;
}

PriceBounds price_bounds(double spot, double strike, double rate, double tau, OptionKind kind) {
    const double df_strike = strike * std::exp(-rate * tau);
    if (kind == OptionKind::Call) return {std::max(spot - df_strike, 0.0), spot};
    return {std::max(df_strike - spot, 0.0), df_strike};
}

double implied_vol(double market_price, double spot, double strike, double rate, double tau,
                   OptionKind kind) {
    if (!std::isfinite(market_price) || !(spot > 0.0) || !(strike > 0.0) || !(tau > 0.0)) {
        throw NoRootError("implied_vol: invalid contract or price");
    }
    const PriceBounds bounds = price_bounds(spot, strike, rate, tau, kind);
    if (!(market_price > bounds.lower) || !(market_price < bounds.upper)) {
        throw NoRootError("implied_vol: price " + std::to_string(market_price) +
                          " outside no-arbitrage bounds (" + std::to_string(bounds.lower) + ", " +
                          std::to_string(bounds.upper) + ")");
    }

    // Solve for the out-of-the-money counterpart in log-price space.
    const double df_strike = strike * std::exp(-rate * tau);
    OptionKind otm_kind = kind;
    double target = market_price;
    if (kind == OptionKind::Call && spot > df_strike) {
        otm_kind = OptionKind::Put;
        target = market_price - (spot - df_strike);
    } else if (kind == OptionKind::Put && df_strike > spot) {
        otm_kind = OptionKind::Call;
        target = market_price + (spot - df_strike);
    }
    if (!(target > 0.0)) throw NoRootError("implied_vol: no time value left in price");
    const double log_target = std::log(target);

    PricingInputs in{spot, strike, rate, tau, 0.0, otm_kind};
    auto objective = [&](double sigma, double& slope) {
        in.sigma = sigma;
        const double p = price(in);
        const double v = greeks(in).vega;
        if (!(p > 0.0)) {
            slope = 0.0;
            return -std::numeric_limits<double>::infinity();
        }
        slope = v / p;
        return std::log(p) - log_target;
    };

    double lo = kSigmaMin;
    double hi = kSigmaMax;
    double slope = 0.0;
    const double f_lo = objective(lo, slope);
    if (f_lo > 0.0) throw NoRootError("implied_vol: price below the minimum-volatility price");
    if (f_lo == 0.0) return lo;
    const double f_hi = objective(hi, slope);
    if (f_hi < 0.0) throw NoRootError("implied_vol: price above the maximum-volatility price");
    if (f_hi == 0.0) return hi;

    double sigma = std::clamp(0.3, lo, hi);
    double step_prev = hi - lo;
    double step = step_prev;
    double f = objective(sigma, slope);
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        if (f == 0.0) break;
        if (f < 0.0) lo = sigma; else hi = sigma;

        const bool newton_ok = slope > 0.0 && std::isfinite(f) &&
                               (sigma - f / slope) > lo && (sigma - f / slope) < hi &&
                               std::abs(2.0 * f) < std::abs(step_prev * slope);
        step_prev = step;
        if (newton_ok) {
            step = f / slope;
        } else {
            step = sigma - 0.5 * (lo + hi);
        }
        const double next = sigma - step;
        if (next == sigma || std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * sigma) {
            sigma = next;
            f = objective(sigma, slope);
            break;
        }
        sigma = next;
        f = objective(sigma, slope);
        if (iter + 1 == kMaxIterations) {
            in.kind = kind;
            in.sigma = sigma;
            if (std::abs(price(in) - market_price) > 1e-10 * strike) {
                throw ConvergenceError("implied_vol: iteration cap reached");
            }
        }
    }

    in.kind = kind;
    in.sigma = sigma;
    if (!(std::abs(price(in) - market_price) <= 1e-10 * strike)) {
        throw ConvergenceError("implied_vol: residual above tolerance");
    }
    return sigma;
}

}  // namespace bs
}  // namespace gpvol
