#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "gpvol/blackscholes.hpp"
#include "gpvol/gptree.hpp"

// Protected primitive semantics shared by the scalar and batch evaluators.
// Every function maps finite arguments to a finite result.
namespace gpvol::protected_ops {

/// Overflow saturates at the largest finite double; NaN cannot arise from
/// finite operands but maps to 0 regardless.
inline double saturate(double x) {
    constexpr double kMax = std::numeric_limits<double>::max();
    if (x != x) return 0.0;
    return std::clamp(x, -kMax, kMax);
}

inline double div(double x, double y) { return y == 0.0 ? 1.0 : saturate(x / y); }

inline double ln(double x) {
    const double a = std::abs(x);
    return a > 1e-12 ? std::log(a) : 0.0;
}

inline double exp(double x) { return std::exp(std::min(x, 80.0)); }

inline double sqrt(double x) { return std::sqrt(std::abs(x)); }

inline double ncdf(double x) { return bs::norm_cdf(x); }

inline double apply_unary(Op op, double x) {
    switch (op) {
        case Op::Ln: return ln(x);
        case Op::Exp: return exp(x);
        case Op::Sqrt: return sqrt(x);
        case Op::Cos: return std::cos(x);
        case Op::Sin: return std::sin(x);
        case Op::Ncdf: return ncdf(x);
        default: return x;
    }
}

inline double apply_binary(Op op, double x, double y) {
    switch (op) {
        case Op::Add: return saturate(x + y);
        case Op::Sub: return saturate(x - y);
        case Op::Mul: return saturate(x * y);
        case Op::Div: return div(x, y);
        default: return x;
    }
}

}  // namespace gpvol::protected_ops
