#pragma once

// Hyperbolic combinations evaluated without catastrophic cancellation for
// small arguments.

#include <cmath>

namespace micro_reynolds::hyp {

/// Below this |x| the direct forms of coth lose accuracy to the x^5 term.
inline constexpr double kSeriesThreshold = 1e-4;

/// coth(x); 1/x + x/3 - x^3/45 below the series threshold.
inline double coth(double x) {
    if (std::abs(x) < kSeriesThreshold) return 1.0 / x + x / 3.0 - x * x * x / 45.0;
    return 1.0 / std::tanh(x);
}

/// Series branch of coth, exposed for testing.
inline double coth_series(double x) { return 1.0 / x + x / 3.0 - x * x * x / 45.0; }

/// cosh(x) - 1
inline double coshm1(double x) {
    const double s = std::sinh(0.5 * x);
    return 2.0 * s * s;
}

/// sinh(x) - x. Taylor series through x^17 for |x| < 1.
inline double sinhmx(double x) {
    if (std::abs(x) >= 1.0) return std::sinh(x) - x;
    const double x2 = x * x;
    double term = x * x2 / 6.0;
    double sum = term;
    for (int n = 5; n <= 17; n += 2) {
        term *= x2 / static_cast<double>((n - 1) * n);
        sum += term;
    }
    return sum;
}

/// cosh(x) - 1 - x^2/2. Taylor series through x^18 for |x| < 1.
inline double coshm1mx2(double x) {
    if (std::abs(x) >= 1.0) return coshm1(x) - 0.5 * x * x;
    const double x2 = x * x;
    double term = x2 * x2 / 24.0;
    double sum = term;
    for (int n = 6; n <= 18; n += 2) {
        term *= x2 / static_cast<double>((n - 1) * n);
        sum += term;
    }
    return sum;
}

/// (1 - y coth y) / y^2, which tends to -1/3 as y -> 0.
inline double one_minus_ycothy_over_y2(double y) {
    if (std::abs(y) < 0.08) {
        const double y2 = y * y;
        return -1.0 / 3.0 +
               y2 * (1.0 / 45.0 + y2 * (-2.0 / 945.0 + y2 * (1.0 / 4725.0 + y2 * (-2.0 / 93555.0))));
    }
    return (1.0 - y / std::tanh(y)) / (y * y);
}

} // namespace micro_reynolds::hyp
