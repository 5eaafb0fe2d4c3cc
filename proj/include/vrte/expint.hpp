// expint.hpp - classical exponential integrals E_k
//
// This software is licensed under the terms of the Apache Licence Version 2.0
// which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

#ifndef VRTE_EXPINT_HPP
#define VRTE_EXPINT_HPP

#include <cmath>
#include <limits>
#include <stdexcept>

namespace vrte {

namespace detail {

// E_1 by power series, for x <= 1:
//   E_1(x) = -gamma - ln x + sum_{n>=1} (-1)^{n+1} x^n / (n n!)
inline double e1_series(double x) {
    constexpr double euler_gamma = 0.57721566490153286060651209008240243;
    double sum = 0.0;
    double term = 1.0;
    for (int n = 1; n <= 40; ++n) {
        term *= -x / n;
        const double add = -term / n;
        sum += add;
        if (std::abs(add) < 1e-17 * std::abs(sum)) break;
    }
    return -euler_gamma - std::log(x) + sum;
}

// E_1 by modified Lentz continued fraction, for x > 1:
//   E_1(x) = e^{-x} / (x + 1/(1 + 1/(x + 2/(1 + 2/(x + ...)))))
inline double e1_contfrac(double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 200; ++i) {
        const double a = -static_cast<double>(i) * static_cast<double>(i);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x);
}

}  // namespace detail

// Classical exponential integral E_k(x) = int_1^inf e^{-x t} / t^k dt, x >= 0,
// k in {0,...,5}. E_1 uses the series/continued-fraction split; higher orders
// follow the upward recurrence k E_{k+1}(x) = e^{-x} - x E_k(x), which is
// stable for these small orders.
inline double expint(int k, double x) {
    if (x < 0.0) throw std::domain_error("expint: x must be nonnegative");
    if (k < 0 || k > 5) throw std::domain_error("expint: order must be in 0..5");
    if (k == 0) {
        if (x == 0.0) return std::numeric_limits<double>::infinity();
        return std::exp(-x) / x;
    }
    if (x == 0.0) {
        if (k == 1) return std::numeric_limits<double>::infinity();
        return 1.0 / static_cast<double>(k - 1);
    }
    double e = (x <= 1.0) ? detail::e1_series(x) : detail::e1_contfrac(x);
    if (k == 1) return e;
    const double ex = std::exp(-x);
    for (int j = 1; j < k; ++j) e = (ex - x * e) / static_cast<double>(j);
    return e;
}

// C_1(X) = int_0^X E_1 = 1 - E_2(X). (The bound on the contraction ratio uses
// this antiderivative.)
inline double c1_integral(double X) {
    if (X < 0.0) throw std::domain_error("c1_integral: X must be nonnegative");
    return 1.0 - expint(2, X);
}

}  // namespace vrte

#endif  // VRTE_EXPINT_HPP
