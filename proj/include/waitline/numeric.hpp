#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace waitline {

inline constexpr double kQuadAbsTol = 1e-10;
inline constexpr double kQuadRelTol = 1e-8;
inline constexpr double kBisectWidth = 1e-12;

struct IntegrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Adaptive Gauss-Kronrod (G7/K15). Infinite upper limits are folded onto a
// finite interval internally by boost, which is what the Pareto tail needs.
template <class F>
double integrate(F&& f, double a, double b,
                 double abs_tol = kQuadAbsTol, double rel_tol = kQuadRelTol) {
    if (a == b) return 0.0;
    using boost::math::quadrature::gauss_kronrod;
    double err = 0.0;
    double val = gauss_kronrod<double, 15>::integrate(f, a, b, 18, rel_tol, &err);
    if (!std::isfinite(val) || err > std::max(abs_tol, rel_tol * std::abs(val)) * 1e3)
        throw IntegrationError("quadrature failed to converge");
    return val;
}

// Bisection on a monotone bracket [lo, hi] with f(lo), f(hi) of opposite sign.
// Runs to a fixed interval width; no derivative needed.
template <class F>
double bisect(F&& f, double lo, double hi, double width = kBisectWidth) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0) == (fhi > 0))
        throw std::domain_error("bisect: no sign change on bracket");
    while (hi - lo > width) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // hit double resolution
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Expands [lo, hi] upward until f changes sign; for root finding on
// unbounded supports.
template <class F>
double bisect_expanding(F&& f, double lo, double hi_guess,
                        double width = kBisectWidth, int max_doublings = 200) {
    double hi = hi_guess;
    double flo = f(lo);
    for (int i = 0; i < max_doublings; ++i) {
        if ((f(hi) > 0) != (flo > 0)) return bisect(f, lo, hi, width);
        hi = lo + 2.0 * (hi - lo);
    }
    throw std::domain_error("bisect_expanding: no sign change found");
}

inline double binomial_coeff(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// P(X = j) for X ~ Binomial(n, p)
inline double binomial_pmf(int n, int j, double p) {
    if (j < 0 || j > n) return 0.0;
    return binomial_coeff(n, j) * std::pow(p, j) * std::pow(1.0 - p, n - j);
}

} // namespace waitline
