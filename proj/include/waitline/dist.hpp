#pragma once

#include "waitline/numeric.hpp"
#include "waitline/rng.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace waitline {

enum class DistKind { Uniform, Pareto, Weibull, UpperTruncated };

enum class HazardClass { Increasing, Decreasing, Neither };

// Parametric value law with cdf/pdf/quantile/hazard and upper truncation.
// Immutable after construction; all operations are pure.
class ValueDistribution {
public:
    static ValueDistribution uniform(double lo, double hi) {
        if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
            throw std::invalid_argument("uniform: need finite lo < hi");
        ValueDistribution d(DistKind::Uniform);
        d.a_ = lo;
        d.b_ = hi;
        return d;
    }

    // shape must exceed 1 so the mean is finite
    static ValueDistribution pareto(double scale, double shape) {
        if (!(scale > 0)) throw std::invalid_argument("pareto: scale must be positive");
        if (!(shape > 1)) throw std::invalid_argument("pareto: shape must exceed 1 (finite mean)");
        ValueDistribution d(DistKind::Pareto);
        d.a_ = scale;
        d.b_ = shape;
        return d;
    }

    static ValueDistribution weibull(double scale, double shape) {
        if (!(scale > 0) || !(shape > 0))
            throw std::invalid_argument("weibull: parameters must be positive");
        ValueDistribution d(DistKind::Weibull);
        d.a_ = scale;
        d.b_ = shape;
        return d;
    }

    static ValueDistribution upper_truncated(ValueDistribution base, double cap) {
        if (!(cap > base.lo()) || cap > base.hi())
            throw std::invalid_argument("upper_truncated: cap outside support");
        ValueDistribution d(DistKind::UpperTruncated);
        d.a_ = cap;
        d.base_ = std::make_shared<ValueDistribution>(std::move(base));
        return d;
    }

    DistKind kind() const { return kind_; }

    double lo() const {
        switch (kind_) {
            case DistKind::Uniform: return a_;
            case DistKind::Pareto: return a_;
            case DistKind::Weibull: return 0.0;
            case DistKind::UpperTruncated: return base_->lo();
        }
        return 0.0;
    }

    double hi() const {
        switch (kind_) {
            case DistKind::Uniform: return b_;
            case DistKind::UpperTruncated: return a_;
            default: return std::numeric_limits<double>::infinity();
        }
    }

    bool bounded() const { return std::isfinite(hi()); }

    // clamps outside the support
    double cdf(double x) const {
        switch (kind_) {
            case DistKind::Uniform:
                return std::clamp((x - a_) / (b_ - a_), 0.0, 1.0);
            case DistKind::Pareto:
                return x <= a_ ? 0.0 : 1.0 - std::pow(a_ / x, b_);
            case DistKind::Weibull:
                return x <= 0.0 ? 0.0 : -std::expm1(-std::pow(x / a_, b_));
            case DistKind::UpperTruncated:
                if (x >= a_) return 1.0;
                return base_->cdf(x) / base_->cdf(a_);
        }
        return 0.0;
    }

    double pdf(double x) const {
        switch (kind_) {
            case DistKind::Uniform:
                return (x < a_ || x > b_) ? 0.0 : 1.0 / (b_ - a_);
            case DistKind::Pareto:
                return x < a_ ? 0.0 : b_ * std::pow(a_, b_) / std::pow(x, b_ + 1.0);
            case DistKind::Weibull: {
                if (x < 0.0) return 0.0;
                if (x == 0.0) return b_ < 1.0 ? std::numeric_limits<double>::infinity()
                                              : (b_ == 1.0 ? 1.0 / a_ : 0.0);
                double z = std::pow(x / a_, b_);
                return (b_ / x) * z * std::exp(-z);
            }
            case DistKind::UpperTruncated:
                return x > a_ ? 0.0 : base_->pdf(x) / base_->cdf(a_);
        }
        return 0.0;
    }

    double quantile(double p) const {
        if (p < 0.0 || p > 1.0) throw std::domain_error("quantile: p outside [0,1]");
        switch (kind_) {
            case DistKind::Uniform:
                return a_ + p * (b_ - a_);
            case DistKind::Pareto:
                return p == 1.0 ? std::numeric_limits<double>::infinity()
                                : a_ * std::pow(1.0 - p, -1.0 / b_);
            case DistKind::Weibull:
                return p == 1.0 ? std::numeric_limits<double>::infinity()
                                : a_ * std::pow(-std::log1p(-p), 1.0 / b_);
            case DistKind::UpperTruncated:
                return base_->quantile(p * base_->cdf(a_));
        }
        return 0.0;
    }

    double mean() const {
        switch (kind_) {
            case DistKind::Uniform:
                return 0.5 * (a_ + b_);
            case DistKind::Pareto:
                return b_ * a_ / (b_ - 1.0);
            case DistKind::Weibull:
                return a_ * std::tgamma(1.0 + 1.0 / b_);
            case DistKind::UpperTruncated: {
                if (auto u = as_uniform()) return 0.5 * (u->first + u->second);
                double cap = a_;
                const ValueDistribution& base = *base_;
                double num = integrate([&](double x) { return x * base.pdf(x); },
                                       base.lo(), cap);
                return num / base.cdf(cap);
            }
        }
        return 0.0;
    }

    // f/(1-F)
    double hazard(double x) const {
        double s = 1.0 - cdf(x);
        if (s <= 0.0) return std::numeric_limits<double>::infinity();
        return pdf(x) / s;
    }

    // (1-F)/f; the virtual-surplus weight. Domain error where the density vanishes.
    double inverse_hazard(double x) const {
        double f = pdf(x);
        if (!(f > 0.0)) throw std::domain_error("inverse_hazard: zero density");
        return (1.0 - cdf(x)) / f;
    }

    double sample(Rng& rng) const { return quantile(rng.uniform()); }

    // Resolves truncation chains that are uniform laws in disguise, enabling
    // the closed-form order-statistic path.
    std::optional<std::pair<double, double>> as_uniform() const {
        if (kind_ == DistKind::Uniform) return std::make_pair(a_, b_);
        if (kind_ == DistKind::UpperTruncated) {
            if (auto u = base_->as_uniform())
                return std::make_pair(u->first, std::min(a_, u->second));
        }
        return std::nullopt;
    }

private:
    explicit ValueDistribution(DistKind k) : kind_(k) {}

    DistKind kind_;
    double a_ = 0.0;  // lo / scale / cap
    double b_ = 0.0;  // hi / shape
    std::shared_ptr<const ValueDistribution> base_;
};

// Classifies the hazard rate f/(1-F) over a support grid. Conservative:
// returns Neither when the sign of the slope changes beyond relative slack.
inline HazardClass hazard_monotonicity(const ValueDistribution& d, int grid_size = 201) {
    if (grid_size < 3) throw std::invalid_argument("hazard_monotonicity: grid_size >= 3");
    constexpr double slack = 1e-6;

    std::vector<double> xs(grid_size);
    if (d.bounded()) {
        double lo = d.lo(), hi = d.hi();
        for (int i = 0; i < grid_size; ++i)
            xs[i] = lo + (hi - lo) * (i + 1.0) / (grid_size + 1.0);
    } else {
        // geometric grid reaching deep into the tail
        double x0 = std::max(d.quantile(0.01), d.lo() > 0 ? d.lo() * (1 + 1e-9) : d.quantile(0.01));
        double x1 = d.quantile(0.999);
        double ratio = std::pow(x1 / x0, 1.0 / (grid_size - 1));
        double x = x0;
        for (int i = 0; i < grid_size; ++i, x *= ratio) xs[i] = x;
    }

    bool inc_ok = true, dec_ok = true;
    double prev = d.hazard(xs[0]);
    for (int i = 1; i < grid_size; ++i) {
        double h = d.hazard(xs[i]);
        double tol = slack * std::max(std::abs(prev), std::abs(h));
        if (h < prev - tol) inc_ok = false;
        if (h > prev + tol) dec_ok = false;
        prev = h;
    }
    if (inc_ok) return HazardClass::Increasing;
    if (dec_ok) return HazardClass::Decreasing;
    return HazardClass::Neither;
}

// Y_k^{(n)}: the k-th highest of n i.i.d. draws. k > n denotes the constant-0
// statistic.
struct OrderStatSpec {
    int n = 0;
    int k = 1;

    OrderStatSpec(int n_, int k_) : n(n_), k(k_) {
        if (n < 0 || k < 1) throw std::invalid_argument("OrderStatSpec: need n >= 0, k >= 1");
    }
    bool degenerate() const { return k > n; }
};

// P(Y_k^{(n)} <= x) = sum_{j<k} C(n,j) (1-F)^j F^{n-j}
inline double order_stat_cdf(const ValueDistribution& d, OrderStatSpec spec, double x) {
    if (spec.degenerate()) return x >= 0.0 ? 1.0 : 0.0;
    double F = d.cdf(x);
    double S = 1.0 - F;
    double sum = 0.0;
    for (int j = 0; j < spec.k; ++j)
        sum += binomial_coeff(spec.n, j) * std::pow(S, j) * std::pow(F, spec.n - j);
    return std::min(sum, 1.0);
}

inline double order_stat_pdf(const ValueDistribution& d, OrderStatSpec spec, double x) {
    if (spec.degenerate()) throw std::domain_error("order_stat_pdf: degenerate statistic");
    double F = d.cdf(x);
    double S = 1.0 - F;
    return spec.n * binomial_coeff(spec.n - 1, spec.k - 1) *
           std::pow(F, spec.n - spec.k) * std::pow(S, spec.k - 1) * d.pdf(x);
}

namespace detail {

// Closed form on the standard uniform: E[U_k^{(n)} | U_k < z] with
//   partial moment  P_k(z) = n C(n-1,k-1) * sum_i C(k-1,i)(-1)^i z^{n-k+2+i}/(n-k+2+i)
//   cdf             F_k(z) = sum_{j<k} C(n,j)(1-z)^j z^{n-j}
inline double uniform01_cond_orderstat_mean(int n, int k, double z) {
    double partial = 0.0;
    for (int i = 0; i <= k - 1; ++i) {
        double e = n - k + 2 + i;
        partial += binomial_coeff(k - 1, i) * (i % 2 ? -1.0 : 1.0) * std::pow(z, e) / e;
    }
    partial *= n * binomial_coeff(n - 1, k - 1);
    double Fk = 0.0;
    for (int j = 0; j < k; ++j)
        Fk += binomial_coeff(n, j) * std::pow(1.0 - z, j) * std::pow(z, n - j);
    return partial / Fk;
}

} // namespace detail

// E[Y_k^{(n)} | Y_k^{(n)} < v]. Closed form for uniform laws, adaptive
// quadrature otherwise. Domain error when the conditioning event is null.
inline double cond_order_stat_mean(const ValueDistribution& d, OrderStatSpec spec, double v) {
    if (spec.degenerate()) {
        if (v <= 0.0) throw std::domain_error("cond_order_stat_mean: P(Y < v) = 0");
        return 0.0;
    }
    if (v <= d.lo()) throw std::domain_error("cond_order_stat_mean: P(Y < v) = 0");

    double top = std::min(v, d.hi());
    if (auto u = d.as_uniform()) {
        double w = u->second - u->first;
        double z = (top - u->first) / w;
        return u->first + w * detail::uniform01_cond_orderstat_mean(spec.n, spec.k, z);
    }
    double Fk = order_stat_cdf(d, spec, top);
    double tail = integrate([&](double x) { return order_stat_cdf(d, spec, x); },
                            d.lo(), top);
    return top - tail / Fk;
}

inline double order_stat_mean(const ValueDistribution& d, OrderStatSpec spec) {
    if (spec.degenerate()) return 0.0;
    if (d.bounded()) return cond_order_stat_mean(d, spec, d.hi());
    // lo + int_lo^inf (1 - F_k)
    return d.lo() + integrate([&](double x) { return 1.0 - order_stat_cdf(d, spec, x); },
                              d.lo(), std::numeric_limits<double>::infinity());
}

} // namespace waitline
