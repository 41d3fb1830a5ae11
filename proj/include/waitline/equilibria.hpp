#pragma once

#include "waitline/belief.hpp"
#include "waitline/dist.hpp"

#include <cmath>
#include <stdexcept>

namespace waitline {

// Symmetric equilibrium bid of the no-information benchmark:
//   beta(v) = E[Y_k^{(n-1)} | Y_k^{(n-1)} < v].
// In the queue this is the entry time of type v.
inline double beta_trivial(double v, int n, int k, const ValueDistribution& F) {
    if (!(n > k) || k < 1) throw std::invalid_argument("beta_trivial: need n > k >= 1");
    if (v < F.lo()) throw std::domain_error("beta_trivial: P(Y < v) = 0");
    if (v == F.lo()) return F.lo();  // continuous extension at the bottom type
    return cond_order_stat_mean(F, OrderStatSpec(n - 1, k), v);
}

// The bid under supply/demand uncertainty: a weighted average of the
// known-state bids, weighted by state probability times the win probability
// in that state.
inline double beta_uncertain(double v, const SupplyDemandBelief& H,
                             const ValueDistribution& F) {
    if (v < F.lo()) throw std::domain_error("beta_uncertain: zero win probability");
    if (v == F.lo()) return F.lo();
    double num = 0.0, den = 0.0;
    for (const auto& s : H.states()) {
        OrderStatSpec spec(s.agents - 1, s.items);
        double win = order_stat_cdf(F, spec, v);
        den += s.prob * win;
        if (win > 0.0)
            num += s.prob * win * cond_order_stat_mean(F, spec, v);
    }
    if (!(den > 0.0)) throw std::domain_error("beta_uncertain: zero win probability");
    return num / den;
}

// Expected payment of type v conditional on winning in an assortatively
// efficient mechanism, when mu is the belief over remaining items, values are
// drawn from F truncated above at vhat, and the game started with N agents
// and K items. At v = vhat this reduces to
//   sum_kappa mu(kappa) E[Ybar_kappa^{(N-K+kappa-1)}].
inline double t_ae(double v, const Belief& mu, double vhat, int N, int K,
                   const ValueDistribution& F) {
    if (!(vhat > F.lo()) || vhat > F.hi())
        throw std::domain_error("t_ae: vhat outside support");
    if (!(v > 0.0) || v > vhat) throw std::domain_error("t_ae: need 0 < v <= vhat");
    ValueDistribution trunc = ValueDistribution::upper_truncated(F, vhat);
    return beta_uncertain(v, SupplyDemandBelief::from_items_belief(mu, N, K), trunc);
}

// --- continuous-bad-news calibration: n = 3, k = 2, U(0,1), tau = 2/9 ---

namespace cbn {

inline constexpr double kTau = 2.0 / 9.0;
inline constexpr double kVhat = 0.5;

inline double gamma(double v) {
    return std::sqrt(((144.0 * v - 216.0) * v + 33.0) * v * v + 72.0 * v + 16.0);
}

// bid before tau
inline double b_initial(double v) {
    if (v < 0.0 || v > 1.0) throw std::domain_error("b_initial: v outside [0,1]");
    return v * (3.0 - 2.0 * v) / (3.0 * (2.0 - v));
}

// bid after the good-news signal
inline double b_yes_news(double v) {
    if (v < 0.0 || v > kVhat) throw std::domain_error("b_yes_news: v outside [0,1/2]");
    return v * (3.0 * kVhat - 2.0 * v) / (3.0 * (2.0 * kVhat - v));
}

// bid after tau while no signal has arrived
inline double b_no_news(double v) {
    if (v < 0.0 || v > kVhat) throw std::domain_error("b_no_news: v outside [0,1/2]");
    return (gamma(v) - 12.0 * v * v + 9.0 * v - 4.0) / (36.0 * (1.0 - v));
}

struct BidFunctions {
    double b_i;
    double b_nn;
    double b_yn;
    double gamma;
};

inline BidFunctions bid_functions(double v) {
    if (v < 0.0 || v > 1.0) throw std::domain_error("cbn: v outside [0,1]");
    BidFunctions out{};
    out.b_i = b_initial(v);
    out.gamma = gamma(v);
    if (v <= kVhat) {
        out.b_nn = b_no_news(v);
        out.b_yn = b_yes_news(v);
    } else {
        out.b_nn = std::numeric_limits<double>::quiet_NaN();
        out.b_yn = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

enum class Curve { Initial, NoNews, YesNews };

// inverse by bisection on the monotone domain
inline double inverse(Curve which, double t) {
    double hi = which == Curve::Initial ? 1.0 : kVhat;
    auto f = [&](double v) {
        switch (which) {
            case Curve::Initial: return b_initial(v);
            case Curve::NoNews: return b_no_news(v);
            case Curve::YesNews: return b_yes_news(v);
        }
        return 0.0;
    };
    if (t < 0.0 || t > f(hi) + 1e-15)
        throw std::domain_error("cbn::inverse: t outside range");
    if (t <= 0.0) return 0.0;
    if (t >= f(hi)) return hi;
    return bisect([&](double v) { return f(v) - t; }, 0.0, hi);
}

} // namespace cbn

// Entry-cost variant bid with reserve c:
//   beta(v) = E[max(c, Y_k^{(n-1)}) | max(c, Y_k^{(n-1)}) < v],  v > c.
// The queue entry time is beta(v) - c.
inline double beta_reserve(double v, double c, int n, int k,
                           const ValueDistribution& F) {
    if (!(n > k) || k < 1) throw std::invalid_argument("beta_reserve: need n > k >= 1");
    if (c < 0.0) throw std::invalid_argument("beta_reserve: negative reserve");
    if (c == 0.0) return beta_trivial(v, n, k, F);
    if (!(v > c)) throw std::domain_error("beta_reserve: need v > c");

    OrderStatSpec spec(n - 1, k);
    double top = std::min(v, F.hi());
    double Fk_v = order_stat_cdf(F, spec, top);
    if (!(Fk_v > 0.0)) throw std::domain_error("beta_reserve: P(Y < v) = 0");
    double Fk_c = order_stat_cdf(F, spec, c);
    // E[max(c,Y) 1{Y<v}] = c F_k(c) + int_c^v y dF_k(y), by parts on the integral
    double lo = std::max(c, F.lo());
    double integral = 0.0;
    if (top > lo) {
        integral = top * Fk_v - lo * order_stat_cdf(F, spec, lo) -
                   integrate([&](double y) { return order_stat_cdf(F, spec, y); }, lo, top);
    }
    return (c * Fk_c + integral) / Fk_v;
}

} // namespace waitline
