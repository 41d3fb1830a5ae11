#pragma once

#include "waitline/engine.hpp"
#include "waitline/equilibria.hpp"

#include <memory>
#include <string>
#include <vector>

namespace waitline {

// Monotone bid function tabulated on a quantile grid; keeps batch simulation
// off the quadrature path for non-uniform laws.
class TabulatedBid {
public:
    template <class F>
    TabulatedBid(const ValueDistribution& d, F&& fn, int points = 1024,
                 double top_quantile = 1.0 - 1e-7) {
        double pmax = d.bounded() ? 1.0 : top_quantile;
        xs_.reserve(points);
        ys_.reserve(points);
        for (int i = 0; i < points; ++i) {
            double q = pmax * i / (points - 1);
            double v = d.quantile(q);
            xs_.push_back(v);
            ys_.push_back(fn(v));
        }
    }

    double operator()(double v) const {
        if (v <= xs_.front()) return ys_.front();
        if (v >= xs_.back()) return ys_.back();
        auto it = std::upper_bound(xs_.begin(), xs_.end(), v);
        std::size_t hi = it - xs_.begin();
        std::size_t lo = hi - 1;
        double w = (v - xs_[lo]) / (xs_[hi] - xs_[lo]);
        return ys_[lo] + w * (ys_[hi] - ys_[lo]);
    }

private:
    std::vector<double> xs_, ys_;
};

namespace detail {

inline bool has_payload(std::span<const LoggedMessage> msgs, MessagePayloadKind kind) {
    for (const auto& m : msgs)
        if (m.msg.payload == kind) return true;
    return false;
}

inline const LoggedMessage* find_payload(std::span<const LoggedMessage> msgs,
                                         MessagePayloadKind kind) {
    for (const auto& m : msgs)
        if (m.msg.payload == kind) return &m;
    return nullptr;
}

} // namespace detail

// "trivial-eq": the no-information benchmark bids; ignores all messages.
inline StrategyProfile make_trivial_eq(const GameConfig& cfg) {
    StrategyProfile p;
    if (cfg.dist.as_uniform()) {
        int n = cfg.n, k = cfg.k;
        ValueDistribution F = cfg.dist;
        p.symmetric.plan = [n, k, F](double v, std::span<const LoggedMessage>, double) {
            return beta_trivial(v, n, k, F);
        };
    } else {
        auto tab = std::make_shared<TabulatedBid>(
            cfg.dist, [&](double v) { return beta_trivial(v, cfg.n, cfg.k, cfg.dist); });
        p.symmetric.plan = [tab](double v, std::span<const LoggedMessage>, double) {
            return (*tab)(v);
        };
    }
    p.symmetric.react = [](double, std::span<const LoggedMessage>, double) { return false; };
    return p;
}

// "cbn-eq": the continuous-bad-news equilibrium profile at the calibration
// n = 3, k = 2, U(0,1), tau = 2/9. Before tau agents follow the initial
// curve, after tau the no-news curve, and после the signal the yes-news curve
// capped at the highest type that can still be in the game.
inline StrategyProfile make_cbn_eq(const GameConfig& cfg) {
    if (cfg.n != 3 || cfg.k != 2 || !cfg.dist.as_uniform() ||
        cfg.dist.lo() != 0.0 || cfg.dist.hi() != 1.0)
        throw std::invalid_argument("cbn-eq is calibrated to n=3, k=2, U(0,1)");
    StrategyProfile p;
    p.symmetric.plan = [](double v, std::span<const LoggedMessage> msgs, double) {
        if (const LoggedMessage* sig =
                detail::find_payload(msgs, MessagePayloadKind::GoodNewsSignal)) {
            double cap = cbn::inverse(cbn::Curve::NoNews, sig->time);
            return cbn::b_yes_news(std::min(v, cap));
        }
        return v >= cbn::kVhat ? cbn::b_initial(v) : cbn::b_no_news(v);
    };
    p.symmetric.react = [](double, std::span<const LoggedMessage>, double) { return false; };
    return p;
}

// "reserve-eq": the queue-full-disclosure equilibrium with entry cost c.
// Types at or below c stay out; others enter at beta_reserve(v) - c unless
// the full notice has arrived.
inline StrategyProfile make_reserve_eq(const GameConfig& cfg) {
    if (!cfg.entry_cost) throw std::invalid_argument("reserve-eq needs an entry cost");
    double c = *cfg.entry_cost;
    auto tab = std::make_shared<TabulatedBid>(
        cfg.dist,
        [&](double v) { return v > c ? beta_reserve(v, c, cfg.n, cfg.k, cfg.dist) - c : 0.0; });
    StrategyProfile p;
    p.symmetric.plan = [tab, c](double v, std::span<const LoggedMessage> msgs, double) {
        if (v <= c) return kNeverBid;
        if (detail::has_payload(msgs, MessagePayloadKind::QueueFullNotice)) return kNeverBid;
        return std::max(0.0, (*tab)(v));
    };
    p.symmetric.react = [](double, std::span<const LoggedMessage>, double) { return false; };
    return p;
}

// "rush-reactor": benchmark bids, but joins immediately on any bad-news
// message (a queue-length report of one or more, or the full notice).
inline StrategyProfile make_rush_reactor(const GameConfig& cfg) {
    StrategyProfile p = make_trivial_eq(cfg);
    double c = cfg.entry_cost.value_or(0.0);
    PlanFn base = p.symmetric.plan;
    p.symmetric.plan = [base](double v, std::span<const LoggedMessage> msgs, double now) {
        if (detail::has_payload(msgs, MessagePayloadKind::QueueFullNotice)) return kNeverBid;
        return base(v, msgs, now);
    };
    p.symmetric.react = [c](double v, std::span<const LoggedMessage> msgs, double) {
        if (msgs.empty()) return false;
        const LoggedMessage& last = msgs.back();
        return last.msg.payload == MessagePayloadKind::QueueLength &&
               last.msg.queue_length >= 1 && v > c;
    };
    return p;
}

// "truthful": bids the value itself; pay-as-bid makes this dominated, which
// the certification search must detect.
inline StrategyProfile make_truthful() {
    StrategyProfile p;
    p.symmetric.plan = [](double v, std::span<const LoggedMessage>, double) { return v; };
    p.symmetric.react = [](double, std::span<const LoggedMessage>, double) { return false; };
    return p;
}

// "grid-custom": piecewise-linear bid schedule from config arrays.
inline StrategyProfile make_grid_custom(std::vector<double> values, std::vector<double> bids) {
    if (values.size() != bids.size() || values.size() < 2)
        throw std::invalid_argument("grid-custom: need matching arrays of length >= 2");
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] <= values[i - 1])
            throw std::invalid_argument("grid-custom: values must be strictly increasing");
    auto vs = std::make_shared<std::vector<double>>(std::move(values));
    auto bs = std::make_shared<std::vector<double>>(std::move(bids));
    StrategyProfile p;
    p.symmetric.plan = [vs, bs](double v, std::span<const LoggedMessage>, double) {
        const auto& x = *vs;
        const auto& y = *bs;
        if (v <= x.front()) return y.front();
        if (v >= x.back()) return y.back();
        auto it = std::upper_bound(x.begin(), x.end(), v);
        std::size_t hi = it - x.begin(), lo = hi - 1;
        double w = (v - x[lo]) / (x[hi] - x[lo]);
        return y[lo] + w * (y[hi] - y[lo]);
    };
    p.symmetric.react = [](double, std::span<const LoggedMessage>, double) { return false; };
    return p;
}

// How a deviator treats messages while its planned entry time is shifted.
enum class ReactionMode { Obey, IgnoreMessages, JoinOnMessage };

// Wraps one agent's strategy with an entry-time shift and a reaction toggle.
inline AgentStrategy make_deviation(const AgentStrategy& base, double shift,
                                    ReactionMode mode = ReactionMode::Obey) {
    AgentStrategy d;
    PlanFn plan = base.plan;
    switch (mode) {
        case ReactionMode::Obey:
            d.plan = [plan, shift](double v, std::span<const LoggedMessage> msgs, double now) {
                double b = plan(v, msgs, now);
                return b < 0.0 ? b : std::max(0.0, b + shift);
            };
            // join as soon as the shifted plan is no longer below the clock
            d.react = {};
            break;
        case ReactionMode::IgnoreMessages:
            d.plan = [plan, shift](double v, std::span<const LoggedMessage>, double now) {
                double b = plan(v, {}, now);
                return b < 0.0 ? b : std::max(0.0, b + shift);
            };
            d.react = [](double, std::span<const LoggedMessage>, double) { return false; };
            break;
        case ReactionMode::JoinOnMessage:
            d.plan = [plan, shift](double v, std::span<const LoggedMessage> msgs, double now) {
                double b = plan(v, msgs, now);
                return b < 0.0 ? b : std::max(0.0, b + shift);
            };
            d.react = [](double, std::span<const LoggedMessage> msgs, double) {
                return !msgs.empty();
            };
            break;
    }
    return d;
}

inline StrategyProfile make_named_profile(const std::string& name, const GameConfig& cfg) {
    if (name == "trivial-eq") return make_trivial_eq(cfg);
    if (name == "cbn-eq") return make_cbn_eq(cfg);
    if (name == "reserve-eq") return make_reserve_eq(cfg);
    if (name == "rush-reactor") return make_rush_reactor(cfg);
    if (name == "truthful") return make_truthful();
    throw std::invalid_argument("unknown strategy profile: " + name);
}

} // namespace waitline
