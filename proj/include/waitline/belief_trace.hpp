#pragma once

#include "waitline/belief.hpp"
#include "waitline/engine.hpp"

#include <cmath>
#include <map>
#include <vector>

namespace waitline {

struct DegenerateFilterError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One stage boundary of a game. depth 0 is the pre-message belief at that
// instant; depth d >= 1 the belief after the d-th message opportunity there.
struct TraceStage {
    double time;
    int depth;
    Belief belief;
};

struct BeliefTrace {
    std::vector<TraceStage> stages;
};

struct TraceOptions {
    int drift_points = 9;            // plain samples between stage boundaries
    double start_time = -1.0;        // <0: derive from the support / history
};

namespace detail {

// Belief over remaining items when each of n agents independently wants to
// have entered by now with probability p, conditioned on a positive count.
inline Belief binomial_entry_belief(int n, int k, double p) {
    std::vector<double> w(k, 0.0);
    for (int kappa = 1; kappa <= k; ++kappa) {
        int e = k - kappa;
        if (e <= n) w[kappa - 1] = binomial_pmf(n, e, p);
    }
    return Belief::from_weights(std::move(w));
}

// P(plan(V) > t) under the symmetric profile, via a quantile tabulation of
// the (monotone) pre-message plan.
class EntryProbability {
public:
    EntryProbability(const GameConfig& cfg, const StrategyProfile& strat, int points = 2048) {
        double start = cfg.dist.bounded() ? cfg.dist.hi()
                                          : std::numeric_limits<double>::infinity();
        double pmax = cfg.dist.bounded() ? 1.0 : 1.0 - 1e-9;
        qs_.reserve(points);
        bids_.reserve(points);
        for (int i = 0; i < points; ++i) {
            double q = pmax * i / (points - 1.0);
            double bid = strat.symmetric.plan(cfg.dist.quantile(q), {}, start);
            qs_.push_back(q);
            bids_.push_back(bid);
        }
        for (std::size_t i = 1; i < bids_.size(); ++i)
            if (bids_[i] < bids_[i - 1] && bids_[i] >= 0.0 && bids_[i - 1] >= 0.0)
                monotone_ = false;
    }

    bool monotone() const { return monotone_; }

    double entered_by(double t) const {
        // fraction of types with plan > t (abstainers never enter)
        auto it = std::upper_bound(bids_.begin(), bids_.end(), t);
        if (it == bids_.end()) return 0.0;
        std::size_t idx = it - bids_.begin();
        if (idx == 0) return 1.0;
        // linear refinement inside the bracketing cell
        double b0 = bids_[idx - 1], b1 = bids_[idx];
        double q0 = qs_[idx - 1], q1 = qs_[idx];
        double q = b1 > b0 ? q0 + (q1 - q0) * (t - b0) / (b1 - b0) : q1;
        return 1.0 - q;
    }

private:
    std::vector<double> qs_, bids_;
    bool monotone_ = true;
};

} // namespace detail

// Bayesian belief trace over positive remaining items at every stage
// boundary.
//
// Closed-form fast paths cover the trivial policy (prior order-statistic
// belief), full revelation (point mass at the announced count) and queue-full
// disclosure (the not-yet-full conditioning). Everything else runs a particle
// filter: `particles` hidden games are simulated forward under `strategies`
// with independent seeds, the ones whose public message sequence matches
// `observed` are retained, and the empirical distribution of remaining items
// is reported per stage. The filter conditions on message sequences relative
// to stage boundaries, not on the exact arrival times of hidden entries.
inline BeliefTrace belief_trace(const GameConfig& cfg, const PolicySpec& policy,
                                const StrategyProfile& strategies,
                                const std::vector<LoggedMessage>& observed,
                                long particles, Rng& rng,
                                const TraceOptions& opt = {}) {
    const int k = cfg.k;
    double start = opt.start_time;
    if (start < 0.0) {
        start = cfg.dist.bounded() ? cfg.dist.hi() : cfg.dist.quantile(0.999);
        for (const auto& m : observed) start = std::max(start, m.time * 1.5);
    }

    // stage skeleton: drift samples, observed messages, silent opportunities
    struct StagePoint {
        double time;
        int posts;        // number of post beliefs to emit at this time
        bool silent_opp;  // a scheduled opportunity that stayed silent
    };
    std::vector<StagePoint> points;
    std::map<double, int, std::greater<>> msg_count;
    for (const auto& m : observed) ++msg_count[m.time];
    for (const auto& [t, c] : msg_count) points.push_back({t, c, false});
    if (policy.kind == PolicyKind::FixedTime || policy.kind == PolicyKind::FixedTimeAndState) {
        if (!msg_count.count(policy.tau) && policy.tau < start)
            points.push_back({policy.tau, 1, true});
    }
    for (int i = 1; i <= opt.drift_points; ++i) {
        double t = start * i / (opt.drift_points + 1.0);
        if (!msg_count.count(t)) points.push_back({t, 0, false});
    }
    std::sort(points.begin(), points.end(),
              [](const StagePoint& a, const StagePoint& b) { return a.time > b.time; });

    BeliefTrace trace;

    // --- fast path: full revelation -------------------------------------
    if (policy.kind == PolicyKind::FullRevelation) {
        int remaining = k;
        trace.stages.push_back({start, 0, Belief::point_mass(k, k)});
        for (const auto& m : observed) {
            if (m.msg.payload != MessagePayloadKind::QueueLength) continue;
            int after = k - m.msg.queue_length;
            trace.stages.push_back({m.time, 0, Belief::point_mass(remaining, k)});
            if (after <= 0) return trace;  // no positive-count belief remains
            trace.stages.push_back({m.time, 1, Belief::point_mass(after, k)});
            remaining = after;
        }
        return trace;
    }

    // --- fast path: trivial / queue-full --------------------------------
    if (policy.kind == PolicyKind::Trivial || policy.kind == PolicyKind::QueueFull) {
        detail::EntryProbability entry(cfg, strategies);
        if (entry.monotone()) {
            trace.stages.push_back({start, 0, Belief::point_mass(k, k)});
            for (const auto& pt : points) {
                if (pt.time >= start) continue;
                Belief b = detail::binomial_entry_belief(cfg.n, k, entry.entered_by(pt.time));
                trace.stages.push_back({pt.time, 0, b});
                if (policy.kind == PolicyKind::QueueFull && pt.posts > 0)
                    return trace;  // the full notice ends the positive-count story
            }
            return trace;
        }
        // non-monotone custom profile: fall through to the particle filter
    }

    // --- particle filter -------------------------------------------------
    if (particles < 1000)
        throw std::invalid_argument("belief_trace: need at least 10^3 particles");

    struct Particle {
        History hist;
    };
    std::vector<Particle> sim(particles);
    {
        Engine engine(cfg, policy, strategies);
        for (long i = 0; i < particles; ++i) {
            Rng prng(derive_seed(rng(), static_cast<std::uint64_t>(i)));
            engine.run(prng, {}, &sim[i].hist);
        }
    }

    auto payload_match = [&](const Particle& p, std::size_t upto) {
        if (p.hist.messages().size() < upto) return false;
        for (std::size_t j = 0; j < upto; ++j)
            if (!(p.hist.messages()[j].msg == observed[j].msg)) return false;
        return true;
    };

    std::size_t seen = 0;  // observed messages strictly above the current stage time
    std::vector<double> weights(k);
    auto emit = [&](double t, int depth, auto&& consistent_and_count) {
        std::fill(weights.begin(), weights.end(), 0.0);
        long survivors = 0;
        for (const auto& p : sim) {
            int remaining = consistent_and_count(p);
            if (remaining == INT32_MIN) continue;  // inconsistent
            if (remaining >= 1 && remaining <= k) {
                ++survivors;
                weights[remaining - 1] += 1.0;
            }
        }
        if (survivors * 100 < particles)
            throw DegenerateFilterError("belief_trace: fewer than 1% of particles survive");
        trace.stages.push_back({t, depth, Belief::from_weights(weights)});
    };

    // pre-stage consistency at clock t: the particle's messages above t are
    // exactly the observed ones above t
    auto pre_state = [&](const Particle& p, double t) -> int {
        std::size_t cnt = 0;
        for (const auto& m : p.hist.messages())
            if (m.time > t) ++cnt;
        if (cnt != seen || !payload_match(p, seen)) return INT32_MIN;
        int entries = 0;
        for (const auto& e : p.hist.entries())
            if (e.time > t) ++entries;
        return k - entries;
    };

    trace.stages.push_back({start, 0, Belief::point_mass(k, k)});
    for (const auto& pt : points) {
        if (pt.time >= start) continue;
        double t = pt.time;
        emit(t, 0, [&](const Particle& p) { return pre_state(p, t); });

        if (pt.silent_opp) {
            // condition additionally on no message at exactly t
            emit(t, 1, [&](const Particle& p) {
                int s = pre_state(p, t);
                if (s == INT32_MIN) return INT32_MIN;
                for (const auto& m : p.hist.messages())
                    if (m.time == t) return INT32_MIN;
                return s;
            });
        }
        for (int j = 1; j <= pt.posts; ++j) {
            std::size_t upto = seen + j;
            emit(t, j, [&](const Particle& p) {
                if (pre_state(p, t) == INT32_MIN) return INT32_MIN;
                if (!payload_match(p, upto)) return INT32_MIN;
                const auto& trigger = p.hist.messages()[upto - 1];
                if (trigger.time > t) return INT32_MIN;
                int entries = 0;
                for (const auto& e : p.hist.entries())
                    if (e.time > trigger.time ||
                        (e.time == trigger.time && e.depth < trigger.depth))
                        ++entries;
                return k - entries;
            });
        }
        seen += pt.posts;
    }
    return trace;
}

// Definition of sudden bad news, evaluated over trace entries: the belief
// right after an opportunity at (t, d) is strictly FOSD dominated by the one
// just before it, and that pre belief is weakly dominated by every strictly
// earlier entry (including same-time shallower depths).
inline std::vector<std::pair<double, int>> detect_sudden_bad_news(const BeliefTrace& trace) {
    std::vector<std::pair<double, int>> events;
    const auto& st = trace.stages;
    for (std::size_t i = 1; i < st.size(); ++i) {
        if (st[i].time != st[i - 1].time) continue;  // jumps live within an instant
        const Belief& pre = st[i - 1].belief;
        const Belief& post = st[i].belief;
        if (!fosd_strictly_dominates(pre, post)) continue;
        bool most_pessimistic = true;
        for (std::size_t j = 0; j + 1 < i; ++j) {
            if (!fosd_weakly_dominates(st[j].belief, pre)) {
                most_pessimistic = false;
                break;
            }
        }
        if (most_pessimistic) events.emplace_back(st[i].time, st[i].depth);
    }
    return events;
}

} // namespace waitline
