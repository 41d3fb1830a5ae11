#pragma once

#include "waitline/dist.hpp"
#include "waitline/policy.hpp"
#include "waitline/rng.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

namespace waitline {

struct ProtocolViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One queueing game instance.
struct GameConfig {
    int n = 0;
    int k = 0;
    ValueDistribution dist;
    std::optional<double> entry_cost;  // c in (0, v_bar)
    std::uint64_t seed = 0;

    GameConfig(int n_, int k_, ValueDistribution d, std::optional<double> c = std::nullopt,
               std::uint64_t seed_ = 0)
        : n(n_), k(k_), dist(std::move(d)), entry_cost(c), seed(seed_) {
        if (!(n > k) || k < 1) throw std::invalid_argument("GameConfig: need n > k >= 1");
        if (entry_cost) {
            if (!(*entry_cost > 0.0) || !(*entry_cost < dist.hi()))
                throw std::invalid_argument("GameConfig: entry cost outside (0, v_bar)");
        }
    }
};

struct LoggedMessage {
    Message msg;
    double time;
    int depth;
};

struct QueueEntry {
    int agent;
    double time;
    int depth;
};

// Interleaved public message log and announcer-private queue log. Times are
// nonincreasing along the merged event order; within one instant, depth is
// strictly increasing (0 = the event that moved the main clock).
class History {
public:
    History() = default;
    History(std::vector<LoggedMessage> messages, std::vector<QueueEntry> entries, int capacity)
        : messages_(std::move(messages)), entries_(std::move(entries)) {
        validate(capacity);
    }

    const std::vector<LoggedMessage>& messages() const { return messages_; }
    const std::vector<QueueEntry>& entries() const { return entries_; }

    void validate(int capacity) const {
        if (static_cast<int>(entries_.size()) > capacity)
            throw std::invalid_argument("History: more entries than items");
        // merge the two logs and check (time desc, depth strictly asc) order
        std::size_t mi = 0, qi = 0;
        double prev_t = std::numeric_limits<double>::infinity();
        int prev_d = -1;
        auto step = [&](double t, int d) {
            if (t > prev_t) throw std::invalid_argument("History: times must be nonincreasing");
            if (t == prev_t && d <= prev_d)
                throw std::invalid_argument("History: depth must increase within an instant");
            if (t < prev_t && d != 0)
                throw std::invalid_argument("History: depth must reset at a new instant");
            prev_t = t;
            prev_d = d;
        };
        while (mi < messages_.size() || qi < entries_.size()) {
            bool take_msg;
            if (mi == messages_.size()) take_msg = false;
            else if (qi == entries_.size()) take_msg = true;
            else if (messages_[mi].time != entries_[qi].time)
                take_msg = messages_[mi].time > entries_[qi].time;
            else take_msg = messages_[mi].depth < entries_[qi].depth;
            if (take_msg) { step(messages_[mi].time, messages_[mi].depth); ++mi; }
            else { step(entries_[qi].time, entries_[qi].depth); ++qi; }
        }
    }

private:
    friend class Engine;
    std::vector<LoggedMessage> messages_;
    std::vector<QueueEntry> entries_;
};

// Entry plans below 0 mean "never attempt".
inline constexpr double kNeverBid = -1.0;

// Planned bid for the main bidding stage, given the public message log and
// the current clock. Must return a time strictly below `now` (or kNeverBid);
// wanting to enter at or above the clock is expressed through the reaction.
using PlanFn =
    std::function<double(double value, std::span<const LoggedMessage> messages, double now)>;

// Instantaneous reaction right after a message at time `now`: true = attempt
// to join at exactly `now`.
using ReactFn =
    std::function<bool(double value, std::span<const LoggedMessage> messages, double now)>;

struct AgentStrategy {
    PlanFn plan;
    ReactFn react;  // empty: join now iff plan(...) >= now
};

struct StrategyProfile {
    AgentStrategy symmetric;
    std::map<int, AgentStrategy> overrides;

    const AgentStrategy& for_agent(int i) const {
        auto it = overrides.find(i);
        return it == overrides.end() ? symmetric : it->second;
    }
};

struct AgentOutcome {
    double value = 0.0;
    bool attempted = false;
    std::optional<double> entry_time;
    bool won = false;
    double wait_paid = 0.0;
    double entry_cost_paid = 0.0;
    double utility = 0.0;
};

struct RushEvent {
    double time;
    int rushers;
    int slots;
};

struct Outcome {
    int capacity = 0;  // k
    std::vector<AgentOutcome> agents;
    std::vector<int> winners;
    std::vector<RushEvent> rushes;

    double total_surplus() const {
        double s = 0.0;
        for (const auto& a : agents) s += a.utility;
        return s;
    }
    double allocation_value() const {
        double s = 0.0;
        for (const auto& a : agents)
            if (a.won) s += a.value;
        return s;
    }
    double waits_burned() const {
        double s = 0.0;
        for (const auto& a : agents) s += a.wait_paid;
        return s;
    }
    double entry_costs_burned() const {
        double s = 0.0;
        for (const auto& a : agents) s += a.entry_cost_paid;
        return s;
    }
};

// True iff the winner set is the top-k value set; above c when an entry cost
// is present, allowing fewer than k winners when fewer types qualify. Value
// ties are treated as equivalent.
inline bool is_assortatively_efficient(const Outcome& out,
                                       std::optional<double> c = std::nullopt) {
    int qualifiers = 0;
    int winners = 0;
    double min_winner = std::numeric_limits<double>::infinity();
    for (const auto& a : out.agents) {
        bool qualifies = !c || a.value > *c;
        if (qualifies) ++qualifiers;
        if (a.won) {
            if (!qualifies) return false;
            ++winners;
            min_winner = std::min(min_winner, a.value);
        }
    }
    if (winners != std::min(out.capacity, qualifiers)) return false;
    for (const auto& a : out.agents)
        if (!a.won && (!c || a.value > *c) && a.value > min_winner) return false;
    return true;
}

// The descending-clock simulator. One instance owns its scratch buffers, so a
// tight loop of runs does not allocate; instances are not shared across
// threads.
class Engine {
public:
    Engine(const GameConfig& config, const PolicySpec& policy, const StrategyProfile& strategies)
        : cfg_(config), policy_(policy), strat_(strategies) {
        values_.resize(cfg_.n);
        status_.resize(cfg_.n);
    }

    const Outcome& run(Rng& rng, std::span<const double> fixed_values = {},
                       History* record = nullptr) {
        const int n = cfg_.n;
        const int k = cfg_.k;
        const double cost = cfg_.entry_cost.value_or(0.0);

        if (!fixed_values.empty() && static_cast<int>(fixed_values.size()) != n)
            throw std::invalid_argument("run: fixed_values size mismatch");
        for (int i = 0; i < n; ++i)
            values_[i] = fixed_values.empty() ? cfg_.dist.sample(rng) : fixed_values[i];

        PolicyState pol(policy_, rng);
        std::fill(status_.begin(), status_.end(), Status::Active);
        msgs_.clear();
        entries_.clear();
        failed_.clear();
        out_.rushes.clear();
        out_.winners.clear();

        double clock = cfg_.dist.bounded() ? cfg_.dist.hi()
                                           : std::numeric_limits<double>::infinity();
        last_event_time_ = std::numeric_limits<double>::infinity();
        next_depth_ = 0;
        view_ = AnnouncerView{0, k, -1.0, 0};

        // Main loop: bidding stage, then resolution of the next event, then
        // the nested instantaneous alternation at that event's time.
        while (true) {
            double best_bid = -1.0;
            tied_.clear();
            for (int i = 0; i < n; ++i) {
                if (status_[i] != Status::Active) continue;
                double b = strat_.for_agent(i).plan(values_[i], msg_span(), clock);
                if (b < 0.0) continue;  // abstains for now
                if (b >= clock)
                    throw ProtocolViolation("strategy bid at or above the clock in a bidding stage");
                if (b > best_bid) { best_bid = b; tied_.clear(); tied_.push_back(i); }
                else if (b == best_bid) tied_.push_back(i);
            }

            auto planned = pol.next_message(clock, view_);
            if (planned && planned->time > clock)
                throw ProtocolViolation("policy scheduled a message above the clock");

            if (tied_.empty() && !planned) break;  // nothing left to happen

            if (planned && planned->time >= best_bid) {
                // ties broken in favor of the announcer
                clock = planned->time;
                emit_message(pol, planned->message, clock);
                nested_alternation(pol, clock, cost, rng, /*message_just_arrived=*/true);
            } else {
                clock = best_bid;
                attempters_.assign(tied_.begin(), tied_.end());
                process_attempts(clock, cost, rng);
                nested_alternation(pol, clock, cost, rng, /*message_just_arrived=*/false);
            }
        }

        settle(cost, record);
        return out_;
    }

    const Outcome& last_outcome() const { return out_; }

private:
    enum class Status : unsigned char { Active, Queued, Out };

    std::span<const LoggedMessage> msg_span() const { return {msgs_.data(), msgs_.size()}; }

    int event_depth(double t) {
        if (t != last_event_time_) {
            last_event_time_ = t;
            next_depth_ = 0;
        }
        return next_depth_++;
    }

    void emit_message(PolicyState& pol, const Message& m, double t) {
        msgs_.push_back({m, t, event_depth(t)});
        pol.mark_sent();
        if (m.payload == MessagePayloadKind::QueueLength)
            view_.last_announced_length = m.queue_length;
    }

    // Processes a batch of simultaneous attempts; excess demand is resolved
    // uniformly at random. Two or more agents over capacity is a rush; a lone
    // attempt at a full queue is just a failed attempt.
    void process_attempts(double t, double cost, Rng& rng) {
        (void)cost;
        int slots = cfg_.k - static_cast<int>(entries_.size());
        int m = static_cast<int>(attempters_.size());
        if (m == 0) return;
        if (m > slots) {
            if (m >= 2) out_.rushes.push_back({t, m, slots});
            // uniform random subset via partial shuffle
            for (int i = 0; i < slots; ++i) {
                int j = i + static_cast<int>(rng.below(m - i));
                std::swap(attempters_[i], attempters_[j]);
            }
        }
        for (int i = 0; i < m; ++i) {
            int agent = attempters_[i];
            if (i < slots) {
                status_[agent] = Status::Queued;
                entries_.push_back({agent, t, event_depth(t)});
                if (view_.queue_length == 0) view_.first_entry_time = t;
                ++view_.queue_length;
            } else {
                status_[agent] = Status::Out;  // observed a full queue; cannot rejoin
                failed_.push_back(agent);
            }
        }
    }

    // The repeated instantaneous alternation at one instant: after a message,
    // bidders may join; after a join, the announcer may speak again.
    void nested_alternation(PolicyState& pol, double t, double cost, Rng& rng,
                            bool message_just_arrived) {
        const int iteration_cap = 4 * (cfg_.k + cfg_.n + 2);
        for (int guard = 0;; ++guard) {
            if (guard > iteration_cap)
                throw ProtocolViolation("nested alternation failed to terminate");

            if (message_just_arrived) {
                attempters_.clear();
                for (int i = 0; i < cfg_.n; ++i) {
                    if (status_[i] != Status::Active) continue;
                    const AgentStrategy& s = strat_.for_agent(i);
                    bool join = s.react
                                    ? s.react(values_[i], msg_span(), t)
                                    : s.plan(values_[i], msg_span(), t) >= t;
                    if (join) attempters_.push_back(i);
                }
                if (attempters_.empty()) return;
                process_attempts(t, cost, rng);
            }

            auto planned = pol.next_message(t, view_);
            if (!planned || planned->time != t) return;  // plans below t wait for the main loop
            emit_message(pol, planned->message, t);
            message_just_arrived = true;
        }
    }

    void settle(double cost, History* record) {
        out_.capacity = cfg_.k;
        out_.agents.assign(cfg_.n, AgentOutcome{});
        for (int i = 0; i < cfg_.n; ++i) {
            out_.agents[i].value = values_[i];
        }
        for (const auto& e : entries_) {
            AgentOutcome& a = out_.agents[e.agent];
            a.attempted = true;
            a.won = true;
            a.entry_time = e.time;
            a.wait_paid = e.time;
            a.entry_cost_paid = cost;
            a.utility = a.value - a.wait_paid - cost;
            out_.winners.push_back(e.agent);
        }
        for (int i : failed_) {
            AgentOutcome& a = out_.agents[i];
            a.attempted = true;
            a.entry_cost_paid = cost;
            a.utility = -cost;
        }
        if (record) {
            record->messages_ = msgs_;
            record->entries_ = entries_;
            record->validate(cfg_.k);
        }
    }

    const GameConfig& cfg_;
    const PolicySpec& policy_;
    const StrategyProfile& strat_;

    std::vector<double> values_;
    std::vector<Status> status_;
    std::vector<int> tied_;
    std::vector<int> attempters_;
    std::vector<int> failed_;
    std::vector<LoggedMessage> msgs_;
    std::vector<QueueEntry> entries_;
    Outcome out_;
    AnnouncerView view_;
    double last_event_time_ = 0.0;
    int next_depth_ = 0;
};

inline Outcome run_game(const GameConfig& config, const PolicySpec& policy,
                        const StrategyProfile& strategies, Rng& rng,
                        History* record = nullptr) {
    Engine engine(config, policy, strategies);
    return engine.run(rng, {}, record);
}

inline Outcome run_game(const GameConfig& config, const PolicySpec& policy,
                        const StrategyProfile& strategies, std::uint64_t seed,
                        History* record = nullptr) {
    Rng rng(seed);
    return run_game(config, policy, strategies, rng, record);
}

// Batch statistics with associatively mergeable accumulators.
struct OutcomeSummary {
    long runs = 0;
    double mean_agent_utility = 0.0, se_agent_utility = 0.0;
    double mean_total_surplus = 0.0, se_total_surplus = 0.0;
    double efficiency_frequency = 0.0, se_efficiency = 0.0;
    double rush_frequency = 0.0, se_rush = 0.0;
};

namespace detail {

struct BatchAccum {
    long runs = 0;
    double sum_util = 0, sumsq_util = 0;
    double sum_surplus = 0, sumsq_surplus = 0;
    long efficient = 0;
    long rushed = 0;

    void add(const Outcome& out, const GameConfig& cfg) {
        double surplus = out.total_surplus();
        double per_agent = surplus / cfg.n;
        ++runs;
        sum_util += per_agent;
        sumsq_util += per_agent * per_agent;
        sum_surplus += surplus;
        sumsq_surplus += surplus * surplus;
        if (is_assortatively_efficient(out, cfg.entry_cost)) ++efficient;
        if (!out.rushes.empty()) ++rushed;
    }

    BatchAccum& operator+=(const BatchAccum& o) {
        runs += o.runs;
        sum_util += o.sum_util;
        sumsq_util += o.sumsq_util;
        sum_surplus += o.sum_surplus;
        sumsq_surplus += o.sumsq_surplus;
        efficient += o.efficient;
        rushed += o.rushed;
        return *this;
    }

    OutcomeSummary summary() const {
        OutcomeSummary s;
        s.runs = runs;
        auto mean_se = [&](double sum, double sumsq, double& mean, double& se) {
            mean = sum / runs;
            double var = std::max(0.0, sumsq / runs - mean * mean);
            se = std::sqrt(var / runs);
        };
        mean_se(sum_util, sumsq_util, s.mean_agent_utility, s.se_agent_utility);
        mean_se(sum_surplus, sumsq_surplus, s.mean_total_surplus, s.se_total_surplus);
        auto freq_se = [&](long count, double& freq, double& se) {
            freq = static_cast<double>(count) / runs;
            se = std::sqrt(std::max(0.0, freq * (1.0 - freq)) / runs);
        };
        freq_se(efficient, s.efficiency_frequency, s.se_efficiency);
        freq_se(rushed, s.rush_frequency, s.se_rush);
        return s;
    }
};

} // namespace detail

// Runs `runs` independent games with per-run seeds split from base_seed.
// Deterministic for a fixed base_seed regardless of thread count. When
// `keep` is given it receives every outcome, indexed by run.
inline OutcomeSummary run_batch(const GameConfig& config, const PolicySpec& policy,
                                const StrategyProfile& strategies, long runs,
                                std::uint64_t base_seed,
                                std::vector<Outcome>* keep = nullptr,
                                int threads = 0) {
    if (runs < 1) throw std::invalid_argument("run_batch: runs >= 1");
    if (threads <= 0)
        threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = static_cast<int>(std::min<long>(threads, runs));
    if (keep) keep->resize(runs);

    std::vector<detail::BatchAccum> parts(threads);
    auto worker = [&](int w) {
        Engine engine(config, policy, strategies);
        detail::BatchAccum& acc = parts[w];
        for (long r = w; r < runs; r += threads) {
            Rng rng(derive_seed(base_seed, static_cast<std::uint64_t>(r)));
            const Outcome& out = engine.run(rng);
            acc.add(out, config);
            if (keep) (*keep)[r] = out;
        }
    };
    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int w = 0; w < threads; ++w) pool.emplace_back(worker, w);
        for (auto& t : pool) t.join();
    }
    detail::BatchAccum total;
    for (const auto& p : parts) total += p;
    return total.summary();
}

} // namespace waitline
