#pragma once

#include "waitline/rng.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace waitline {

enum class PolicyKind {
    Trivial,
    FixedTime,
    FullRevelation,
    FixedTimeAndState,
    ThresholdReached,
    QueueFull,
    ContinuousBadNews,
};

enum class MessagePayloadKind { QueueLength, QueueFullNotice, GoodNewsSignal };

// Structured payloads: belief updates need machine-readable content.
struct Message {
    MessagePayloadKind payload;
    int queue_length = 0;  // meaningful for QueueLength only

    bool operator==(const Message&) const = default;
};

struct PolicySpec {
    PolicyKind kind = PolicyKind::Trivial;
    double tau = 0.0;    // FixedTime / FixedTimeAndState / ContinuousBadNews
    int threshold = 0;   // FixedTimeAndState: announce iff |queue| == threshold
    int k_prime = 0;     // ThresholdReached: announce when remaining == k_prime

    static PolicySpec trivial() { return {PolicyKind::Trivial}; }
    static PolicySpec fixed_time(double tau) {
        require_positive(tau);
        return {PolicyKind::FixedTime, tau};
    }
    static PolicySpec full_revelation() { return {PolicyKind::FullRevelation}; }
    static PolicySpec fixed_time_and_state(double tau, int threshold) {
        require_positive(tau);
        if (threshold < 0) throw std::invalid_argument("policy: threshold must be >= 0");
        return {PolicyKind::FixedTimeAndState, tau, threshold};
    }
    static PolicySpec threshold_reached(int k_prime) {
        if (k_prime < 0) throw std::invalid_argument("policy: k_prime must be >= 0");
        return {PolicyKind::ThresholdReached, 0.0, 0, k_prime};
    }
    static PolicySpec queue_full() { return {PolicyKind::QueueFull}; }
    static PolicySpec continuous_bad_news(double tau) {
        require_positive(tau);
        return {PolicyKind::ContinuousBadNews, tau};
    }

private:
    static void require_positive(double tau) {
        if (!(tau > 0.0)) throw std::invalid_argument("policy: tau must be positive");
    }
};

// What the announcer can see of the game when asked for her next message:
// the public message log plus the private queue log.
struct AnnouncerView {
    int queue_length = 0;          // current |h^Q|
    int capacity = 0;              // k
    double first_entry_time = -1;  // clock time of the first entry, -1 if none
    int last_announced_length = 0; // queue length in the latest QueueLength message
};

struct PlannedMessage {
    Message message;
    double time;
};

// Per-game policy state. The spec is immutable and shared; any randomness
// (the continuous-bad-news draw) is fixed here at game start so replays with
// the same seed are identical.
class PolicyState {
public:
    PolicyState(const PolicySpec& spec, Rng& rng) : spec_(spec) {
        if (spec.kind == PolicyKind::ContinuousBadNews)
            signal_time_ = rng.uniform() * spec.tau;
    }

    // The next (message, time) the announcer would send given the current
    // clock and history, or nullopt. Returned time never exceeds `now`.
    // The engine re-queries whenever the history changes, so plans that are
    // conditional on nothing else happening stay consistent.
    std::optional<PlannedMessage> next_message(double now, const AnnouncerView& h) {
        switch (spec_.kind) {
            case PolicyKind::Trivial:
                return std::nullopt;

            case PolicyKind::FixedTime:
                if (sent_ || now < spec_.tau) return std::nullopt;
                return PlannedMessage{queue_len_msg(h), spec_.tau};

            case PolicyKind::FullRevelation:
                if (h.queue_length == h.last_announced_length) return std::nullopt;
                return PlannedMessage{queue_len_msg(h), now};

            case PolicyKind::FixedTimeAndState:
                if (sent_ || now < spec_.tau) return std::nullopt;
                if (h.queue_length != spec_.threshold) return std::nullopt;
                return PlannedMessage{queue_len_msg(h), std::min(now, spec_.tau)};

            case PolicyKind::ThresholdReached:
                if (sent_) return std::nullopt;
                if (h.capacity - h.queue_length != spec_.k_prime) return std::nullopt;
                return PlannedMessage{queue_len_msg(h), now};

            case PolicyKind::QueueFull:
                if (sent_ || h.queue_length != h.capacity) return std::nullopt;
                return PlannedMessage{Message{MessagePayloadKind::QueueFullNotice}, now};

            case PolicyKind::ContinuousBadNews: {
                if (sent_) return std::nullopt;
                // The signal fires at signal_time_ iff the queue was still
                // empty when the clock passed tau. Entries at or above tau
                // kill it; entries below tau do not.
                if (h.first_entry_time >= spec_.tau) return std::nullopt;
                if (signal_time_ > now) return std::nullopt;
                return PlannedMessage{Message{MessagePayloadKind::GoodNewsSignal},
                                      signal_time_};
            }
        }
        return std::nullopt;
    }

    void mark_sent() { sent_ = true; }

    double drawn_signal_time() const { return signal_time_; }

private:
    Message queue_len_msg(const AnnouncerView& h) const {
        return Message{MessagePayloadKind::QueueLength, h.queue_length};
    }

    PolicySpec spec_;
    bool sent_ = false;
    double signal_time_ = -1.0;
};

inline std::string to_string(MessagePayloadKind k) {
    switch (k) {
        case MessagePayloadKind::QueueLength: return "queue_length";
        case MessagePayloadKind::QueueFullNotice: return "queue_full";
        case MessagePayloadKind::GoodNewsSignal: return "good_news";
    }
    return "?";
}

} // namespace waitline
