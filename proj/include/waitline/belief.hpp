#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace waitline {

enum class FosdOrder { StrictlyDominates, WeaklyDominates, Equal, Incomparable };

// Common belief over the positive number of items remaining, kappa in {1..k}.
class Belief {
public:
    explicit Belief(std::vector<double> pmf) : pmf_(std::move(pmf)) {
        if (pmf_.empty()) throw std::invalid_argument("Belief: empty support");
        double sum = 0.0;
        for (double p : pmf_) {
            if (p < -1e-15) throw std::invalid_argument("Belief: negative mass");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("Belief: pmf must sum to 1");
    }

    static Belief point_mass(int kappa, int k) {
        std::vector<double> p(k, 0.0);
        p.at(kappa - 1) = 1.0;
        return Belief(std::move(p));
    }

    // builds from possibly-unnormalized weights over {1..k}
    static Belief from_weights(std::vector<double> w) {
        double sum = 0.0;
        for (double x : w) sum += x;
        if (!(sum > 0.0)) throw std::invalid_argument("Belief: zero total weight");
        for (double& x : w) x /= sum;
        return Belief(std::move(w));
    }

    int max_items() const { return static_cast<int>(pmf_.size()); }
    double pmf(int kappa) const { return pmf_.at(kappa - 1); }
    const std::vector<double>& probs() const { return pmf_; }

    double cdf(int kappa) const {
        double c = 0.0;
        for (int j = 1; j <= kappa && j <= max_items(); ++j) c += pmf_[j - 1];
        return c;
    }

private:
    std::vector<double> pmf_;
};

// a dominates b when a puts more mass on high item counts: CDF_a <= CDF_b
// pointwise, strict somewhere. Differences inside tol are treated as ties;
// dominance that exists only inside tol is reported as weak. The result
// classifies a relative to b, so "b dominates a" comes back Incomparable and
// the caller flips the arguments to test the other direction.
inline FosdOrder fosd_compare(const Belief& a, const Belief& b, double tol = 1e-12) {
    if (a.max_items() != b.max_items())
        throw std::invalid_argument("fosd_compare: beliefs on different supports");
    bool a_strict = false, b_strict = false, a_sub = false, b_sub = false;
    double ca = 0.0, cb = 0.0;
    for (int j = 1; j <= a.max_items(); ++j) {
        ca += a.pmf(j);
        cb += b.pmf(j);
        if (ca < cb - tol) a_strict = true;
        else if (ca < cb) a_sub = true;
        if (cb < ca - tol) b_strict = true;
        else if (cb < ca) b_sub = true;
    }
    if (a_strict && b_strict) return FosdOrder::Incomparable;
    if (a_strict) return FosdOrder::StrictlyDominates;
    if (b_strict) return FosdOrder::Incomparable;
    if (a_sub && !b_sub) return FosdOrder::WeaklyDominates;
    return FosdOrder::Equal;
}

// dominance as a predicate pair used by the sudden-bad-news detector
inline bool fosd_weakly_dominates(const Belief& a, const Belief& b, double tol = 1e-12) {
    FosdOrder o = fosd_compare(a, b, tol);
    return o != FosdOrder::Incomparable;
}

inline bool fosd_strictly_dominates(const Belief& a, const Belief& b, double tol = 1e-12) {
    return fosd_compare(a, b, tol) == FosdOrder::StrictlyDominates;
}

// Joint pmf over (remaining agents, remaining items); every supported state
// must keep demand above supply.
class SupplyDemandBelief {
public:
    struct State {
        int agents;
        int items;
        double prob;
    };

    explicit SupplyDemandBelief(std::vector<State> states) : states_(std::move(states)) {
        double sum = 0.0;
        for (const auto& s : states_) {
            if (s.prob < 0) throw std::invalid_argument("SupplyDemandBelief: negative mass");
            if (!(s.agents > s.items) || s.items < 1)
                throw std::invalid_argument("SupplyDemandBelief: need agents > items >= 1");
            sum += s.prob;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("SupplyDemandBelief: pmf must sum to 1");
    }

    static SupplyDemandBelief point_mass(int agents, int items) {
        return SupplyDemandBelief({State{agents, items, 1.0}});
    }

    // the in-game embedding: kappa items remaining implies N-K+kappa agents
    static SupplyDemandBelief from_items_belief(const Belief& mu, int N, int K) {
        std::vector<State> st;
        for (int kappa = 1; kappa <= mu.max_items(); ++kappa)
            if (mu.pmf(kappa) > 0.0)
                st.push_back({N - K + kappa, kappa, mu.pmf(kappa)});
        return SupplyDemandBelief(std::move(st));
    }

    const std::vector<State>& states() const { return states_; }

private:
    std::vector<State> states_;
};

} // namespace waitline
