#pragma once

#include "waitline/engine.hpp"
#include "waitline/equilibria.hpp"
#include "waitline/welfare.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace waitline {

struct NoRootError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The marginal type under the trivial policy with entry cost c: the unique
// root of  v * P(fewer than k of n-1 rivals exceed v) = c.  The marginal
// entrant bids zero, wins exactly when at most k-1 rivals entered, and must
// recoup the entry cost.
inline double reserve_value(double c, int n, int k, const ValueDistribution& F) {
    if (!(c > 0.0)) throw std::invalid_argument("reserve_value: c must be positive");
    if (c >= F.hi()) throw NoRootError("reserve_value: no type can recoup the cost");
    OrderStatSpec spec(n - 1, k);
    auto g = [&](double v) { return v * order_stat_cdf(F, spec, v) - c; };
    double root;
    if (F.bounded()) {
        root = bisect(g, c, F.hi());
    } else {
        double hi0 = std::max({2.0 * c, 2.0 * F.lo(), F.quantile(0.5)});
        root = bisect_expanding(g, c, hi0);
    }
    if (!(root > c)) throw NoRootError("reserve_value: root did not exceed c");
    return root;
}

enum class EntryPolicyKind { Trivial, QueueFullDisclosure };

// The cutoff structure of the two §-style entry-cost equilibria: the trivial
// policy screens at some v_R strictly above c; queue-full disclosure screens
// exactly at c.
struct EntryCostEquilibrium {
    double c;
    double v_r;
    EntryPolicyKind policy;
    std::string bid_rule;

    EntryCostEquilibrium(double c_, double v_r_, EntryPolicyKind pol, std::string rule = {})
        : c(c_), v_r(v_r_), policy(pol), bid_rule(std::move(rule)) {
        if (policy == EntryPolicyKind::Trivial && !(v_r > c))
            throw std::invalid_argument("EntryCostEquilibrium: trivial policy requires v_R > c");
        if (policy == EntryPolicyKind::QueueFullDisclosure && v_r != c)
            throw std::invalid_argument("EntryCostEquilibrium: queue-full policy pins v_R = c");
    }
};

// Value law of the cost-reduced game: each value shifted down by c, negative
// values collected into an atom at 0.
class ShiftedValueLaw {
public:
    ShiftedValueLaw(ValueDistribution base, double c) : base_(std::move(base)), c_(c) {
        if (c < 0.0) throw std::invalid_argument("ShiftedValueLaw: negative shift");
    }

    double cdf(double v) const { return v < 0.0 ? 0.0 : base_.cdf(v + c_); }
    double density(double v) const { return v <= 0.0 ? 0.0 : base_.pdf(v + c_); }
    double atom_at_zero() const { return base_.cdf(c_); }
    double hi() const { return base_.hi() - c_; }
    double sample(Rng& rng) const { return std::max(0.0, base_.quantile(rng.uniform()) - c_); }
    double shift() const { return c_; }
    const ValueDistribution& base() const { return base_; }

private:
    ValueDistribution base_;
    double c_;
};

struct ShiftTransform {
    GameConfig costless;      // same primitives, entry cost removed
    ShiftedValueLaw shifted;  // the value law the costless game should use
};

// The reduction behind the queue-full analysis: playing the entry-cost game
// is equivalent to playing the costless game with values reduced by c.
inline ShiftTransform shift_transform(const GameConfig& cfg) {
    double c = cfg.entry_cost.value_or(0.0);
    GameConfig costless(cfg.n, cfg.k, cfg.dist, std::nullopt, cfg.seed);
    return ShiftTransform{std::move(costless), ShiftedValueLaw(cfg.dist, c)};
}

// order-statistic cdf under the shifted law (the atom at 0 is just a cdf value)
inline double shifted_order_stat_cdf(const ShiftedValueLaw& G, int n, int k, double v) {
    double F = G.cdf(v);
    double S = 1.0 - F;
    double sum = 0.0;
    for (int j = 0; j < k; ++j)
        sum += binomial_coeff(n, j) * std::pow(S, j) * std::pow(F, n - j);
    return std::min(sum, 1.0);
}

struct SurplusRow {
    std::string policy_label;
    double cutoff = 0.0;   // in original value units
    double surplus = 0.0;
    std::string hazard_class;
    std::string prediction_matched;  // "yes" / "no" / "none"
};

struct Corollary2Table {
    std::vector<SurplusRow> rows;
    HazardClass hazard = HazardClass::Neither;
    bool prediction_available = false;
    bool queue_full_strictly_largest = false;
};

// Surplus ranking of three allocations of the entry-cost game, computed in
// the shifted space: queue-full disclosure (assortative above c), the trivial
// policy (assortative above v_R > c), and a rush benchmark where every
// qualifying agent enters at time 0 and items are split uniformly.
inline Corollary2Table corollary2_comparison(double c, int n, int k,
                                             const ValueDistribution& F) {
    Corollary2Table table;
    table.hazard = hazard_monotonicity(F);
    table.prediction_available = table.hazard == HazardClass::Decreasing;

    double v_r = reserve_value(c, n, k, F);
    ShiftedValueLaw G(F, c);
    double hi = G.hi();

    auto surplus_of = [&](auto&& x, double cut_lo) {
        // n * int (1-G) x dt over the shifted density region above the cutoff
        return n * integrate([&](double t) { return (1.0 - G.cdf(t)) * x(t); },
                             cut_lo, hi);
    };
    auto assort = [&](double t) { return shifted_order_stat_cdf(G, n - 1, k, t); };

    double s_qf = surplus_of(assort, 0.0);
    double s_trivial = surplus_of(assort, v_r - c);
    // rush benchmark: all agents above the cost rush at time zero
    double q = 1.0 - G.atom_at_zero();
    double win_in_rush = 0.0;
    for (int b = 0; b <= n - 1; ++b)
        win_in_rush += binomial_pmf(n - 1, b, q) * std::min(1.0, static_cast<double>(k) / (1 + b));
    double s_rush = surplus_of([&](double) { return win_in_rush; }, 0.0);

    std::string hz = table.hazard == HazardClass::Increasing ? "increasing"
                     : table.hazard == HazardClass::Decreasing ? "decreasing"
                                                               : "neither";
    auto verdict = [&](bool strictly_below_qf) {
        if (!table.prediction_available) return std::string("none");
        return strictly_below_qf ? std::string("yes") : std::string("no");
    };
    table.rows.push_back({"queue-full", c, s_qf, hz,
                          table.prediction_available
                              ? (s_qf > s_trivial && s_qf > s_rush ? "yes" : "no")
                              : "none"});
    table.rows.push_back({"trivial", v_r, s_trivial, hz, verdict(s_qf > s_trivial)});
    table.rows.push_back({"rush", c, s_rush, hz, verdict(s_qf > s_rush)});
    table.queue_full_strictly_largest = s_qf > s_trivial && s_qf > s_rush;
    return table;
}

} // namespace waitline
