#pragma once

#include "waitline/dist.hpp"
#include "waitline/engine.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace waitline {

enum class RuleKind { AssortativeTopK, RandomProportional, CutoffAssortative, Empirical, Custom };

// Interim allocation rule: win probability as a function of type.
struct AllocationRule {
    std::function<double(double)> x;
    RuleKind provenance = RuleKind::Custom;
    std::vector<double> breakpoints;  // discontinuities, passed to the integrator

    static AllocationRule assortative_top_k(int n, int k, const ValueDistribution& F) {
        AllocationRule r;
        r.provenance = RuleKind::AssortativeTopK;
        OrderStatSpec spec(n - 1, k);
        r.x = [spec, F](double v) { return order_stat_cdf(F, spec, v); };
        return r;
    }

    static AllocationRule random_proportional(int n, int k) {
        AllocationRule r;
        r.provenance = RuleKind::RandomProportional;
        double p = static_cast<double>(k) / n;
        r.x = [p](double) { return p; };
        return r;
    }

    static AllocationRule cutoff_assortative(double vstar, int n, int k,
                                             const ValueDistribution& F) {
        AllocationRule r;
        r.provenance = RuleKind::CutoffAssortative;
        r.breakpoints.push_back(vstar);
        OrderStatSpec spec(n - 1, k);
        r.x = [vstar, spec, F](double v) {
            return v >= vstar ? order_stat_cdf(F, spec, v) : 0.0;
        };
        return r;
    }

    // Interim win frequencies binned over value quantiles.
    static AllocationRule empirical(std::span<const Outcome> outcomes,
                                    const ValueDistribution& F, int bins = 100) {
        if (outcomes.empty()) throw std::invalid_argument("empirical rule: empty batch");
        auto edges = std::make_shared<std::vector<double>>();
        edges->reserve(bins + 1);
        for (int j = 0; j <= bins; ++j) edges->push_back(F.quantile(static_cast<double>(j) / bins));
        std::vector<long> wins(bins, 0), count(bins, 0);
        for (const auto& out : outcomes) {
            for (const auto& a : out.agents) {
                auto it = std::upper_bound(edges->begin(), edges->end(), a.value);
                int b = std::clamp(static_cast<int>(it - edges->begin()) - 1, 0, bins - 1);
                ++count[b];
                if (a.won) ++wins[b];
            }
        }
        auto probs = std::make_shared<std::vector<double>>(bins, 0.0);
        for (int b = 0; b < bins; ++b)
            (*probs)[b] = count[b] ? static_cast<double>(wins[b]) / count[b] : 0.0;
        AllocationRule r;
        r.provenance = RuleKind::Empirical;
        r.breakpoints.assign(edges->begin() + 1, edges->end() - 1);
        r.x = [edges, probs, bins](double v) {
            auto it = std::upper_bound(edges->begin(), edges->end(), v);
            int b = std::clamp(static_cast<int>(it - edges->begin()) - 1, 0, bins - 1);
            return (*probs)[b];
        };
        return r;
    }
};

// Expected total surplus of the money-burning mechanism implementing `rule`:
//   n * int (1-F(t)) x(t) dt
// over the density region, from 0 upward (types below 0 are never allocated).
inline double virtual_surplus(const AllocationRule& rule, int n, const ValueDistribution& F) {
    double lo = std::max(0.0, F.lo());
    double hi = F.hi();
    std::vector<double> cuts{lo};
    for (double b : rule.breakpoints)
        if (b > lo && b < hi) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(hi);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        total += integrate([&](double t) { return (1.0 - F.cdf(t)) * rule.x(t); },
                           cuts[i], cuts[i + 1]);
    return n * total;
}

enum class SurplusOrder { Lower, Higher, Equal };

struct WelfareOrderResult {
    double surplus_a = 0.0;
    double surplus_b = 0.0;
    SurplusOrder order = SurplusOrder::Equal;  // a relative to b
    HazardClass hazard = HazardClass::Neither;
    std::string prediction;  // "ae-lower", "ae-higher", or "none"
    bool matched = true;
};

// Numeric comparison of two allocation rules together with the hazard-class
// prediction for assortative efficiency (when one side is assortative and
// the hazard rate is monotone).
inline WelfareOrderResult welfare_order_check(const ValueDistribution& F, int n, int k,
                                              const AllocationRule& rule_a,
                                              const AllocationRule& rule_b) {
    (void)k;
    WelfareOrderResult res;
    res.surplus_a = virtual_surplus(rule_a, n, F);
    res.surplus_b = virtual_surplus(rule_b, n, F);
    double tol = 1e-9 * std::max({1.0, std::abs(res.surplus_a), std::abs(res.surplus_b)});
    if (std::abs(res.surplus_a - res.surplus_b) <= tol) res.order = SurplusOrder::Equal;
    else res.order = res.surplus_a < res.surplus_b ? SurplusOrder::Lower : SurplusOrder::Higher;

    res.hazard = hazard_monotonicity(F);
    bool a_ae = rule_a.provenance == RuleKind::AssortativeTopK;
    bool b_ae = rule_b.provenance == RuleKind::AssortativeTopK;
    if (res.hazard == HazardClass::Neither || a_ae == b_ae) {
        res.prediction = "none";
        res.matched = true;
        return res;
    }
    // increasing hazard: the assortative allocation has weakly lower surplus
    bool ae_lower = res.hazard == HazardClass::Increasing;
    res.prediction = ae_lower ? "ae-lower" : "ae-higher";
    const AllocationRule& ae = a_ae ? rule_a : rule_b;
    (void)ae;
    double s_ae = a_ae ? res.surplus_a : res.surplus_b;
    double s_other = a_ae ? res.surplus_b : res.surplus_a;
    res.matched = ae_lower ? s_ae <= s_other + tol : s_ae >= s_other - tol;
    return res;
}

struct SurplusReport {
    double total_surplus = 0.0;
    double allocation_value = 0.0;
    double waits_burned = 0.0;
    double entry_costs_burned = 0.0;
    double efficiency_frequency = 0.0;
    double total_surplus_se = 0.0;
    double efficiency_frequency_se = 0.0;
    long runs = 0;
};

inline SurplusReport summarize(std::span<const Outcome> outcomes,
                               std::optional<double> entry_cost = std::nullopt) {
    if (outcomes.empty()) throw std::invalid_argument("summarize: empty batch");
    SurplusReport rep;
    rep.runs = static_cast<long>(outcomes.size());
    double sumsq_surplus = 0.0;
    long efficient = 0;
    for (const auto& out : outcomes) {
        double s = out.total_surplus();
        rep.total_surplus += s;
        sumsq_surplus += s * s;
        rep.allocation_value += out.allocation_value();
        rep.waits_burned += out.waits_burned();
        rep.entry_costs_burned += out.entry_costs_burned();
        if (is_assortatively_efficient(out, entry_cost)) ++efficient;
    }
    double n = static_cast<double>(rep.runs);
    rep.total_surplus /= n;
    rep.allocation_value /= n;
    rep.waits_burned /= n;
    rep.entry_costs_burned /= n;
    rep.total_surplus_se = std::sqrt(std::max(0.0, sumsq_surplus / n - rep.total_surplus * rep.total_surplus) / n);
    rep.efficiency_frequency = efficient / n;
    rep.efficiency_frequency_se =
        std::sqrt(std::max(0.0, rep.efficiency_frequency * (1.0 - rep.efficiency_frequency)) / n);
    return rep;
}

} // namespace waitline
