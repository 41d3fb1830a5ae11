#pragma once

#include "waitline/engine.hpp"
#include "waitline/equilibria.hpp"
#include "waitline/strategies.hpp"

#include <atomic>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

namespace waitline {
namespace verify {

// --- Appendix identities of the continuous-bad-news equilibrium ----------
// All of these are pinned to the calibration n=3, k=2, U(0,1), tau=2/9,
// vhat=1/2.

struct WinProbabilities {
    double nn;  // wins after entering on the no-news curve
    double yn;  // wins after entering on the yes-news curve
};

inline WinProbabilities cbn_win_probabilities(double v) {
    using namespace cbn;
    if (v < 0.0 || v > kVhat)
        throw std::domain_error("cbn_win_probabilities: v outside [0, 1/2]");
    double frac = b_no_news(v) / kTau;
    double inner = 1.0 - (1.0 - v / kVhat) * (1.0 - v / kVhat);
    WinProbabilities p;
    p.nn = 2.0 * kVhat * (1.0 - kVhat) * (v / kVhat) + kVhat * kVhat * frac * inner;
    p.yn = kVhat * kVhat * (1.0 - frac) * inner;
    return p;
}

// Residual of P(Win,NN) b_NN + P(Win,YN) b_YN - t_AE(v) (1-(1-v)^2); zero on
// [0, 1/2] when the equilibrium transfers decompose correctly.
inline double transfer_identity_residual(double v) {
    WinProbabilities p = cbn_win_probabilities(v);
    double lhs = p.nn * cbn::b_no_news(v) + p.yn * cbn::b_yes_news(v);
    double win = 1.0 - (1.0 - v) * (1.0 - v);
    return lhs - cbn::b_initial(v) * win;
}

// Expected utility of a type-v agent bidding the no-news curve at v' >= v
// (an upward deviation; v' = v is the equilibrium payoff).
inline double pi_u(double vprime, double v) {
    using namespace cbn;
    if (!(0.0 <= v && v <= vprime && vprime <= kVhat))
        throw std::domain_error("pi_u: need 0 <= v <= v' <= 1/2");
    double sq = kVhat * kVhat;
    double own = 1.0 - std::pow((kVhat - v) / kVhat, 2.0);
    double dev = 1.0 - std::pow((kVhat - vprime) / kVhat, 2.0);
    double bnn = b_no_news(vprime);
    return sq * (1.0 - bnn / kTau) * own * (v - b_yes_news(v)) +
           sq * (bnn / kTau) * dev * (v - bnn) +
           2.0 * kVhat * (1.0 - kVhat) * (vprime / kVhat) * (v - bnn);
}

// Expected utility of a type-v agent bidding the no-news curve at v' <= v
// (a downward deviation). The middle term integrates over signal times
// arriving between the equilibrium entry and the deviated entry; after such
// a signal the deviator enters with the highest type still in the game.
inline double pi_d(double vprime, double v) {
    using namespace cbn;
    if (!(0.0 <= vprime && vprime <= v && v <= kVhat))
        throw std::domain_error("pi_d: need 0 <= v' <= v <= 1/2");
    double sq = kVhat * kVhat;
    double own = 1.0 - std::pow((kVhat - v) / kVhat, 2.0);
    double devp = 1.0 - std::pow((kVhat - vprime) / kVhat, 2.0);
    double bnn_v = b_no_news(v);
    double bnn_vp = b_no_news(vprime);
    double integral = 0.0;
    if (bnn_v > bnn_vp)
        integral = integrate(
            [&](double tau_prime) {
                double w = inverse(Curve::NoNews, tau_prime);
                double winp = 1.0 - std::pow((kVhat - w) / kVhat, 2.0);
                return (1.0 / kTau) * winp * (v - b_yes_news(w));
            },
            bnn_vp, bnn_v, 1e-12, 1e-10);
    return sq * (1.0 - bnn_v / kTau) * own * (v - b_yes_news(v)) +
           sq * integral +
           sq * (bnn_vp / kTau) * devp * (v - bnn_vp) +
           2.0 * kVhat * (1.0 - kVhat) * (vprime / kVhat) * (v - bnn_vp);
}

// Closed-form partial derivative of pi_d in v'; positive on (0, v).
inline double pi_d_derivative(double vprime, double v) {
    double g = cbn::gamma(vprime);
    double num = (24.0 * vprime * vprime * vprime - 30.0 * vprime * vprime +
                  (9.0 - 2.0 * g) * vprime + g + 4.0) *
                 (v - vprime);
    return num / (8.0 * (1.0 - vprime));
}

// --- payoff equivalence ---------------------------------------------------

struct PayoffBin {
    double v_lo = 0.0, v_hi = 0.0;
    long wins = 0;
    double mean_diff = 0.0;  // simulated payment minus the benchmark transfer
    double se = 0.0;
};

struct PayoffEquivalenceReport {
    bool allocation_efficient = false;  // empirical precondition
    double efficiency_frequency = 0.0;
    double max_gap = 0.0;
    bool within_3se = false;
    std::vector<PayoffBin> bins;
};

// Compares simulated expected payment conditional on winning, per value bin,
// against the assortatively efficient benchmark transfer beta_trivial. When
// the batch is not assortatively efficient the gap is not meaningful and the
// report says so instead.
inline PayoffEquivalenceReport payoff_equivalence_check(const GameConfig& cfg,
                                                        const PolicySpec& policy,
                                                        const StrategyProfile& strategies,
                                                        long runs, std::uint64_t base_seed,
                                                        int bins = 20) {
    PayoffEquivalenceReport rep;
    rep.bins.resize(bins);
    std::vector<double> edges(bins + 1);
    for (int j = 0; j <= bins; ++j)
        edges[j] = cfg.dist.quantile(static_cast<double>(j) / bins * (cfg.dist.bounded() ? 1.0 : 1.0 - 1e-9));
    for (int b = 0; b < bins; ++b) {
        rep.bins[b].v_lo = edges[b];
        rep.bins[b].v_hi = edges[b + 1];
    }

    bool uniform_like = cfg.dist.as_uniform().has_value();
    std::shared_ptr<TabulatedBid> tab;
    if (!uniform_like)
        tab = std::make_shared<TabulatedBid>(
            cfg.dist, [&](double v) { return beta_trivial(v, cfg.n, cfg.k, cfg.dist); });
    auto benchmark = [&](double v) {
        return uniform_like ? beta_trivial(v, cfg.n, cfg.k, cfg.dist) : (*tab)(v);
    };

    std::vector<double> sum(bins, 0.0), sumsq(bins, 0.0);
    std::vector<long> count(bins, 0);
    long efficient = 0;
    Engine engine(cfg, policy, strategies);
    for (long r = 0; r < runs; ++r) {
        Rng rng(derive_seed(base_seed, static_cast<std::uint64_t>(r)));
        const Outcome& out = engine.run(rng);
        if (is_assortatively_efficient(out, cfg.entry_cost)) ++efficient;
        for (const auto& a : out.agents) {
            if (!a.won) continue;
            auto it = std::upper_bound(edges.begin(), edges.end(), a.value);
            int b = std::clamp(static_cast<int>(it - edges.begin()) - 1, 0, bins - 1);
            double diff = a.wait_paid - benchmark(a.value);
            sum[b] += diff;
            sumsq[b] += diff * diff;
            ++count[b];
        }
    }
    rep.efficiency_frequency = static_cast<double>(efficient) / runs;
    rep.allocation_efficient = efficient == runs;

    rep.within_3se = true;
    for (int b = 0; b < bins; ++b) {
        PayoffBin& bin = rep.bins[b];
        bin.wins = count[b];
        if (count[b] == 0) continue;
        bin.mean_diff = sum[b] / count[b];
        double var = std::max(0.0, sumsq[b] / count[b] - bin.mean_diff * bin.mean_diff);
        bin.se = std::sqrt(var / count[b]);
        rep.max_gap = std::max(rep.max_gap, std::abs(bin.mean_diff));
        if (std::abs(bin.mean_diff) > 3.0 * bin.se + 1e-12) rep.within_3se = false;
    }
    return rep;
}

// --- epsilon-best-response search ------------------------------------------

struct DeviationCell {
    double value = 0.0;
    double deviation = 0.0;
    double mean_gain = 0.0;
    double std_err = 0.0;
    bool certified = false;
};

struct DeviationReport {
    std::vector<DeviationCell> cells;
    double max_gain = 0.0;       // gain at the worst cell (largest gain net of noise)
    double argmax_value = 0.0;
    double argmax_deviation = 0.0;
    double epsilon = 0.0;        // the noise allowance at that cell
    bool certified = false;      // max_gain <= epsilon
};

// Monte Carlo certification that no grid deviation improves on the profile.
// Deviations shift the deviator's planned entry times; the rival draws and
// the policy randomness are shared across deviations of a run (common random
// numbers), so the gain estimator is low-variance. Certified at
// epsilon = se_multiple Monte Carlo standard errors per cell.
inline DeviationReport best_response_search(const GameConfig& cfg, const PolicySpec& policy,
                                            const StrategyProfile& strategies,
                                            const std::vector<double>& value_grid,
                                            const std::vector<double>& deviation_grid,
                                            long runs, std::uint64_t base_seed,
                                            double se_multiple = 4.0,
                                            ReactionMode mode = ReactionMode::Obey,
                                            int threads = 0) {
    if (value_grid.empty() || deviation_grid.empty())
        throw std::invalid_argument("best_response_search: empty grid");
    if (threads <= 0)
        threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const int nv = static_cast<int>(value_grid.size());
    const int nd = static_cast<int>(deviation_grid.size());

    DeviationReport rep;
    rep.cells.resize(static_cast<std::size_t>(nv) * nd);

    auto work = [&](int vi) {
        double v = value_grid[vi];
        // one profile per deviation, deviating agent 0
        std::vector<StrategyProfile> dev_profiles(nd);
        for (int di = 0; di < nd; ++di) {
            dev_profiles[di] = strategies;
            dev_profiles[di].overrides[0] =
                make_deviation(strategies.symmetric, deviation_grid[di], mode);
        }
        Engine eq_engine(cfg, policy, strategies);
        std::vector<Engine> dev_engines;
        dev_engines.reserve(nd);
        for (int di = 0; di < nd; ++di)
            dev_engines.emplace_back(cfg, policy, dev_profiles[di]);

        std::vector<double> sum(nd, 0.0), sumsq(nd, 0.0);
        std::vector<double> values(cfg.n);
        for (long r = 0; r < runs; ++r) {
            std::uint64_t run_seed =
                derive_seed(base_seed, static_cast<std::uint64_t>(vi) * runs + r);
            {
                Rng draw(run_seed);
                values[0] = v;
                for (int i = 1; i < cfg.n; ++i) values[i] = cfg.dist.sample(draw);
            }
            Rng rng_eq(~run_seed);
            double u_eq = eq_engine.run(rng_eq, values).agents[0].utility;
            for (int di = 0; di < nd; ++di) {
                Rng rng_dev(~run_seed);
                double u_dev = dev_engines[di].run(rng_dev, values).agents[0].utility;
                double gain = u_dev - u_eq;
                sum[di] += gain;
                sumsq[di] += gain * gain;
            }
        }
        for (int di = 0; di < nd; ++di) {
            DeviationCell& cell = rep.cells[static_cast<std::size_t>(vi) * nd + di];
            cell.value = v;
            cell.deviation = deviation_grid[di];
            cell.mean_gain = sum[di] / runs;
            double var = std::max(0.0, sumsq[di] / runs - cell.mean_gain * cell.mean_gain);
            cell.std_err = std::sqrt(var / runs);
            cell.certified = cell.mean_gain <= se_multiple * cell.std_err + 1e-12;
        }
    };

    if (threads == 1 || nv == 1) {
        for (int vi = 0; vi < nv; ++vi) work(vi);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        int workers = std::min(threads, nv);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int vi = next.fetch_add(1); vi < nv; vi = next.fetch_add(1)) work(vi);
            });
        for (auto& t : pool) t.join();
    }

    // the binding cell is the one with the largest gain net of its noise
    double worst_excess = -std::numeric_limits<double>::infinity();
    for (const auto& cell : rep.cells) {
        double excess = cell.mean_gain - (se_multiple * cell.std_err + 1e-12);
        if (excess > worst_excess) {
            worst_excess = excess;
            rep.max_gain = cell.mean_gain;
            rep.argmax_value = cell.value;
            rep.argmax_deviation = cell.deviation;
            rep.epsilon = se_multiple * cell.std_err + 1e-12;
        }
    }
    rep.certified = rep.max_gain <= rep.epsilon;
    return rep;
}

} // namespace verify
} // namespace waitline
