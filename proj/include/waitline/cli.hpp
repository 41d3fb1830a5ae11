#pragma once

#include "waitline/config.hpp"
#include "waitline/io.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace waitline {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailure = 1;
inline constexpr int kExitConfigError = 2;

struct CliOptions {
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<long> runs;
    std::optional<std::string> format;
    std::optional<long> particles;
};

namespace detail {

struct LoadedExperiment {
    ExperimentConfig cfg;
    Provenance prov;
    std::string out_dir;
};

inline LoadedExperiment load_experiment(const CliOptions& opt) {
    nlohmann::json doc = load_json_file(opt.config_path);
    ExperimentConfig cfg = parse_experiment(doc);
    std::uint64_t seed = resolve_seed(doc, opt.seed);
    cfg.game.seed = seed;
    if (opt.runs) cfg.runs = *opt.runs;
    if (opt.format) cfg.format = *opt.format;
    if (opt.particles) cfg.belief_particles = *opt.particles;
    std::string out_dir = opt.out_dir.value_or(cfg.output);
    Provenance prov{hash_hex(fnv1a64(doc.dump())), seed};
    return {std::move(cfg), prov, out_dir};
}

inline std::string join_path(const std::string& dir, const std::string& file) {
    return (std::filesystem::path(dir) / file).string();
}

} // namespace detail

inline int cmd_simulate(const CliOptions& opt, std::ostream& log = std::cout) {
    auto [cfg, prov, out_dir] = detail::load_experiment(opt);
    std::filesystem::create_directories(out_dir);

    std::vector<Outcome> outcomes;
    OutcomeSummary summary = run_batch(cfg.game, cfg.policy, cfg.strategies, cfg.runs,
                                       cfg.game.seed, &outcomes);

    if (cfg.format == "json") {
        nlohmann::json j;
        prov.stamp(j);
        auto& runs = j["runs"] = nlohmann::json::array();
        for (std::size_t r = 0; r < outcomes.size(); ++r)
            runs.push_back(outcome_json(outcomes[r], static_cast<long>(r)));
        write_text(detail::join_path(out_dir, "outcomes.json"), j.dump(2) + "\n");
    } else {
        write_text(detail::join_path(out_dir, "outcomes.csv"), outcomes_csv(outcomes, prov));
    }
    write_text(detail::join_path(out_dir, "summary.json"), summary_json(summary, prov));

    if (cfg.belief_particles) {
        History hist;
        Rng rng(derive_seed(cfg.game.seed, 0));
        run_game(cfg.game, cfg.policy, cfg.strategies, rng, &hist);
        Rng trng(derive_seed(cfg.game.seed, 0x6265ULL));
        TraceOptions topt;
        topt.drift_points = cfg.belief_drift_points;
        BeliefTrace trace = belief_trace(cfg.game, cfg.policy, cfg.strategies, hist.messages(),
                                         *cfg.belief_particles, trng, topt);
        write_text(detail::join_path(out_dir, "beliefs.csv"), beliefs_csv(trace, prov));
    }

    log << "simulate: " << cfg.runs << " runs, efficiency " << summary.efficiency_frequency
        << ", mean surplus " << summary.mean_total_surplus << "\n";
    return kExitOk;
}

namespace detail {

struct CheckList {
    bool all_ok = true;
    nlohmann::json results = nlohmann::json::array();

    void add(const std::string& name, bool ok, double value = 0.0) {
        results.push_back({{"check", name}, {"pass", ok}, {"value", value}});
        all_ok = all_ok && ok;
    }
};

// Analytic identities of the continuous-bad-news construction.
inline void run_appendix_d(CheckList& checks) {
    using namespace verify;
    double worst = 0.0;
    for (int i = 0; i <= 500; ++i) {
        double v = 0.5 * i / 500.0;
        worst = std::max(worst, std::abs(transfer_identity_residual(v)));
    }
    checks.add("transfer_identity_residual_501grid", worst < 1e-9, worst);
    checks.add("gamma_at_half", std::abs(cbn::gamma(0.5) - 6.5) < 1e-12, cbn::gamma(0.5));
    checks.add("b_yn_at_half", std::abs(cbn::b_yes_news(0.5) - 1.0 / 6.0) < 1e-12,
               cbn::b_yes_news(0.5));
    for (double v : {0.1, 0.25, 0.4}) {
        double gap = pi_u(0.5, v) - pi_u(v, v);
        double formula = -(1.0 / 12.0) * (1.0 - 2.0 * v) * (1.0 - 2.0 * v) * (2.0 - v);
        checks.add("pi_u_gap_at_top_v=" + fmt_double(v), std::abs(gap - formula) < 1e-9,
                   gap - formula);
    }
    bool positive = true, fd_ok = true;
    for (double v : {0.2, 0.35, 0.5}) {
        for (int i = 1; i < 8; ++i) {
            double vp = v * i / 8.0;
            double closed = pi_d_derivative(vp, v);
            double h = 1e-5;
            double fd = (pi_d(std::min(vp + h, v), v) - pi_d(std::max(vp - h, 0.0), v)) /
                        (std::min(vp + h, v) - std::max(vp - h, 0.0));
            positive = positive && closed > 0.0;
            fd_ok = fd_ok && std::abs(fd - closed) <= 1e-4 * std::max(1.0, std::abs(closed));
        }
    }
    checks.add("pi_d_derivative_positive", positive);
    checks.add("pi_d_closed_vs_finite_difference", fd_ok);
}

} // namespace detail

inline int cmd_verify(const CliOptions& opt, std::ostream& log = std::cout) {
    auto [cfg, prov, out_dir] = detail::load_experiment(opt);
    std::filesystem::create_directories(out_dir);
    nlohmann::json vj = cfg.raw.value("verify", nlohmann::json::object());
    std::vector<std::string> suites =
        vj.value("suites", std::vector<std::string>{"appendix-d"});

    detail::CheckList checks;
    for (const std::string& suite : suites) {
        if (suite == "appendix-d") {
            detail::run_appendix_d(checks);
        } else if (suite == "payoff-equivalence") {
            long runs = vj.value("runs", cfg.runs);
            auto rep = verify::payoff_equivalence_check(cfg.game, cfg.policy, cfg.strategies,
                                                        runs, cfg.game.seed,
                                                        vj.value("bins", 20));
            checks.add("payoff_equivalence_allocation_efficient", rep.allocation_efficient,
                       rep.efficiency_frequency);
            checks.add("payoff_equivalence_within_3se",
                       rep.allocation_efficient && rep.within_3se, rep.max_gap);
            nlohmann::json bins = nlohmann::json::array();
            for (const auto& b : rep.bins)
                bins.push_back({{"v_lo", b.v_lo}, {"v_hi", b.v_hi}, {"wins", b.wins},
                                {"mean_diff", b.mean_diff}, {"se", b.se}});
            nlohmann::json out;
            prov.stamp(out);
            out["bins"] = bins;
            out["max_gap"] = rep.max_gap;
            write_text(detail::join_path(out_dir, "payoff_equivalence.json"), out.dump(2) + "\n");
        } else if (suite == "best-response") {
            int nv = vj.value("value_grid", 21);
            int ndv = vj.value("deviation_grid", 21);
            double span = vj.value("deviation_span", 0.15);
            long runs = vj.value("runs_per_cell", 100000L);
            double se_mult = vj.value("se_multiple", 4.0);
            std::vector<double> values(nv), devs(ndv);
            double vmax = cfg.game.dist.bounded() ? cfg.game.dist.hi()
                                                  : cfg.game.dist.quantile(0.99);
            for (int i = 0; i < nv; ++i) values[i] = vmax * i / std::max(1, nv - 1);
            for (int i = 0; i < ndv; ++i)
                devs[i] = -span + 2.0 * span * i / std::max(1, ndv - 1);
            auto rep = verify::best_response_search(cfg.game, cfg.policy, cfg.strategies,
                                                    values, devs, runs, cfg.game.seed, se_mult);
            checks.add("best_response_certified", rep.certified, rep.max_gain);
            write_text(detail::join_path(out_dir, "deviation_report.csv"),
                       deviation_report_csv(rep, prov));
            if (!rep.certified) {
                log << "failing cells:\n";
                for (const auto& c : rep.cells)
                    if (!c.certified)
                        log << "  value=" << c.value << " deviation=" << c.deviation
                            << " gain=" << c.mean_gain << " se=" << c.std_err << "\n";
            }
        } else {
            throw ConfigError("unknown verify suite: " + suite);
        }
    }

    nlohmann::json out;
    prov.stamp(out);
    out["checks"] = checks.results;
    out["all_pass"] = checks.all_ok;
    write_text(detail::join_path(out_dir, "verify.json"), out.dump(2) + "\n");
    for (const auto& c : checks.results)
        log << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << c["check"].get<std::string>()
            << "\n";
    return checks.all_ok ? kExitOk : kExitVerifyFailure;
}

inline int cmd_welfare(const CliOptions& opt, std::ostream& log = std::cout) {
    nlohmann::json doc = load_json_file(opt.config_path);
    nlohmann::json wj = doc.value("welfare", nlohmann::json::object());
    Provenance prov{hash_hex(fnv1a64(doc.dump())), resolve_seed(doc, opt.seed)};
    std::string out_dir = opt.out_dir.value_or(doc.value("output", std::string("out")));
    std::filesystem::create_directories(out_dir);

    bool all_predictions_ok = true;

    if (wj.contains("comparisons")) {
        std::string s = prov.comment_line();
        s += "label,n,k,rule_a,rule_b,surplus_a,surplus_b,order,hazard_class,prediction,matched\n";
        for (const auto& cj : wj["comparisons"]) {
            ValueDistribution F = parse_distribution(cj.at("distribution"));
            int n = cj.at("n"), k = cj.at("k");
            auto make_rule = [&](const std::string& r) {
                if (r == "assortative") return AllocationRule::assortative_top_k(n, k, F);
                if (r == "random") return AllocationRule::random_proportional(n, k);
                throw ConfigError("unknown rule: " + r);
            };
            std::string ra = cj.at("rule_a"), rb = cj.at("rule_b");
            auto res = welfare_order_check(F, n, k, make_rule(ra), make_rule(rb));
            all_predictions_ok = all_predictions_ok && res.matched;
            const char* ord = res.order == SurplusOrder::Lower ? "lower"
                              : res.order == SurplusOrder::Higher ? "higher"
                                                                  : "equal";
            const char* hz = res.hazard == HazardClass::Increasing ? "increasing"
                             : res.hazard == HazardClass::Decreasing ? "decreasing"
                                                                     : "neither";
            s += cj.value("label", std::string("cmp")) + ',' + std::to_string(n) + ',' +
                 std::to_string(k) + ',' + ra + ',' + rb + ',' + fmt_double(res.surplus_a) +
                 ',' + fmt_double(res.surplus_b) + ',' + ord + ',' + hz + ',' +
                 res.prediction + ',' + (res.matched ? "yes" : "no") + '\n';
        }
        write_text(detail::join_path(out_dir, "welfare_table.csv"), s);
    }

    if (wj.contains("corollary2")) {
        const auto& cj = wj["corollary2"];
        ValueDistribution F = parse_distribution(cj.at("distribution"));
        auto table = corollary2_comparison(cj.at("c"), cj.at("n"), cj.at("k"), F);
        write_text(detail::join_path(out_dir, "corollary2.csv"),
                   surplus_table_csv(table, prov));
        for (const auto& row : table.rows)
            all_predictions_ok = all_predictions_ok && row.prediction_matched != "no";
        log << "corollary2: queue-full strictly largest = "
            << (table.queue_full_strictly_largest ? "yes" : "no") << "\n";
    }

    return all_predictions_ok ? kExitOk : kExitVerifyFailure;
}

} // namespace waitline
