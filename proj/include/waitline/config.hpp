#pragma once

#include "waitline/engine.hpp"
#include "waitline/policy.hpp"
#include "waitline/strategies.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>

namespace waitline {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline ValueDistribution parse_distribution(const nlohmann::json& j) {
    if (!j.contains("kind") || !j.contains("params"))
        throw ConfigError("distribution needs kind and params");
    std::string kind = j["kind"];
    auto params = j["params"].get<std::vector<double>>();
    auto need = [&](std::size_t n) {
        if (params.size() != n)
            throw ConfigError("distribution '" + kind + "' expects " + std::to_string(n) +
                              " params");
    };
    if (kind == "uniform") {
        need(2);
        return ValueDistribution::uniform(params[0], params[1]);
    }
    if (kind == "pareto") {
        need(2);
        return ValueDistribution::pareto(params[0], params[1]);
    }
    if (kind == "weibull") {
        need(2);
        return ValueDistribution::weibull(params[0], params[1]);
    }
    throw ConfigError("unknown distribution kind: " + kind);
}

inline PolicySpec parse_policy(const nlohmann::json& j) {
    std::string name = j.value("policy", "trivial");
    nlohmann::json params = j.value("params", nlohmann::json::object());
    if (name == "trivial") return PolicySpec::trivial();
    if (name == "fixed_time") return PolicySpec::fixed_time(params.at("tau"));
    if (name == "full_revelation") return PolicySpec::full_revelation();
    if (name == "fixed_time_state")
        return PolicySpec::fixed_time_and_state(params.at("tau"), params.at("threshold"));
    if (name == "threshold") return PolicySpec::threshold_reached(params.at("k_prime"));
    if (name == "queue_full") return PolicySpec::queue_full();
    if (name == "continuous_bad_news") return PolicySpec::continuous_bad_news(params.at("tau"));
    throw ConfigError("unknown policy: " + name);
}

struct ExperimentConfig {
    GameConfig game;
    PolicySpec policy;
    std::string strategy_name;
    StrategyProfile strategies;
    long runs = 1;
    std::string output = "out";
    std::string format = "csv";
    std::optional<long> belief_particles;
    int belief_drift_points = 9;
    nlohmann::json raw;  // full document, for hashing and subcommand blocks
};

inline ExperimentConfig parse_experiment(const nlohmann::json& j) {
    if (!j.contains("game")) throw ConfigError("config needs a game block");
    const auto& g = j["game"];
    std::optional<double> cost;
    if (g.contains("entry_cost")) cost = g["entry_cost"].get<double>();
    GameConfig game(g.at("n"), g.at("k"), parse_distribution(g.at("distribution")), cost,
                    g.value("seed", 0ULL));

    PolicySpec policy = j.contains("policy") ? parse_policy(j["policy"]) : PolicySpec::trivial();

    std::string name = "trivial-eq";
    StrategyProfile strategies;
    if (j.contains("strategy")) {
        const auto& s = j["strategy"];
        name = s.value("name", "trivial-eq");
        if (name == "grid-custom") {
            strategies = make_grid_custom(s.at("values").get<std::vector<double>>(),
                                          s.at("bids").get<std::vector<double>>());
        } else {
            strategies = make_named_profile(name, game);
        }
        if (s.contains("bid_shift")) {
            double shift = s["bid_shift"];
            strategies.symmetric = make_deviation(strategies.symmetric, shift);
        }
    } else {
        strategies = make_named_profile(name, game);
    }

    ExperimentConfig cfg{std::move(game), policy, name, std::move(strategies)};
    cfg.runs = j.value("runs", 1L);
    if (cfg.runs < 1) throw ConfigError("runs must be >= 1");
    cfg.output = j.value("output", std::string("out"));
    cfg.format = j.value("format", std::string("csv"));
    if (cfg.format != "csv" && cfg.format != "json")
        throw ConfigError("format must be csv or json");
    if (j.contains("beliefs")) {
        cfg.belief_particles = j["beliefs"].value("particles", 5000L);
        cfg.belief_drift_points = j["beliefs"].value("drift_points", 9);
    }
    cfg.raw = j;
    return cfg;
}

inline nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return j;
}

// precedence: explicit flag > SEED env var > config value
inline std::uint64_t resolve_seed(const nlohmann::json& config,
                                  std::optional<std::uint64_t> flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("SEED")) return std::strtoull(env, nullptr, 10);
    if (config.contains("game") && config["game"].contains("seed"))
        return config["game"]["seed"].get<std::uint64_t>();
    return 0;
}

} // namespace waitline
