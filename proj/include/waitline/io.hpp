#pragma once

#include "waitline/belief_trace.hpp"
#include "waitline/engine.hpp"
#include "waitline/entrycost.hpp"
#include "waitline/verify.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace waitline {

// Deterministic shortest-roundtrip float text, so identical runs produce
// identical bytes.
inline std::string fmt_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    double back = std::strtod(buf, nullptr);
    if (back == x) {
        for (int prec = 1; prec <= 16; ++prec) {
            char shorter[32];
            std::snprintf(shorter, sizeof(shorter), "%.*g", prec, x);
            if (std::strtod(shorter, nullptr) == x) return shorter;
        }
    }
    return buf;
}

// FNV-1a over the canonical config dump; embedded in every output file.
inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct Provenance {
    std::string config_hash;
    std::uint64_t seed = 0;

    std::string comment_line() const {
        return "# config_hash=" + config_hash + " seed=" + std::to_string(seed) + "\n";
    }
    void stamp(nlohmann::json& j) const {
        j["config_hash"] = config_hash;
        j["seed"] = seed;
    }
};

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
}

inline std::string outcomes_csv(std::span<const Outcome> outcomes, const Provenance& prov) {
    std::string s = prov.comment_line();
    s += "run_id,agent_id,value,attempted,entry_time,won,wait_paid,entry_cost_paid,utility\n";
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
        const Outcome& out = outcomes[r];
        for (std::size_t i = 0; i < out.agents.size(); ++i) {
            const AgentOutcome& a = out.agents[i];
            s += std::to_string(r) + ',' + std::to_string(i) + ',' + fmt_double(a.value) + ',' +
                 (a.attempted ? '1' : '0') + ',' +
                 (a.entry_time ? fmt_double(*a.entry_time) : std::string()) + ',' +
                 (a.won ? '1' : '0') + ',' + fmt_double(a.wait_paid) + ',' +
                 fmt_double(a.entry_cost_paid) + ',' + fmt_double(a.utility) + '\n';
        }
    }
    return s;
}

inline nlohmann::json outcome_json(const Outcome& out, long run_id) {
    nlohmann::json j;
    j["run_id"] = run_id;
    auto& agents = j["agents"] = nlohmann::json::array();
    for (std::size_t i = 0; i < out.agents.size(); ++i) {
        const AgentOutcome& a = out.agents[i];
        nlohmann::json ja;
        ja["agent_id"] = i;
        ja["value"] = a.value;
        ja["attempted"] = a.attempted;
        if (a.entry_time) ja["entry_time"] = *a.entry_time;
        ja["won"] = a.won;
        ja["wait_paid"] = a.wait_paid;
        ja["entry_cost_paid"] = a.entry_cost_paid;
        ja["utility"] = a.utility;
        agents.push_back(std::move(ja));
    }
    auto& rushes = j["rush_events"] = nlohmann::json::array();
    for (const auto& rush : out.rushes)
        rushes.push_back({{"time", rush.time}, {"rushers", rush.rushers}, {"slots", rush.slots}});
    return j;
}

inline std::string summary_json(const OutcomeSummary& s, const Provenance& prov) {
    nlohmann::json j;
    prov.stamp(j);
    j["runs"] = s.runs;
    j["mean_agent_utility"] = s.mean_agent_utility;
    j["se_agent_utility"] = s.se_agent_utility;
    j["mean_total_surplus"] = s.mean_total_surplus;
    j["se_total_surplus"] = s.se_total_surplus;
    j["efficiency_frequency"] = s.efficiency_frequency;
    j["se_efficiency"] = s.se_efficiency;
    j["rush_frequency"] = s.rush_frequency;
    j["se_rush"] = s.se_rush;
    return j.dump(2) + "\n";
}

inline std::string surplus_report_json(const SurplusReport& r, const Provenance& prov) {
    nlohmann::json j;
    prov.stamp(j);
    j["total_surplus"] = r.total_surplus;
    j["allocation_value"] = r.allocation_value;
    j["waits_burned"] = r.waits_burned;
    j["entry_costs_burned"] = r.entry_costs_burned;
    j["efficiency_frequency"] = r.efficiency_frequency;
    j["total_surplus_se"] = r.total_surplus_se;
    j["efficiency_frequency_se"] = r.efficiency_frequency_se;
    j["runs"] = r.runs;
    return j.dump(2) + "\n";
}

inline std::string beliefs_csv(const BeliefTrace& trace, const Provenance& prov) {
    std::string s = prov.comment_line();
    s += "time,depth,kappa,probability\n";
    for (const auto& stage : trace.stages)
        for (int kappa = 1; kappa <= stage.belief.max_items(); ++kappa)
            s += fmt_double(stage.time) + ',' + std::to_string(stage.depth) + ',' +
                 std::to_string(kappa) + ',' + fmt_double(stage.belief.pmf(kappa)) + '\n';
    return s;
}

inline std::string deviation_report_csv(const verify::DeviationReport& rep,
                                        const Provenance& prov) {
    std::string s = prov.comment_line();
    s += "value,deviation,mean_gain,std_err,certified_cell\n";
    for (const auto& c : rep.cells)
        s += fmt_double(c.value) + ',' + fmt_double(c.deviation) + ',' +
             fmt_double(c.mean_gain) + ',' + fmt_double(c.std_err) + ',' +
             (c.certified ? '1' : '0') + '\n';
    return s;
}

inline std::string surplus_table_csv(const Corollary2Table& table, const Provenance& prov) {
    std::string s = prov.comment_line();
    s += "policy_label,cutoff,surplus,hazard_class,prediction_matched\n";
    for (const auto& row : table.rows)
        s += row.policy_label + ',' + fmt_double(row.cutoff) + ',' + fmt_double(row.surplus) +
             ',' + row.hazard_class + ',' + row.prediction_matched + '\n';
    return s;
}

} // namespace waitline
