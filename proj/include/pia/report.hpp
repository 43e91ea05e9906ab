#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pia/cegar.hpp"

namespace pia {

struct StateReport {
    std::map<std::string, std::string> counters;  // non-zero counters by local state
    std::map<std::string, std::string> shared;
    std::vector<std::string> labels;
    friend bool operator==(const StateReport&, const StateReport&) = default;
};

struct CounterexampleReport {
    std::vector<StateId> prefix;
    std::vector<StateId> loop;
    std::map<StateId, StateReport> states;
    friend bool operator==(const CounterexampleReport&, const CounterexampleReport&) = default;
};

struct WitnessReport {
    std::map<std::string, Int> params;
    std::vector<std::string> prefix;
    std::vector<std::string> loop;
    bool image_matched = false;
    friend bool operator==(const WitnessReport&, const WitnessReport&) = default;
};

struct TraceReport {
    std::string kind;
    std::size_t removed_count = 0;
    std::string unjust_q;
    double solver_time = 0.0;
    friend bool operator==(const TraceReport&, const TraceReport&) = default;
};

struct PartReport {
    std::string resilience;
    std::vector<std::string> thresholds;
    std::string verdict;
    std::size_t states = 0;
    std::size_t edges = 0;
    std::size_t product_states = 0;
    std::size_t refinements = 0;
    std::vector<std::string> invariants;
    std::vector<TraceReport> trace;
    std::string stuck;
    std::optional<CounterexampleReport> counterexample;
    std::optional<WitnessReport> witness;
    friend bool operator==(const PartReport&, const PartReport&) = default;
};

struct Report {
    std::string model;
    std::string spec;
    std::vector<std::string> justice;
    std::string verdict;
    std::size_t refinements = 0;
    double seconds = 0.0;
    std::size_t solver_queries = 0;
    std::vector<PartReport> parts;
    friend bool operator==(const Report&, const Report&) = default;
};

[[nodiscard]] Report make_report(const std::string& model, const std::string& spec,
                                 const std::vector<std::string>& justice, const Cfa& cfa, const VerifyResult& r);
[[nodiscard]] StateReport state_report(const CounterSystem& cs, StateId s);
[[nodiscard]] std::string global_state_str(const Cfa& cfa, const GlobalState& g);

void to_json(nlohmann::json& j, const Report& r);
void from_json(const nlohmann::json& j, Report& r);
void to_json(nlohmann::json& j, const PartReport& p);
void from_json(const nlohmann::json& j, PartReport& p);
void to_json(nlohmann::json& j, const StateReport& s);
void from_json(const nlohmann::json& j, StateReport& s);
void to_json(nlohmann::json& j, const CounterexampleReport& c);
void from_json(const nlohmann::json& j, CounterexampleReport& c);
void to_json(nlohmann::json& j, const WitnessReport& w);
void from_json(const nlohmann::json& j, WitnessReport& w);
void to_json(nlohmann::json& j, const TraceReport& t);
void from_json(const nlohmann::json& j, TraceReport& t);

// Deterministic DOT text. Nodes are numbered by state id.
[[nodiscard]] std::string to_dot(const Kripke& ks, const std::function<std::string(StateId)>& label,
                                 const std::string& name = "ks");
[[nodiscard]] std::string to_dot(const CounterSystem& cs);

[[nodiscard]] std::string dump_counter_system(const CounterSystem& cs);

}  // namespace pia
