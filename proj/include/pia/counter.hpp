#pragma once

#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "pia/abstraction.hpp"
#include "pia/checker.hpp"
#include "pia/instance.hpp"

namespace pia {

// Status value and abstract local values of one process.
struct LocalState {
    int sv = 0;
    std::vector<int> locals;
    friend auto operator<=>(const LocalState&, const LocalState&) = default;
};

// Ordered by idx = sv + |SV| * sum_i values^i * x_i, so the status varies fastest.
[[nodiscard]] std::vector<LocalState> enumerate_local_states(const Cfa& cfa, int values);
[[nodiscard]] int local_state_index(const Cfa& cfa, int values, const LocalState& l);
[[nodiscard]] std::string local_state_str(const Cfa& cfa, const LocalState& l);

struct CounterState {
    std::vector<int> kappa;   // per local state, interval index
    std::vector<int> shared;  // per shared variable, interval index
    friend auto operator<=>(const CounterState&, const CounterState&) = default;
};

struct CounterSystem {
    Cfa cfa;
    ThresholdSet ts;
    std::vector<LocalState> locals;
    std::vector<CounterState> states;
    std::unordered_map<std::string, StateId> index;
    Kripke ks;  // deadlock states carry a self-loop
    std::vector<Proposition> props;

    [[nodiscard]] std::size_t size() const { return states.size(); }
    [[nodiscard]] std::optional<StateId> find(const CounterState& w) const;
    [[nodiscard]] bool has_edge(StateId s, StateId t) const;
    [[nodiscard]] std::string state_str(StateId s) const;
    // Same structure with the given transitions dropped.
    [[nodiscard]] Kripke without(const std::set<std::pair<StateId, StateId>>& removed) const;
};

[[nodiscard]] std::string counter_key(const CounterState& w);

struct CounterOptions {
    std::size_t budget = 5'000'000;
};

// Explicit reachable part of C(Sk_abs) for a full-mode abstract CFA.
[[nodiscard]] CounterSystem build_counter_system(const AbstractCfa& acfa, Abstractor& abs,
                                                 const std::vector<Proposition>& props,
                                                 const CounterOptions& opts = {});

// Truth of a proposition on a counter state.
[[nodiscard]] bool label_counter(const PropositionAbstraction& pa, const CounterSystem& cs, const CounterState& w);

// h_cnt: counts processes per local state and abstracts the counts. The global
// state must already carry abstract data (interval indices).
[[nodiscard]] CounterState map_state_counter(const CounterSystem& cs, const Valuation& p, const GlobalState& abstract);
// h_dc = h_cnt . h_dat for a concrete global state.
[[nodiscard]] CounterState map_state_dc(const CounterSystem& cs, const Valuation& p, const GlobalState& concrete);

// Inst(p, Sk_abs): N(p) processes of the fully abstract skeleton.
struct AbstractInstance {
    std::size_t n = 0;
    std::vector<GlobalState> states;
    std::map<GlobalState, StateId> index;
    std::vector<StateId> initial;
    std::vector<std::vector<StateId>> succ;
};
[[nodiscard]] AbstractInstance build_abstract_instance(const AbstractCfa& acfa, const Valuation& p,
                                                       std::size_t budget = 2'000'000);

// Concrete counters, concrete shared variables and abstract local data.
struct SymbolicVass {
    std::vector<std::string> params;
    std::vector<std::string> shared;
    std::vector<LocalState> locals;
    std::vector<bool> initial_local;
    ThresholdSet ts;
    smt::Term rc;       // RC and non-negative parameters
    smt::Term size_ok;  // sum_i K_i = N(p)
    smt::Term init;
    smt::Term step;
    std::map<std::string, smt::Term> labels;  // per proposition name
    bool delta_accel = false;

    [[nodiscard]] static std::string counter(std::size_t i, bool primed = false);
    [[nodiscard]] static std::string shared_var(const std::string& g, bool primed = false);
    // in() constraints of a counter state over unprimed or primed variables.
    [[nodiscard]] std::vector<smt::Assertion> state_constraints(const CounterState& w, bool primed,
                                                                const std::string& label_prefix) const;
    [[nodiscard]] smt::Term prime(const smt::Term& t) const;
    [[nodiscard]] std::string dump() const;
};

[[nodiscard]] SymbolicVass encode_lvass(const AbstractCfa& lcfa, const std::vector<Proposition>& props,
                                        bool delta_accel = false);
[[nodiscard]] smt::Term vass_label(const Proposition& prop, const Cfa& cfa, const ThresholdSet& ts,
                                   const std::vector<LocalState>& locals);

}  // namespace pia
