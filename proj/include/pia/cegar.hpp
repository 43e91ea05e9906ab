#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pia/counter.hpp"
#include "pia/dsl.hpp"

namespace pia {

using Transition = std::pair<StateId, StateId>;

// States of the counter system proven unjust under justice proposition q.
struct OffuSet {
    std::string q;
    std::vector<bool> unjust;
    [[nodiscard]] FairSet fair_set() const;  // complement of the unjust states
};

struct TraceEntry {
    std::string kind;  // spurious, unjust, invariant
    std::size_t removed_count = 0;
    std::string unjust_q;
    double solver_time = 0.0;
};

struct ProvenInvariant {
    std::string text;
    smt::Term term;
};

struct RefinementState {
    std::set<Transition> removed;
    std::vector<OffuSet> offu_sets;
    std::vector<ProvenInvariant> invariants;
    std::vector<TraceEntry> trace;
    std::size_t iterations = 0;
};

struct SpuriousResult {
    bool spurious = false;
    std::set<std::string> core;
};

// Step && in(K, w) && in(K', w') && in(g, w) && in(g', w') unsatisfiable.
// Solver errors and unknown answers count as not spurious.
[[nodiscard]] std::vector<SpuriousResult> check_transitions(const std::vector<std::pair<CounterState, CounterState>>& ts,
                                                            const SymbolicVass& vass, smt::Solver& solver,
                                                            const std::vector<smt::Term>& invariants = {});
[[nodiscard]] SpuriousResult is_transition_spurious(const CounterState& w, const CounterState& w2,
                                                    const SymbolicVass& vass, smt::Solver& solver,
                                                    const std::vector<smt::Term>& invariants = {});
// All transitions of cs whose constraints named in the core agree with (w, w').
[[nodiscard]] std::vector<Transition> transitions_matching_core(const CounterSystem& cs, const CounterState& w,
                                                                const CounterState& w2,
                                                                const std::set<std::string>& core);

// Label of q && RC && sum K = N(p) && in(K, w) && in(g, w) unsatisfiable.
[[nodiscard]] std::vector<bool> check_unjust(const std::vector<CounterState>& ws, const std::string& q,
                                             const SymbolicVass& vass, smt::Solver& solver,
                                             const std::vector<smt::Term>& invariants = {});
[[nodiscard]] bool is_state_unjust(const CounterState& w, const std::string& q, const SymbolicVass& vass,
                                   smt::Solver& solver);

struct InvariantResult {
    bool proven = false;
    std::string failed;  // "init" or "step" when refuted
    Valuation model;
};

// Validity of Init -> Inv and Inv && Step -> Inv'.
[[nodiscard]] InvariantResult check_invariant(const smt::Term& inv, const SymbolicVass& vass, smt::Solver& solver);
[[nodiscard]] smt::Term invariant_term(const InvariantCandidate& c, const SymbolicVass& vass, const Cfa& cfa);

struct RefineOptions {
    std::string order = "sui";  // spurious, unjust, invariant
    bool all_q = false;         // one offu set per fitting q instead of the first
};

struct RefineResult {
    bool refined = false;
    std::string report;
};

// One refinement attempt for a counterexample of the current refined system.
// justice lists proposition names with labels in the VASS.
[[nodiscard]] RefineResult refine_step(const CounterSystem& cs, const Lasso& cex, RefinementState& st,
                                       const SymbolicVass& vass, const std::vector<std::string>& justice,
                                       smt::Solver& solver, const RefineOptions& opts = {});

// Refined structure and fairness for check_fair.
[[nodiscard]] Kripke refined_kripke(const CounterSystem& cs, const RefinementState& st);
[[nodiscard]] std::vector<FairSet> refined_fairness(const CounterSystem& cs, const RefinementState& st,
                                                    const std::vector<std::string>& justice);

struct ConcreteWitness {
    Valuation params;
    std::vector<GlobalState> prefix;
    std::vector<GlobalState> loop;
    bool image_matched = false;  // step-matches the abstract lasso
};

struct ReplayOptions {
    std::optional<Int> cap;
    std::size_t budget = 2'000'000;
};

// Fair lasso of Inst(p) whose h_dc image follows the abstract lasso step by
// step while staying in sync with the lasso positions.
[[nodiscard]] std::optional<ConcreteWitness> concrete_replay(const CounterSystem& cs, const Lasso& cex, const Valuation& p,
                                                             const std::vector<Proposition>& justice,
                                                             const ReplayOptions& opts = {});
// Direct fair-lasso search for !phi in Inst(p).
[[nodiscard]] std::optional<ConcreteWitness> concrete_counterexample(const Cfa& cfa, const Ltl& phi, const Valuation& p,
                                                                     const std::vector<Proposition>& justice,
                                                                     const ReplayOptions& opts = {});
// The witness is a path of Inst(p) that is fair and violates phi.
[[nodiscard]] bool witness_is_genuine(const Cfa& cfa, const ConcreteWitness& w, const Ltl& phi,
                                      const std::vector<Proposition>& justice, std::optional<Int> cap = std::nullopt);

// Smallest admissible parameter points ordered by (N(p), lexicographic).
[[nodiscard]] std::vector<Valuation> sample_parameters(const ParamSpace& ps, std::size_t count, Int bound = 12);

enum class VerdictKind { Verified, Falsified, Inconclusive };
[[nodiscard]] const char* verdict_name(VerdictKind k);

struct VerifyOptions {
    std::size_t max_refinements = 200;
    std::size_t budget = 5'000'000;  // counter-system states
    std::size_t replay_samples = 8;
    std::size_t replay_budget = 300'000;  // concrete states per sampled instance
    std::vector<Valuation> oracle_params;  // replay points tried before the sample
    bool delta_accel = false;
    RefineOptions refine;
    // Called after every refinement with the current system and state.
    std::function<void(const CounterSystem&, const RefinementState&)> on_refine;
};

struct PartResult {
    ParamSpace space;
    ThresholdSet ts;
    VerdictKind verdict = VerdictKind::Inconclusive;
    std::shared_ptr<CounterSystem> system;
    RefinementState state;
    std::optional<Lasso> counterexample;
    std::optional<ConcreteWitness> witness;
    std::string stuck_report;
    std::size_t product_states = 0;
};

struct VerifyResult {
    VerdictKind verdict = VerdictKind::Inconclusive;
    std::vector<PartResult> parts;  // one per threshold order
    double seconds = 0.0;
    std::size_t solver_queries = 0;
    [[nodiscard]] std::size_t refinements() const;
};

[[nodiscard]] VerifyResult verify(const Model& model, const Ltl& spec, const std::vector<std::string>& justice,
                                  const std::vector<InvariantCandidate>& invariants, smt::Solver& solver,
                                  const VerifyOptions& opts = {});

}  // namespace pia
