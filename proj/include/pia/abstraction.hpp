#pragma once

#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "pia/cfa.hpp"
#include "pia/domain.hpp"
#include "pia/smt.hpp"

namespace pia {

using Tuple = std::vector<int>;

struct AbstractTupleSet {
    std::vector<std::string> vars;  // variable keys, "x'" when primed
    std::set<Tuple> tuples;

    [[nodiscard]] std::size_t arity() const { return vars.size(); }
    [[nodiscard]] bool contains(const Tuple& t) const { return tuples.count(t) > 0; }
    friend bool operator==(const AbstractTupleSet&, const AbstractTupleSet&) = default;
};

struct AbstractionOptions {
    bool prune = true;        // monotone implication between tuples of a single comparison
    bool quantified = false;  // wrap data variables in an existential quantifier
};

// All tuples over vars for which RC && phi && in(d_i, I_{t_i}) is satisfiable.
// Unknown answers keep the tuple.
[[nodiscard]] AbstractTupleSet exists_abstraction(const std::vector<LinearAtom>& phi, const std::vector<std::string>& vars,
                                                  const ParamSpace& ps, const ThresholdSet& ts, smt::Solver& solver,
                                                  const AbstractionOptions& opts = {});
[[nodiscard]] smt::Query exists_query(const std::vector<LinearAtom>& phi, const std::vector<std::string>& vars,
                                      const ParamSpace& ps, const ThresholdSet& ts, const Tuple& t, bool quantified);

enum class AbstractionMode { Full, LocalsOnly };

// I_j <= x^ (at_least) or I_j > x^.
struct AbstractThreshold {
    VarRef var;
    int index = 0;
    bool at_least = true;
};

// Disjunction over tuples of (x^_i = I_{t_i}) for abstract positions and
// in(y_i, I_{t_i}) for concrete positions.
struct TupleGuard {
    std::vector<VarRef> vars;
    std::vector<bool> concrete;
    AbstractTupleSet set;
    std::string origin;
};

using AbstractAtom = std::variant<StatusGuard, AbstractThreshold, ThresholdGuard, TupleGuard, ComparisonGuard>;

struct AbstractEdge {
    int from = 0;
    int to = 0;
    std::vector<AbstractAtom> atoms;
};

struct AbstractCfa {
    Cfa base;
    AbstractionMode mode = AbstractionMode::Full;
    ThresholdSet ts;
    std::vector<AbstractEdge> edges;

    [[nodiscard]] std::vector<std::vector<int>> paths() const { return base.paths(); }
    [[nodiscard]] std::vector<AbstractAtom> path_atoms(const std::vector<int>& path) const;
};

// Caches existential abstractions per formula.
class Abstractor {
public:
    Abstractor(ParamSpace ps, ThresholdSet ts, smt::Solver& solver, AbstractionOptions opts = {})
        : ps_(std::move(ps)), ts_(std::move(ts)), solver_(solver), opts_(opts) {}

    const AbstractTupleSet& tuples(const std::vector<LinearAtom>& phi, const std::vector<std::string>& vars);
    // absEx(x' = x + delta) as a map from I_a to the possible I_b.
    const std::vector<std::vector<int>>& shift(int delta);

    [[nodiscard]] const ParamSpace& space() const { return ps_; }
    [[nodiscard]] const ThresholdSet& thresholds() const { return ts_; }
    [[nodiscard]] smt::Solver& solver() { return solver_; }

private:
    ParamSpace ps_;
    ThresholdSet ts_;
    smt::Solver& solver_;
    AbstractionOptions opts_;
    std::map<std::string, AbstractTupleSet> cache_;
    std::map<int, std::vector<std::vector<int>>> shifts_;
};

[[nodiscard]] std::vector<AbstractAtom> abstract_guard(const Guard& g, const Cfa& cfa, AbstractionMode mode,
                                                       Abstractor& abs);
[[nodiscard]] AbstractCfa abstract_cfa(const Cfa& cfa, AbstractionMode mode, Abstractor& abs);

[[nodiscard]] std::string abstract_atom_str(const AbstractAtom& a, const ThresholdSet& ts);
// The abstract CFA in DSL-like form followed by the tuple table of every guard.
[[nodiscard]] std::string describe(const AbstractCfa& a);

// Full-mode successors of an abstract process state (values are interval indices).
class AbstractStepper {
public:
    explicit AbstractStepper(const AbstractCfa& a);
    [[nodiscard]] std::vector<ProcessState> successors(const ProcessState& s) const;

private:
    const AbstractCfa& a_;
    struct PathInfo {
        std::vector<AbstractAtom> atoms;
        bool sv_primed = false;
        std::vector<int> primed;  // slot indices (locals, then shared)
    };
    std::vector<PathInfo> paths_;
};

// Whether the locals-only abstraction admits the concrete process step s -> t at p.
[[nodiscard]] bool locals_only_admits(const AbstractCfa& lcfa, const Valuation& p, const ProcessState& s,
                                      const ProcessState& t);

[[nodiscard]] ProcessState map_state_data(const ThresholdSet& ts, const Valuation& p, const ProcessState& s);

// Abstract meaning of a proposition on one process: status test, or
// membership of (locals, shared) in absEx of the data comparison.
class PropositionAbstraction {
public:
    PropositionAbstraction(const Proposition& prop, const Cfa& cfa, Abstractor& abs);
    [[nodiscard]] bool holds(int sv, const std::vector<int>& locals, const std::vector<int>& shared) const;
    [[nodiscard]] const Proposition& prop() const { return prop_; }

private:
    Proposition prop_;
    int status_ = -1;
    AbstractTupleSet set_;
    std::vector<std::pair<bool, int>> where_;  // per tuple position: (is_local, index)
};

// Concrete truth of the inner formula of a proposition for one process.
[[nodiscard]] bool prop_holds_concrete(const Proposition& prop, const Cfa& cfa, const Valuation& p, int sv,
                                       const std::vector<Int>& locals, const std::vector<Int>& shared);

}  // namespace pia
