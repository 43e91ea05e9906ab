#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pia/linear.hpp"
#include "pia/prop.hpp"

namespace pia {

struct VarRef {
    std::string name;
    bool primed = false;

    [[nodiscard]] std::string str() const { return primed ? name + "'" : name; }
    friend auto operator<=>(const VarRef&, const VarRef&) = default;
};

struct StatusGuard {
    bool primed = false;
    bool equal = true;
    std::string value;
    friend bool operator==(const StatusGuard&, const StatusGuard&) = default;
};

// bound <= var  (at_least) or  bound > var
struct ThresholdGuard {
    LinearExpr bound;
    bool at_least = true;
    VarRef var;
    friend bool operator==(const ThresholdGuard&, const ThresholdGuard&) = default;
};

// lhs rel rhs_vars[0] + ... + rhs_vars[k-1] + rhs_lin
struct ComparisonGuard {
    VarRef lhs;
    Rel rel = Rel::Eq;
    std::vector<VarRef> rhs_vars;
    LinearExpr rhs_lin;
    friend bool operator==(const ComparisonGuard&, const ComparisonGuard&) = default;
};

using GuardAtom = std::variant<StatusGuard, ThresholdGuard, ComparisonGuard>;

// Conjunction of atoms; empty means true.
struct Guard {
    std::vector<GuardAtom> atoms;
    friend bool operator==(const Guard&, const Guard&) = default;
};

[[nodiscard]] std::string atom_str(const GuardAtom& a);
[[nodiscard]] std::string guard_str(const Guard& g);
[[nodiscard]] std::vector<VarRef> data_vars(const GuardAtom& a);
// Data comparison as a linear atom over variable names ("x'" for primed).
[[nodiscard]] LinearAtom as_linear(const GuardAtom& a);
[[nodiscard]] std::string var_key(const VarRef& v);

struct ParamSpace {
    std::vector<std::string> params;
    LinearPredicate resilience;
    LinearExpr size;

    [[nodiscard]] bool admits(const Valuation& p) const;
    friend bool operator==(const ParamSpace&, const ParamSpace&) = default;
};

struct Edge {
    int from = 0;
    int to = 0;
    Guard guard;
    friend bool operator==(const Edge&, const Edge&) = default;
};

struct Cfa {
    std::string name;
    ParamSpace space;
    std::vector<std::string> locals;
    std::vector<std::string> shared;
    std::vector<std::string> status_values;
    std::vector<std::string> initial_status;
    std::vector<std::string> locations;
    int initial = 0;
    int final = 0;
    std::vector<Edge> edges;

    [[nodiscard]] int status_index(const std::string& v) const;  // -1 if unknown
    [[nodiscard]] int local_index(const std::string& v) const;
    [[nodiscard]] int shared_index(const std::string& v) const;
    [[nodiscard]] bool is_param(const std::string& v) const;
    [[nodiscard]] bool is_initial_status(int sv) const;
    // All q_I -> q_F paths as edge index lists; requires acyclicity.
    [[nodiscard]] std::vector<std::vector<int>> paths() const;
    [[nodiscard]] std::vector<GuardAtom> path_atoms(const std::vector<int>& path) const;
    friend bool operator==(const Cfa&, const Cfa&) = default;
};

struct Diagnostic {
    enum class Kind { CyclicCfa, SsaViolation, FinalUnreachable, IllegalGuard, UndeclaredIdentifier };
    Kind kind;
    std::string message;
};

[[nodiscard]] const char* kind_name(Diagnostic::Kind k);
[[nodiscard]] std::vector<Diagnostic> validate_cfa(const Cfa& cfa);

struct ProcessState {
    int sv = 0;
    std::vector<Int> locals;
    std::vector<Int> shared;
    friend auto operator<=>(const ProcessState&, const ProcessState&) = default;
};

// Successor computation of one process skeleton at fixed parameters. The
// primed variables constrained on a path range over 0..cap+1; a satisfying
// value above cap raises CapExceeded.
class ConcreteStepper {
public:
    ConcreteStepper(const Cfa& cfa, Valuation params, Int cap);
    [[nodiscard]] std::vector<ProcessState> successors(const ProcessState& s) const;
    [[nodiscard]] Int cap() const { return cap_; }

private:
    struct Check {
        bool status = false;
        int slot = 0;  // status: 0 = sv, 1 = sv'
        bool equal = true;
        int value = 0;
        std::vector<std::pair<int, Int>> terms;  // slot, coeff
        Int constant = 0;
        Rel rel = Rel::Eq;
    };
    struct CompiledPath {
        std::vector<int> order;  // enumerated slots; slot -1 denotes sv'
        std::vector<std::vector<Check>> checks;  // checks[0] before enumeration, checks[k+1] after order[k]
        bool sv_primed = false;
        std::vector<bool> data_primed;
    };
    void enumerate(const CompiledPath& cp, std::size_t level, std::vector<Int>& slots, int& sv_next,
                   int sv, std::vector<ProcessState>& out) const;
    [[nodiscard]] bool check(const Check& c, const std::vector<Int>& slots, int sv, int sv_next) const;

    const Cfa& cfa_;
    Valuation params_;
    Int cap_;
    std::size_t nvars_;
    std::vector<CompiledPath> paths_;
};

[[nodiscard]] std::vector<ProcessState> step_valuations(const Cfa& cfa, const Valuation& p,
                                                        const ProcessState& s, Int cap);

// N(p) + the largest |c(p)| among comparison guards.
[[nodiscard]] Int default_cap(const Cfa& cfa, const Valuation& p);

}  // namespace pia
