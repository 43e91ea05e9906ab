#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "pia/linear.hpp"

namespace pia::smt {

enum class Kind { Const, Var, BoolConst, Add, Mul, Cmp, And, Or, Not, Implies, Ite, Exists };

struct Node;

// Immutable linear-arithmetic term. Int-sorted: Const, Var, Add, Mul, Ite
// with Int branches. Bool-sorted: everything else.
class Term {
public:
    Term() = default;
    explicit Term(std::shared_ptr<const Node> n) : n_(std::move(n)) {}
    [[nodiscard]] const Node& node() const { return *n_; }
    [[nodiscard]] bool valid() const { return static_cast<bool>(n_); }
    [[nodiscard]] const Node* ptr() const { return n_.get(); }

private:
    std::shared_ptr<const Node> n_;
};

struct Node {
    Kind kind;
    Int value = 0;  // Const value, Mul factor, BoolConst (0/1)
    std::string name;  // Var
    Rel rel = Rel::Eq;  // Cmp
    std::vector<Term> args;
    std::vector<std::string> bound;  // Exists
};

Term lit(Int v);
Term var(const std::string& name);
Term boolean(bool b);
Term add(std::vector<Term> ts);
Term sub(const Term& a, const Term& b);
Term mul(Int k, const Term& t);
Term cmp(const Term& a, Rel r, const Term& b);
Term eq(const Term& a, const Term& b);
Term le(const Term& a, const Term& b);
Term lt(const Term& a, const Term& b);
Term ge(const Term& a, const Term& b);
Term gt(const Term& a, const Term& b);
Term conj(std::vector<Term> ts);
Term disj(std::vector<Term> ts);
Term neg(const Term& t);
Term implies(const Term& a, const Term& b);
Term ite(const Term& c, const Term& a, const Term& b);
Term exists(std::vector<std::string> vars, const Term& body);

Term from_linear(const LinearExpr& e);
Term from_atom(const LinearAtom& a);
Term from_predicate(const LinearPredicate& p);

// Canonical SMT-LIB rendering of one term.
[[nodiscard]] std::string render(const Term& t);
[[nodiscard]] std::set<std::string> free_vars(const Term& t);
[[nodiscard]] bool has_quantifier(const Term& t);
[[nodiscard]] Term rename(const Term& t, const std::map<std::string, std::string>& m);
[[nodiscard]] Term substitute(const Term& t, const std::map<std::string, Term>& m);
// Native evaluation; throws on free variables without a value or on quantifiers.
[[nodiscard]] Int eval_int(const Term& t, const Valuation& v);
[[nodiscard]] bool eval_bool(const Term& t, const Valuation& v);

[[nodiscard]] std::string symbol(const std::string& name);

struct Assertion {
    std::string label;  // empty: not tracked in cores
    Term term;
};

struct Query {
    std::vector<Assertion> assertions;
    bool want_model = false;
    bool want_core = false;
};

struct Verdict {
    enum class Result { Sat, Unsat, Unknown };
    Result result = Result::Unknown;
    Valuation model;
    std::set<std::string> core;

    [[nodiscard]] bool sat() const { return result == Result::Sat; }
    [[nodiscard]] bool unsat() const { return result == Result::Unsat; }
    [[nodiscard]] bool unknown() const { return result == Result::Unknown; }
};

[[nodiscard]] std::string to_smtlib(const Query& q);

struct SolverConfig {
    std::string command;  // empty: PIA_SOLVER or "z3 -in -smt2"
    double timeout_seconds = 10.0;
};

struct SolverStats {
    std::size_t queries = 0;
    std::size_t cache_hits = 0;
    std::size_t processes = 0;
    double seconds = 0.0;
};

// External solver session. Each process run receives a complete script;
// check_all runs several queries in one process separated by push/pop.
class Solver {
public:
    explicit Solver(SolverConfig cfg = {});

    Verdict check(const Query& q);
    std::vector<Verdict> check_all(const std::vector<Query>& qs);

    [[nodiscard]] const SolverStats& stats() const { return stats_; }
    [[nodiscard]] const std::string& command() const { return cfg_.command; }

private:
    std::string run(const std::string& script, double timeout);

    SolverConfig cfg_;
    SolverStats stats_;
    std::unordered_map<std::string, Verdict> cache_;
};

// Convenience wrapper over a process-wide default session.
Verdict check_formula(const std::vector<Assertion>& assertions, bool want_model = true, bool want_core = false);
Solver& default_solver();

}  // namespace pia::smt
