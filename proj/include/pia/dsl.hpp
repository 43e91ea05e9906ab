#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pia/cfa.hpp"
#include "pia/ltl.hpp"

namespace pia {

struct NamedSpec {
    std::string name;
    std::string text;
    Ltl formula;
};

struct NamedProp {
    std::string name;
    Proposition prop;
};

struct Model {
    Cfa cfa;
    std::vector<NamedSpec> specs;
    std::vector<NamedProp> justice;
    std::vector<std::string> candidates;  // invariant candidates shipped with the model

    [[nodiscard]] const NamedSpec* spec(const std::string& name) const;
    [[nodiscard]] const NamedProp* justice_prop(const std::string& name) const;
};

// Skeleton file. Throws ParseError with line/column.
[[nodiscard]] Model parse_model(const std::string& text);

// LTL\X over <all>/<some> propositions of cfa, or over the plain atom names
// given in plain_atoms (cfa may then be null).
[[nodiscard]] Ltl parse_ltl(const std::string& text, const Cfa* cfa, const std::set<std::string>& plain_atoms = {});
[[nodiscard]] Proposition parse_proposition(const std::string& text, const Cfa& cfa);
// Conjunction of linear atoms over the given names ("&&"-separated).
[[nodiscard]] LinearPredicate parse_linear_predicate(const std::string& text, const std::vector<std::string>& names);

// Pattern selecting local states for K[...] in invariant candidates.
struct CounterPattern {
    bool any = true;  // K[*]
    std::optional<std::set<std::string>> status;
    std::vector<std::pair<std::string, std::set<int>>> locals;  // variable, allowed interval indices
};

struct InvariantTerm {
    Int coeff = 1;
    enum class Kind { Const, Name, Count } kind = Kind::Const;
    std::string name;
    CounterPattern pattern;
};

struct InvariantAtom {
    std::vector<InvariantTerm> lhs, rhs;
    Rel rel = Rel::Eq;
};

struct InvariantCandidate {
    std::string text;
    std::vector<InvariantAtom> atoms;  // conjunction
};

// One candidate per non-empty line; '#' starts a comment.
[[nodiscard]] std::vector<InvariantCandidate> parse_invariants(const std::string& text, const Cfa& cfa);

[[nodiscard]] std::string to_dsl(const Model& m);

}  // namespace pia
