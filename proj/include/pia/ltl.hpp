#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "pia/prop.hpp"

namespace pia {

enum class LtlOp { True, False, Atom, NotAtom, And, Or, Until, Release };

struct LtlNode;
using Ltl = std::shared_ptr<const LtlNode>;

// Formulas are kept in negation normal form; negation only on atoms.
struct LtlNode {
    LtlOp op;
    std::string atom;
    std::shared_ptr<const Proposition> prop;  // set for <all>/<some> atoms
    Ltl lhs;
    Ltl rhs;
};

namespace ltl {
Ltl top();
Ltl bottom();
Ltl atom(const std::string& name);
Ltl atom(const Proposition& p);
Ltl neg(const Ltl& f);  // dual, stays in NNF
Ltl conj(const Ltl& a, const Ltl& b);
Ltl disj(const Ltl& a, const Ltl& b);
Ltl until(const Ltl& a, const Ltl& b);
Ltl release(const Ltl& a, const Ltl& b);
Ltl eventually(const Ltl& f);
Ltl globally(const Ltl& f);
Ltl implies(const Ltl& a, const Ltl& b);
}  // namespace ltl

[[nodiscard]] std::string to_string(const Ltl& f);
[[nodiscard]] std::vector<std::string> atom_names(const Ltl& f);
[[nodiscard]] std::vector<Proposition> propositions(const Ltl& f);

// Truth of f on the ultimately periodic word word[0..loop_start) word[loop_start..]^omega.
[[nodiscard]] bool eval_lasso(const Ltl& f, const std::vector<std::set<std::string>>& word, std::size_t loop_start);

// Generalized Buchi automaton for a formula, read in the tableau style: a state
// assigns truth values to every until/release subformula, and the current
// letter fixes the atoms. Transitions and acceptance depend on (state, letter).
class Gba {
public:
    explicit Gba(Ltl formula);

    [[nodiscard]] const std::vector<std::string>& aps() const { return aps_; }
    [[nodiscard]] std::size_t num_states() const { return std::size_t{1} << temporal_.size(); }
    [[nodiscard]] std::size_t num_acceptance_sets() const { return until_idx_.size(); }
    [[nodiscard]] const Ltl& formula() const { return formula_; }

    // Letters are bitmasks over aps().
    [[nodiscard]] bool initial(std::uint32_t state, std::uint64_t letter) const;
    [[nodiscard]] const std::vector<std::uint32_t>& successors(std::uint32_t state, std::uint64_t letter) const;
    [[nodiscard]] bool accepting(std::size_t set, std::uint32_t state, std::uint64_t letter) const;

private:
    [[nodiscard]] bool value(const Ltl& f, std::uint32_t state, std::uint64_t letter) const;
    void collect(const Ltl& f);

    Ltl formula_;
    std::vector<std::string> aps_;
    std::map<std::string, int> ap_index_;
    std::vector<Ltl> temporal_;
    std::map<const LtlNode*, int> temporal_index_;
    std::vector<int> until_idx_;
    mutable std::map<std::pair<std::uint32_t, std::uint64_t>, std::vector<std::uint32_t>> cache_;
};

[[nodiscard]] Gba negate_to_buchi(const Ltl& phi);

}  // namespace pia
