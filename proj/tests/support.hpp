#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "pia/abstraction.hpp"
#include "pia/ltl.hpp"
#include "pia/corpus.hpp"
#include "pia/domain.hpp"
#include "pia/dsl.hpp"
#include "pia/smt.hpp"

namespace support {

inline pia::smt::Solver& solver() { return pia::smt::default_solver(); }

inline pia::Valuation p3(pia::Int n, pia::Int t, pia::Int f) { return {{"n", n}, {"t", t}, {"f", f}}; }

// Model with its thresholds and both abstractions.
struct Built {
    pia::Model model;
    pia::ThresholdSet ts;
    pia::Abstractor abs;
    pia::AbstractCfa full;
    pia::AbstractCfa lonly;

    explicit Built(const std::string& name) : Built(pia::builtin_model(name)) {}
    explicit Built(pia::Model m)
        : model(std::move(m)),
          ts(pia::extract_threshold_set(model.cfa, solver())),
          abs(model.cfa.space, ts, solver()),
          full(pia::abstract_cfa(model.cfa, pia::AbstractionMode::Full, abs)),
          lonly(pia::abstract_cfa(model.cfa, pia::AbstractionMode::LocalsOnly, abs)) {}
};

// Primed names are parsed as plain placeholders and renamed afterwards.
inline pia::LinearAtom atom(std::string text, const std::vector<std::string>& names) {
    std::vector<std::string> plain;
    std::map<std::string, std::string> back;
    for (const auto& n : names) {
        std::string q = n;
        if (!q.empty() && q.back() == '\'') {
            q.pop_back();
            q += "_pr";
            back[q] = n;
        }
        plain.push_back(q);
    }
    for (std::size_t i; (i = text.find('\'')) != std::string::npos;) text.replace(i, 1, "_pr");
    pia::LinearAtom a = pia::parse_linear_predicate(text, plain).atoms.at(0);
    return {a.lhs.rename(back), a.rel, a.rhs.rename(back)};
}

inline std::vector<pia::Proposition> spec_props(const pia::Model& m) {
    std::vector<pia::Proposition> out;
    auto add = [&](const pia::Proposition& q) {
        if (std::find(out.begin(), out.end(), q) == out.end()) out.push_back(q);
    };
    for (const auto& s : m.specs)
        for (const auto& q : pia::propositions(s.formula)) add(q);
    for (const auto& j : m.justice) add(j.prop);
    return out;
}

inline std::vector<pia::InvariantCandidate> model_invariants(const pia::Model& m) {
    std::vector<pia::InvariantCandidate> out;
    for (const auto& c : m.candidates)
        for (auto& x : pia::parse_invariants(c, m.cfa)) out.push_back(std::move(x));
    return out;
}

}  // namespace support
