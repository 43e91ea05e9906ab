#pragma once

// Independent reference implementations used by the tests. Nothing here calls
// into the checker, the abstraction or the counter system under test.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pia/cfa.hpp"
#include "pia/checker.hpp"
#include "pia/domain.hpp"
#include "pia/smt.hpp"

namespace oracle {

using pia::Int;
using pia::StateId;

// Reachability closure restricted to allowed states; deadlocks stutter.
struct Closure {
    std::size_t n = 0;
    std::vector<std::vector<bool>> reach;  // reach[s][t]: path of length >= 1 from s to t
    std::vector<std::vector<StateId>> succ;

    Closure(const pia::Kripke& ks, const std::vector<bool>& allowed) : n(ks.size()) {
        succ.resize(n);
        for (StateId s = 0; s < n; ++s) {
            if (!allowed[s]) continue;
            if (ks.succ[s].empty()) succ[s].push_back(s);
            for (StateId t : ks.succ[s])
                if (allowed[t]) succ[s].push_back(t);
        }
        reach.assign(n, std::vector<bool>(n, false));
        for (StateId s = 0; s < n; ++s) {
            std::deque<StateId> work(succ[s].begin(), succ[s].end());
            while (!work.empty()) {
                StateId v = work.front();
                work.pop_front();
                if (reach[s][v]) continue;
                reach[s][v] = true;
                for (StateId w : succ[v]) work.push_back(w);
            }
        }
    }

    // s lies on a cycle whose strongly connected component meets every set.
    [[nodiscard]] bool fair_component(StateId s, const std::vector<std::vector<bool>>& sets) const {
        if (!reach[s][s]) return false;
        for (const auto& f : sets) {
            bool hit = false;
            for (StateId t = 0; t < n && !hit; ++t) hit = f[t] && reach[s][t] && reach[t][s];
            if (!hit) return false;
        }
        return true;
    }

    // Some fair component is reachable (length >= 0) from a start state.
    [[nodiscard]] bool fair_path_from(const std::vector<StateId>& starts,
                                      const std::vector<std::vector<bool>>& sets) const {
        for (StateId s : starts)
            for (StateId t = 0; t < n; ++t)
                if ((t == s || reach[s][t]) && fair_component(t, sets)) return true;
        return false;
    }
};

// Shapes of formulas over atoms p and q for which the existence of a fair
// violating path reduces to plain fair-SCC questions.
enum class Shape { False, GloballyP, EventuallyP, InfinitelyOftenP, FinallyAlwaysP, Response };

inline const char* shape_text(Shape s) {
    switch (s) {
        case Shape::False: return "false";
        case Shape::GloballyP: return "G p";
        case Shape::EventuallyP: return "F p";
        case Shape::InfinitelyOftenP: return "G F p";
        case Shape::FinallyAlwaysP: return "F G p";
        case Shape::Response: return "G (p -> F q)";
    }
    return "";
}

// Whether some fair path of ks violates the formula.
inline bool violated(const pia::Kripke& ks, Shape shape, const std::vector<std::vector<bool>>& fair) {
    const std::size_t n = ks.size();
    const std::vector<bool> all(n, true);
    auto lab = [&](const std::string& ap, StateId s) { return ks.label(ap, s); };
    std::vector<bool> not_p(n), not_q(n);
    for (StateId s = 0; s < n; ++s) {
        not_p[s] = !lab("p", s);
        not_q[s] = !lab("q", s);
    }
    const Closure full(ks, all);
    auto reachable = [&](const std::function<bool(StateId)>& pred) {
        std::vector<StateId> out;
        for (StateId t = 0; t < n; ++t) {
            if (!pred(t)) continue;
            bool r = false;
            for (StateId s : ks.initial) r = r || s == t || full.reach[s][t];
            if (r) out.push_back(t);
        }
        return out;
    };
    switch (shape) {
        case Shape::False: return full.fair_path_from(ks.initial, fair);
        case Shape::GloballyP: return full.fair_path_from(reachable([&](StateId t) { return not_p[t]; }), fair);
        case Shape::EventuallyP: {
            const Closure c(ks, not_p);
            std::vector<StateId> starts;
            for (StateId s : ks.initial)
                if (not_p[s]) starts.push_back(s);
            return c.fair_path_from(starts, fair);
        }
        case Shape::InfinitelyOftenP: {
            const Closure c(ks, not_p);
            return c.fair_path_from(reachable([&](StateId t) { return not_p[t]; }), fair);
        }
        case Shape::FinallyAlwaysP: {
            auto f = fair;
            f.push_back(not_p);
            return full.fair_path_from(ks.initial, f);
        }
        case Shape::Response: {
            const Closure c(ks, not_q);
            return c.fair_path_from(reachable([&](StateId t) { return !not_p[t] && not_q[t]; }), fair);
        }
    }
    return false;
}

// Random structure with labels p and q and up to two justice sets.
struct RandomStructure {
    pia::Kripke ks;
    std::vector<std::vector<bool>> fair;
};

inline RandomStructure random_structure(std::mt19937& rng, std::size_t max_states = 200) {
    RandomStructure r;
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, max_states)(rng);
    const double density = std::uniform_real_distribution<double>(0.5, 3.0)(rng);
    r.ks.succ.resize(n);
    std::poisson_distribution<int> deg(density);
    std::uniform_int_distribution<StateId> pick(0, static_cast<StateId>(n - 1));
    for (StateId s = 0; s < n; ++s) {
        std::set<StateId> out;
        for (int k = deg(rng); k > 0; --k) out.insert(pick(rng));
        r.ks.succ[s].assign(out.begin(), out.end());
    }
    const int inits = std::uniform_int_distribution<int>(1, 3)(rng);
    std::set<StateId> init;
    for (int k = 0; k < inits; ++k) init.insert(pick(rng));
    r.ks.initial.assign(init.begin(), init.end());
    std::bernoulli_distribution coin(std::uniform_real_distribution<double>(0.1, 0.9)(rng));
    for (const char* ap : {"p", "q"}) {
        std::vector<bool> l(n);
        for (StateId s = 0; s < n; ++s) l[s] = coin(rng);
        r.ks.labels[ap] = l;
    }
    const int nf = std::uniform_int_distribution<int>(0, 2)(rng);
    std::bernoulli_distribution sparse(0.3);
    for (int k = 0; k < nf; ++k) {
        std::vector<bool> f(n);
        for (StateId s = 0; s < n; ++s) f[s] = sparse(rng);
        r.fair.push_back(f);
    }
    return r;
}

// Ultimately periodic words over {a, b}: every prefix/loop split of every
// word of length 1..max_len.
struct LassoWord {
    std::vector<std::set<std::string>> letters;
    std::size_t loop_start = 0;
};

inline std::vector<LassoWord> all_lasso_words(std::size_t max_len) {
    std::vector<LassoWord> out;
    for (std::size_t len = 1; len <= max_len; ++len)
        for (std::uint32_t code = 0; code < (1u << (2 * len)); ++code) {
            std::vector<std::set<std::string>> w(len);
            for (std::size_t i = 0; i < len; ++i) {
                if (code >> (2 * i) & 1u) w[i].insert("a");
                if (code >> (2 * i + 1) & 1u) w[i].insert("b");
            }
            for (std::size_t ls = 0; ls < len; ++ls) out.push_back({w, ls});
        }
    return out;
}

// Direct recursive LTL semantics on a lasso word, for formulas built from a
// small AST independent of the library's Ltl type.
struct F {
    enum Op { Ap, Not, And, Or, Until, Release, Ev, Glob } op;
    std::string ap;
    std::vector<F> kids;
};

inline F apf(const std::string& a) { return {F::Ap, a, {}}; }
inline F notf(F x) { return {F::Not, "", {std::move(x)}}; }
inline F andf(F x, F y) { return {F::And, "", {std::move(x), std::move(y)}}; }
inline F orf(F x, F y) { return {F::Or, "", {std::move(x), std::move(y)}}; }
inline F untilf(F x, F y) { return {F::Until, "", {std::move(x), std::move(y)}}; }
inline F evf(F x) { return {F::Ev, "", {std::move(x)}}; }
inline F globf(F x) { return {F::Glob, "", {std::move(x)}}; }

// Positions 0..len-1 suffice: position len continues at loop_start.
inline std::vector<bool> eval_all(const F& f, const LassoWord& w) {
    const std::size_t n = w.letters.size();
    auto next = [&](std::size_t i) { return i + 1 < n ? i + 1 : w.loop_start; };
    std::vector<bool> v(n);
    switch (f.op) {
        case F::Ap:
            for (std::size_t i = 0; i < n; ++i) v[i] = w.letters[i].count(f.ap) > 0;
            return v;
        case F::Not: {
            auto a = eval_all(f.kids[0], w);
            for (std::size_t i = 0; i < n; ++i) v[i] = !a[i];
            return v;
        }
        case F::And:
        case F::Or: {
            auto a = eval_all(f.kids[0], w), b = eval_all(f.kids[1], w);
            for (std::size_t i = 0; i < n; ++i) v[i] = f.op == F::And ? (a[i] && b[i]) : (a[i] || b[i]);
            return v;
        }
        case F::Ev: return eval_all(untilf({F::Ap, "__true", {}}, f.kids[0]), w);
        case F::Glob: return eval_all(notf(evf(notf(f.kids[0]))), w);
        case F::Until:
        case F::Release: {
            auto a = eval_all(f.kids[0], w), b = eval_all(f.kids[1], w);
            if (f.kids[0].op == F::Ap && f.kids[0].ap == "__true") a.assign(n, true);
            // Walk at most 2n steps from every position: the suffix repeats after that.
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t j = i;
                bool res = false;
                for (std::size_t k = 0; k < 2 * n + 1; ++k) {
                    if (b[j]) {
                        res = true;
                        break;
                    }
                    if (!a[j]) break;
                    j = next(j);
                }
                v[i] = res;
            }
            return v;
        }
    }
    return v;
}

inline bool holds(const F& f, const LassoWord& w) { return eval_all(f, w)[0]; }

// One SMT query per candidate tuple, no pruning and no batching.
inline std::set<std::vector<int>> brute_force_tuples(const std::vector<pia::LinearAtom>& phi,
                                                     const std::vector<std::string>& vars,
                                                     const pia::ParamSpace& ps, const pia::ThresholdSet& ts,
                                                     pia::smt::Solver& solver) {
    std::set<std::vector<int>> out;
    const int values = ts.size();
    std::vector<int> t(vars.size(), 0);
    for (;;) {
        pia::smt::Query q;
        q.assertions.push_back({"", pia::resilience_term(ps)});
        for (const auto& a : phi) q.assertions.push_back({"", pia::smt::from_predicate(pia::LinearPredicate{{a}})});
        for (std::size_t i = 0; i < vars.size(); ++i)
            q.assertions.push_back({"", pia::interval_term(ts, pia::smt::var(vars[i]), pia::AbstractValue{t[i]})});
        auto v = solver.check(q);
        if (!v.unsat()) out.insert(t);
        std::size_t i = 0;
        while (i < t.size() && ++t[i] == values) t[i++] = 0;
        if (i == t.size()) break;
    }
    return out;
}

// Direct evaluation of alpha_p: the largest j with theta_j(p) <= a.
inline int alpha(const pia::ThresholdSet& ts, const pia::Valuation& p, Int a) {
    int j = 0;
    for (int k = 0; k < ts.size(); ++k)
        if (ts[k].eval(p) <= a) j = k;
    return j;
}

}  // namespace oracle
