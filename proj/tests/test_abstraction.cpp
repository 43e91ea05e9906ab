#include <doctest.h>

#include <random>

#include "pia/cegar.hpp"
#include "pia/instance.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace pia;
using support::p3;

namespace {

using support::atom;

const std::vector<std::string> kNames{"x", "x'", "y", "n", "t", "f", "rcvd", "rcvd'", "nsnt", "nsnt'"};

// Truth of an abstract atom on interval indices; shared values are concrete in
// locals-only positions.
bool abstract_holds(const AbstractAtom& a, const Cfa& c, const std::map<std::string, Int>& conc,
                    const std::map<std::string, int>& abst, const ThresholdSet& ts, const Valuation& p, int sv,
                    int sv_next) {
    if (const auto* s = std::get_if<StatusGuard>(&a))
        return ((s->primed ? sv_next : sv) == c.status_index(s->value)) == s->equal;
    if (const auto* t = std::get_if<AbstractThreshold>(&a)) return (abst.at(t->var.str()) >= t->index) == t->at_least;
    if (const auto* g = std::get_if<TupleGuard>(&a)) {
        for (const auto& tu : g->set.tuples) {
            bool ok = true;
            for (std::size_t i = 0; i < g->vars.size() && ok; ++i) {
                const std::string k = g->vars[i].str();
                ok = g->concrete[i] ? concretize(ts, p, {tu[i]}).contains(conc.at(k)) : abst.at(k) == tu[i];
            }
            if (ok) return true;
        }
        return false;
    }
    Valuation v = p;
    for (const auto& [k, x] : conc) v[k] = x;
    if (const auto* t = std::get_if<ThresholdGuard>(&a)) return as_linear(GuardAtom{*t}).eval(v);
    return as_linear(GuardAtom{std::get<ComparisonGuard>(a)}).eval(v);
}

bool concrete_holds(const GuardAtom& a, const Cfa& c, const std::map<std::string, Int>& conc, const Valuation& p,
                    int sv, int sv_next) {
    if (const auto* s = std::get_if<StatusGuard>(&a))
        return ((s->primed ? sv_next : sv) == c.status_index(s->value)) == s->equal;
    Valuation v = p;
    for (const auto& [k, x] : conc) v[k] = x;
    return as_linear(a).eval(v);
}

}  // namespace

TEST_SUITE("abstraction") {

TEST_CASE("increment abstraction matches the 16-pair enumeration") {
    support::Built b("byz");
    const std::vector<LinearAtom> phi{atom("x' == x + 1", kNames)};
    AbstractTupleSet got = exists_abstraction(phi, {"x", "x'"}, b.model.cfa.space, b.ts, support::solver());
    auto brute = oracle::brute_force_tuples(phi, {"x", "x'"}, b.model.cfa.space, b.ts, support::solver());
    CHECK(got.tuples == brute);
    CHECK(got.tuples == std::set<Tuple>{{0, 1}, {1, 1}, {1, 2}, {2, 2}, {2, 3}, {3, 3}});
    CHECK(b.abs.shift(1) == std::vector<std::vector<int>>{{1}, {1, 2}, {2, 3}, {3}});
    CHECK(b.abs.shift(-1) == std::vector<std::vector<int>>{{}, {0, 1}, {1, 2}, {2, 3}});
}

TEST_CASE("threshold comparison is abstracted precisely") {
    support::Built b("byz");
    AbstractTupleSet got = exists_abstraction({atom("t + 1 <= x", kNames)}, {"x"}, b.model.cfa.space, b.ts, support::solver());
    CHECK(got.tuples == std::set<Tuple>{{2}, {3}});
}

TEST_CASE("unsatisfiable comparison gives the empty set") {
    support::Built b("byz");
    CHECK(exists_abstraction({atom("x < 0", kNames)}, {"x"}, b.model.cfa.space, b.ts, support::solver()).tuples.empty());
}

TEST_CASE("pruned enumeration equals the unpruned oracle") {
    support::Built b("byz");
    AbstractionOptions off;
    off.prune = false;
    for (const char* g : {"rcvd <= rcvd'", "rcvd' <= nsnt + f", "nsnt' == nsnt + 1", "x' == x + 1", "x + t < y",
                          "n - t <= x", "x != y"}) {
        CAPTURE(g);
        LinearAtom a = atom(g, kNames);
        std::vector<std::string> vars;
        for (const auto& v : LinearPredicate{{a}}.vars())
            if (std::find(b.model.cfa.space.params.begin(), b.model.cfa.space.params.end(), v) == b.model.cfa.space.params.end())
                vars.push_back(v);
        auto pruned = exists_abstraction({a}, vars, b.model.cfa.space, b.ts, support::solver());
        auto plain = exists_abstraction({a}, vars, b.model.cfa.space, b.ts, support::solver(), off);
        CHECK(pruned.tuples == plain.tuples);
        CHECK(pruned.tuples == oracle::brute_force_tuples({a}, vars, b.model.cfa.space, b.ts, support::solver()));
    }
}

TEST_CASE("full-mode threshold guard becomes an interval comparison") {
    support::Built b("byz");
    bool seen = false;
    for (std::size_t e = 0; e < b.model.cfa.edges.size(); ++e) {
        const auto& g = b.model.cfa.edges[e].guard;
        for (std::size_t k = 0; k < g.atoms.size(); ++k) {
            const auto* t = std::get_if<ThresholdGuard>(&g.atoms[k]);
            if (!t || t->bound.str() != "t + 1" || !t->at_least) continue;
            auto abs = abstract_guard(Guard{{g.atoms[k]}}, b.model.cfa, AbstractionMode::Full, b.abs);
            REQUIRE(abs.size() == 1);
            const auto* at = std::get_if<AbstractThreshold>(&abs[0]);
            REQUIRE(at);
            CHECK(at->index == 2);
            CHECK(at->at_least);
            CHECK(at->var.name == "rcvd");
            seen = true;
        }
    }
    CHECK(seen);
}

TEST_CASE("locals-only receive bound keeps nsnt concrete") {
    support::Built b("byz");
    Guard g;
    g.atoms.push_back(ComparisonGuard{{"rcvd", true}, Rel::Le, {{"nsnt", false}}, LinearExpr::var("f")});
    auto abs = abstract_guard(g, b.model.cfa, AbstractionMode::LocalsOnly, b.abs);
    REQUIRE(abs.size() == 1);
    const auto* tg = std::get_if<TupleGuard>(&abs[0]);
    REQUIRE(tg);
    REQUIRE(tg->vars.size() == 2);
    std::vector<std::string> keys;
    for (std::size_t i = 0; i < 2; ++i) {
        keys.push_back(tg->vars[i].str());
        CHECK(tg->concrete[i] == (tg->vars[i].name == "nsnt"));
    }
    CHECK(tg->set.tuples ==
          oracle::brute_force_tuples({atom("rcvd' <= nsnt + f", kNames)}, keys, b.model.cfa.space, b.ts, support::solver()));
}

TEST_CASE("status guards are unchanged in both modes") {
    support::Built b("byz");
    Guard g;
    g.atoms.push_back(StatusGuard{false, true, "V1"});
    for (auto mode : {AbstractionMode::Full, AbstractionMode::LocalsOnly}) {
        auto abs = abstract_guard(g, b.model.cfa, mode, b.abs);
        REQUIRE(abs.size() == 1);
        const auto* s = std::get_if<StatusGuard>(&abs[0]);
        REQUIRE(s);
        CHECK(*s == StatusGuard{false, true, "V1"});
    }
}

TEST_CASE("full abstraction mentions no parameter, locals-only keeps shared concrete") {
    for (const auto& name : builtin_names()) {
        CAPTURE(name);
        support::Built b(name);
        CHECK(b.full.edges.size() == b.model.cfa.edges.size());
        for (const auto& e : b.full.edges)
            for (const auto& a : e.atoms) {
                CHECK_FALSE(std::holds_alternative<ThresholdGuard>(a));
                CHECK_FALSE(std::holds_alternative<ComparisonGuard>(a));
                if (const auto* tg = std::get_if<TupleGuard>(&a))
                    for (bool c : tg->concrete) CHECK_FALSE(c);
            }
        for (const auto& e : b.lonly.edges)
            for (const auto& a : e.atoms) {
                if (const auto* t = std::get_if<AbstractThreshold>(&a)) CHECK(b.model.cfa.local_index(t->var.name) >= 0);
                if (const auto* tg = std::get_if<TupleGuard>(&a))
                    for (std::size_t i = 0; i < tg->vars.size(); ++i)
                        CHECK(tg->concrete[i] == (b.model.cfa.shared_index(tg->vars[i].name) >= 0));
            }
    }
}

TEST_CASE("status-only skeleton abstracts to itself") {
    Model m = parse_model(R"(skeleton s { parameters n; resilience n >= 1; size n; sv {A, B} init {A};
        locations qI init, qF final; edge qI -> qF when sv == A && sv' == B; edge qI -> qF when sv == B; })");
    support::Built b(m);
    for (std::size_t e = 0; e < m.cfa.edges.size(); ++e) {
        REQUIRE(b.full.edges[e].atoms.size() == m.cfa.edges[e].guard.atoms.size());
        for (std::size_t k = 0; k < m.cfa.edges[e].guard.atoms.size(); ++k)
            CHECK(std::get<StatusGuard>(b.full.edges[e].atoms[k]) == std::get<StatusGuard>(m.cfa.edges[e].guard.atoms[k]));
    }
}

TEST_CASE("data mapping at (4,1,1)") {
    support::Built b("byz");
    const Cfa& c = b.model.cfa;
    ProcessState s{c.status_index("SE"), {2}, {3}};
    ProcessState a = map_state_data(b.ts, p3(4, 1, 1), s);
    CHECK(a.sv == s.sv);
    CHECK(a.locals == std::vector<Int>{2});
    CHECK(a.shared == std::vector<Int>{3});
    ProcessState z = map_state_data(b.ts, p3(4, 1, 1), ProcessState{0, {0}, {0}});
    CHECK(z.locals == std::vector<Int>{0});
    CHECK(z.shared == std::vector<Int>{0});
}

TEST_CASE("guard abstraction is sound on sampled valuations") {
    for (const auto& name : builtin_names()) {
        CAPTURE(name);
        support::Built b(name);
        const Cfa& c = b.model.cfa;
        const auto points = sample_parameters(c.space, 20, 12);
        std::mt19937 rng(21);
        std::size_t satisfied = 0;
        for (int k = 0; k < 1000; ++k) {
            const Valuation& p = points[static_cast<std::size_t>(k) % points.size()];
            const Int hi = c.space.size.eval(p) + 3;
            std::uniform_int_distribution<Int> d(0, hi);
            std::map<std::string, Int> conc;
            std::map<std::string, int> abst;
            for (const auto& x : c.locals)
                for (const char* pr : {"", "'"}) conc[x + pr] = d(rng);
            for (const auto& x : c.shared)
                for (const char* pr : {"", "'"}) conc[x + pr] = d(rng);
            for (const auto& [key, v] : conc) abst[key] = abstract_value(b.ts, p, v).index;
            const int sv = std::uniform_int_distribution<int>(0, static_cast<int>(c.status_values.size()) - 1)(rng);
            const int sv2 = std::uniform_int_distribution<int>(0, static_cast<int>(c.status_values.size()) - 1)(rng);
            for (std::size_t e = 0; e < c.edges.size(); ++e) {
                const auto& g = c.edges[e].guard;
                bool concrete = true;
                for (const auto& a : g.atoms)
                    concrete = concrete && concrete_holds(a, c, conc, p, sv, sv2);
                if (!concrete) continue;
                ++satisfied;
                for (const auto* acfa : {&b.full, &b.lonly})
                    for (const auto& a : acfa->edges[e].atoms) CHECK(abstract_holds(a, c, conc, abst, b.ts, p, sv, sv2));
            }
        }
        CHECK(satisfied > 100);
    }
}

TEST_CASE("concrete steps are admitted by the locals-only and full abstractions") {
    support::Built b("byz");
    const Cfa& c = b.model.cfa;
    const auto p = p3(4, 1, 1);
    ConcreteInstance inst = build_concrete_instance(c, p, {});
    AbstractStepper stepper(b.full);
    std::size_t checked = 0;
    for (StateId s = 0; s < inst.size(); ++s) {
        GlobalState g = inst.state(s);
        for (StateId t : inst.ks.succ[s]) {
            GlobalState h = inst.state(t);
            for (std::size_t i = 0; i < g.processes(); ++i) {
                if (g.sv[i] == h.sv[i] && g.locals[i] == h.locals[i] && g.shared == h.shared) continue;
                bool others_same = true;
                for (std::size_t j = 0; j < g.processes(); ++j)
                    if (j != i) others_same = others_same && g.sv[j] == h.sv[j] && g.locals[j] == h.locals[j];
                if (!others_same) continue;
                ProcessState ps = g.process(i), pt = h.process(i);
                CHECK(locals_only_admits(b.lonly, p, ps, pt));
                auto succ = stepper.successors(map_state_data(b.ts, p, ps));
                CHECK(std::binary_search(succ.begin(), succ.end(), map_state_data(b.ts, p, pt)));
                ++checked;
            }
        }
    }
    CHECK(checked > 1000);
}

TEST_CASE("justice and spec labels survive data abstraction") {
    for (const auto& name : builtin_names()) {
        CAPTURE(name);
        support::Built b(name);
        const Cfa& c = b.model.cfa;
        const Valuation p = sample_parameters(c.space, 1, 12).at(0);
        ConcreteInstance inst = build_concrete_instance(c, p, {});
        std::vector<PropositionAbstraction> pas;
        for (const auto& q : support::spec_props(b.model)) pas.emplace_back(q, c, b.abs);
        for (StateId s = 0; s < inst.size(); ++s) {
            GlobalState g = inst.state(s);
            for (std::size_t i = 0; i < g.processes(); ++i) {
                ProcessState a = map_state_data(b.ts, p, g.process(i));
                std::vector<int> al(a.locals.begin(), a.locals.end()), ash(a.shared.begin(), a.shared.end());
                for (const auto& pa : pas)
                    if (prop_holds_concrete(pa.prop(), c, p, g.sv[i], g.locals[i], g.shared))
                        CHECK(pa.holds(a.sv, al, ash));
            }
        }
    }
}

}
