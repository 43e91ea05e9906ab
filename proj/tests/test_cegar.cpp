#include <doctest.h>

#include "pia/cegar.hpp"
#include "pia/errors.hpp"
#include "support.hpp"

using namespace pia;
using support::p3;

namespace {

struct Vass {
    support::Built b{"byz"};
    std::vector<Proposition> justice{b.model.justice_prop("CJ")->prop};
    SymbolicVass v = encode_lvass(b.lonly, justice);
};

Vass& byz_vass() {
    static Vass s;
    return s;
}

// Counter state with the given non-zero counters and shared intervals.
CounterState counters(const Cfa& c, std::vector<std::tuple<std::string, int, int>> entries, std::vector<int> shared) {
    CounterState w{std::vector<int>(16, 0), std::move(shared)};
    for (const auto& [sv, rcvd, k] : entries)
        w.kappa[static_cast<std::size_t>(local_state_index(c, 4, {c.status_index(sv), {rcvd}}))] = k;
    return w;
}

Valuation counter_valuation(const CounterSystem& cs, const Valuation& p, const GlobalState& g) {
    Valuation v = p;
    std::vector<Int> k(cs.locals.size(), 0);
    for (std::size_t i = 0; i < g.processes(); ++i) {
        auto ps = map_state_data(cs.ts, p, g.process(i));
        ++k.at(static_cast<std::size_t>(local_state_index(cs.cfa, cs.ts.size(), {ps.sv, {ps.locals.begin(), ps.locals.end()}})));
    }
    for (std::size_t i = 0; i < k.size(); ++i) v[SymbolicVass::counter(i)] = k[i];
    for (std::size_t j = 0; j < cs.cfa.shared.size(); ++j) v[cs.cfa.shared[j]] = g.shared[j];
    return v;
}

}  // namespace

TEST_SUITE("cegar") {

TEST_CASE("invariant proofs") {
    auto& s = byz_vass();
    const Cfa& c = s.b.model.cfa;
    auto relay = parse_invariants(relay_invariant_source(), c);
    REQUIRE(relay.size() == 1);
    CHECK(check_invariant(invariant_term(relay[0], s.v, c), s.v, support::solver()).proven);
    CHECK(check_invariant(smt::boolean(true), s.v, support::solver()).proven);
    auto zero = parse_invariants("nsnt == 0", c);
    InvariantResult r = check_invariant(invariant_term(zero[0], s.v, c), s.v, support::solver());
    CHECK_FALSE(r.proven);
    CHECK(r.failed == "step");
    REQUIRE(r.model.count("nsnt'"));
    CHECK(r.model.at("nsnt") == 0);
    CHECK(r.model.at("nsnt'") != 0);
    auto bad_init = parse_invariants("nsnt >= 1", c);
    CHECK(check_invariant(invariant_term(bad_init[0], s.v, c), s.v, support::solver()).failed == "init");
}

TEST_CASE("unjust counter states") {
    auto& s = byz_vass();
    const Cfa& c = s.b.model.cfa;
    const std::string q = s.justice[0].name();
    // every process has rcvd = 0 while nsnt >= t + 1
    CHECK(is_state_unjust(counters(c, {{"V0", 0, 3}}, {2}), q, s.v, support::solver()));
    CHECK_FALSE(is_state_unjust(counters(c, {{"V0", 0, 3}}, {0}), q, s.v, support::solver()));
    CHECK_FALSE(is_state_unjust(counters(c, {{"V0", 2, 3}}, {2}), q, s.v, support::solver()));
    // rcvd in [1, t] with nsnt >= n - t > t
    CHECK(is_state_unjust(counters(c, {{"SE", 1, 3}}, {3}), q, s.v, support::solver()));
    auto batch = check_unjust({counters(c, {{"V0", 0, 3}}, {2}), counters(c, {{"V0", 0, 3}}, {0})}, q, s.v, support::solver());
    CHECK(batch == std::vector<bool>{true, false});
}

TEST_CASE("spurious transitions") {
    auto& s = byz_vass();
    const Cfa& c = s.b.model.cfa;
    // nsnt cannot jump from 0 to n - t in one step
    auto r = is_transition_spurious(counters(c, {{"V1", 0, 3}}, {0}), counters(c, {{"V1", 0, 3}}, {3}), s.v, support::solver());
    CHECK(r.spurious);
    CHECK_FALSE(r.core.empty());
    // one V1 process sends
    auto ok = is_transition_spurious(counters(c, {{"V1", 0, 3}}, {0}), counters(c, {{"V1", 0, 2}, {"SE", 0, 1}}, {1}), s.v,
                                     support::solver());
    CHECK_FALSE(ok.spurious);
}

TEST_CASE("concrete steps are never spurious") {
    auto& s = byz_vass();
    auto props = support::spec_props(s.b.model);
    CounterSystem cs = build_counter_system(s.b.full, s.b.abs, props);
    const auto p = p3(4, 1, 1);
    ConcreteInstance inst = build_concrete_instance(s.b.model.cfa, p, {});
    std::set<std::pair<CounterState, CounterState>> steps;
    for (StateId i = 0; i < inst.size(); ++i)
        for (StateId j : inst.ks.succ[i]) {
            auto a = map_state_dc(cs, p, inst.state(i)), b = map_state_dc(cs, p, inst.state(j));
            if (a != b) steps.insert({a, b});
        }
    REQUIRE(steps.size() > 20);
    std::vector<std::pair<CounterState, CounterState>> ts(steps.begin(), steps.end());
    for (const auto& r : check_transitions(ts, s.v, support::solver())) CHECK_FALSE(r.spurious);
}

TEST_CASE("transitions sharing a core are spurious too") {
    auto& s = byz_vass();
    auto props = support::spec_props(s.b.model);
    CounterSystem cs = build_counter_system(s.b.full, s.b.abs, props);
    std::size_t found = 0;
    for (StateId i = 0; i < cs.size() && found < 3; ++i)
        for (StateId j : cs.ks.succ[i]) {
            if (found >= 3) break;
            auto r = is_transition_spurious(cs.states[i], cs.states[j], s.v, support::solver());
            if (!r.spurious) continue;
            ++found;
            auto same = transitions_matching_core(cs, cs.states[i], cs.states[j], r.core);
            CHECK(std::find(same.begin(), same.end(), Transition{i, j}) != same.end());
            std::vector<std::pair<CounterState, CounterState>> ts;
            for (std::size_t k = 0; k < same.size() && k < 40; ++k) ts.push_back({cs.states[same[k].first], cs.states[same[k].second]});
            for (const auto& x : check_transitions(ts, s.v, support::solver())) CHECK(x.spurious);
        }
    CHECK(found == 3);
}

TEST_CASE("refinements of byz C never cut concrete behaviour") {
    Model m = builtin_model("byz");
    std::size_t removed = 0, offu = 0, calls = 0;
    bool monotone = true;
    VerifyOptions o;
    o.on_refine = [&](const CounterSystem&, const RefinementState& st) {
        monotone = monotone && st.removed.size() >= removed && st.offu_sets.size() >= offu;
        removed = st.removed.size();
        offu = st.offu_sets.size();
        ++calls;
    };
    auto r = verify(m, m.spec("C")->formula, {"CJ"}, support::model_invariants(m), support::solver(), o);
    CHECK(r.verdict == VerdictKind::Verified);
    CHECK(calls == r.refinements());
    CHECK(calls > 0);
    CHECK(monotone);
    REQUIRE(r.parts.size() == 1);
    const auto& part = r.parts[0];
    const CounterSystem& cs = *part.system;
    CHECK_FALSE(part.state.trace.empty());
    for (const auto& p : {p3(4, 1, 1), p3(5, 1, 1)}) {
        ConcreteInstance inst = build_concrete_instance(m.cfa, p, {m.justice_prop("CJ")->prop});
        std::vector<StateId> img(inst.size());
        std::size_t cut = 0, unjust = 0, inv = 0;
        for (StateId i = 0; i < inst.size(); ++i) {
            img[i] = *cs.find(map_state_dc(cs, p, inst.state(i)));
            for (const auto& o2 : part.state.offu_sets)
                if (o2.unjust[img[i]] && inst.ks.label(o2.q, i)) ++unjust;
            Valuation v = counter_valuation(cs, p, inst.state(i));
            for (const auto& x : part.state.invariants) inv += !smt::eval_bool(x.term, v);
        }
        for (StateId i = 0; i < inst.size(); ++i)
            for (StateId j : inst.ks.succ[i]) cut += part.state.removed.count({img[i], img[j]});
        CHECK(cut == 0);
        CHECK(unjust == 0);
        CHECK(inv == 0);
    }
    Kripke k = refined_kripke(cs, part.state);
    for (const auto& [a, b] : part.state.removed) CHECK_FALSE(std::binary_search(k.succ[a].begin(), k.succ[a].end(), b));
    auto fair = refined_fairness(cs, part.state, {m.justice_prop("CJ")->prop.name()});
    CHECK(fair.size() == 1 + part.state.offu_sets.size());
}

TEST_CASE("without invariants the byz C refinement is stuck") {
    Model m = builtin_model("byz");
    VerifyOptions o;
    o.replay_samples = 2;
    auto r = verify(m, m.spec("C")->formula, {"CJ"}, {}, support::solver(), o);
    CHECK(r.verdict == VerdictKind::Falsified);
    REQUIRE(r.parts.size() == 1);
    CHECK_FALSE(r.parts[0].stuck_report.empty());
    CHECK_FALSE(r.parts[0].witness.has_value());
}

TEST_CASE("sampled parameters are admissible and ordered") {
    Model m = builtin_model("byz");
    auto ps = sample_parameters(m.cfa.space, 10);
    REQUIRE(ps.size() == 10);
    CHECK(ps[0] == p3(4, 1, 1));
    for (std::size_t i = 0; i < ps.size(); ++i) {
        CHECK(m.cfa.space.admits(ps[i]));
        if (i) CHECK(m.cfa.space.size.eval(ps[i - 1]) <= m.cfa.space.size.eval(ps[i]));
    }
}

TEST_CASE("weakened resilience yields a genuine counterexample") {
    Model m = builtin_model("byz");
    m.cfa.space.resilience = parse_linear_predicate("n > 3t && t + 1 >= f && t >= 1", m.cfa.space.params);
    const Ltl& u = m.spec("U")->formula;
    auto r = verify(m, u, {}, support::model_invariants(m), support::solver());
    CHECK(r.verdict == VerdictKind::Falsified);
    REQUIRE(r.parts.size() == 1);
    REQUIRE(r.parts[0].witness);
    const auto& w = *r.parts[0].witness;
    CHECK(m.cfa.space.admits(w.params));
    CHECK(w.params.at("f") > w.params.at("t"));
    CHECK(witness_is_genuine(m.cfa, w, u, {}));
    CHECK_FALSE(w.loop.empty());
    // the replayed run is a real counterexample, a direct search agrees
    CHECK(concrete_counterexample(m.cfa, u, w.params, {}).has_value());
}

TEST_CASE("verification of the byz specifications") {
    Model m = builtin_model("byz");
    auto inv = support::model_invariants(m);
    CHECK(verify(m, m.spec("U")->formula, {}, inv, support::solver()).verdict == VerdictKind::Verified);
    CHECK(verify(m, m.spec("R")->formula, {"CJ"}, inv, support::solver()).verdict == VerdictKind::Verified);
    auto never = parse_ltl("G !(<some> sv == AC)", &m.cfa);
    auto r = verify(m, never, {"CJ"}, inv, support::solver());
    CHECK(r.verdict == VerdictKind::Falsified);
    REQUIRE(r.parts[0].witness);
    CHECK(witness_is_genuine(m.cfa, *r.parts[0].witness, never, {m.justice_prop("CJ")->prop}));
    CHECK_THROWS_AS((void)verify(m, never, {"nope"}, inv, support::solver()), Error);
}

}
