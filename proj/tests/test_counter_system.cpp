#include <doctest.h>

#include <chrono>
#include <deque>
#include <random>

#include "pia/cegar.hpp"
#include "pia/counter.hpp"
#include "pia/instance.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace pia;
using support::p3;

namespace {

struct ByzSystem {
    support::Built b{"byz"};
    std::vector<Proposition> props = support::spec_props(b.model);
    CounterSystem cs = build_counter_system(b.full, b.abs, props);
};

const ByzSystem& byz() {
    static const ByzSystem s;
    return s;
}

// Successor intervals of +1 and -1 from the tuple oracle.
std::vector<std::set<int>> shift_oracle(const support::Built& b, Int delta) {
    const std::string text = delta > 0 ? "x' == x + 1" : "x' == x - 1";
    auto pairs = oracle::brute_force_tuples({support::atom(text, {"x", "x'"})}, {"x", "x'"}, b.model.cfa.space, b.ts,
                                            support::solver());
    std::vector<std::set<int>> out(static_cast<std::size_t>(b.ts.size()));
    for (const auto& pr : pairs) out[static_cast<std::size_t>(pr[0])].insert(pr[1]);
    return out;
}

GlobalState abstract_global(const ThresholdSet& ts, const Valuation& p, const GlobalState& g) {
    GlobalState a;
    for (std::size_t i = 0; i < g.processes(); ++i) {
        auto ps = map_state_data(ts, p, g.process(i));
        a.sv.push_back(ps.sv);
        a.locals.push_back(ps.locals);
        a.shared = ps.shared;
    }
    return a;
}

std::vector<Int> local_counts(const CounterSystem& cs, const Valuation& p, const GlobalState& g) {
    std::vector<Int> k(cs.locals.size(), 0);
    for (std::size_t i = 0; i < g.processes(); ++i) {
        auto ps = map_state_data(cs.ts, p, g.process(i));
        LocalState l{ps.sv, std::vector<int>(ps.locals.begin(), ps.locals.end())};
        ++k.at(static_cast<std::size_t>(local_state_index(cs.cfa, cs.ts.size(), l)));
    }
    return k;
}

smt::Verdict check(std::vector<smt::Term> terms) {
    smt::Query q;
    for (auto& t : terms) q.assertions.push_back({"", std::move(t)});
    return support::solver().check(q);
}

}  // namespace

TEST_SUITE("counter_system") {

TEST_CASE("local states are indexed with the status varying fastest") {
    const auto& s = byz();
    REQUIRE(s.cs.locals.size() == 16);
    std::set<LocalState> seen;
    for (std::size_t i = 0; i < s.cs.locals.size(); ++i) {
        const auto& l = s.cs.locals[i];
        CHECK(local_state_index(s.cs.cfa, 4, l) == static_cast<int>(i));
        CHECK(l.sv == static_cast<int>(i % 4));
        CHECK(l.locals == std::vector<int>{static_cast<int>(i / 4)});
        seen.insert(l);
    }
    CHECK(seen.size() == 16);
    CHECK(local_state_str(s.cs.cfa, s.cs.locals[6]) == "[SE,rcvd=I1]");

    Model m = parse_model(R"(skeleton s { parameters n; resilience n >= 1; size n; sv {A, B, C} init {A};
        locations qI init, qF final; edge qI -> qF when sv == A && sv' == B; })");
    CHECK(enumerate_local_states(m.cfa, 3).size() == 3);
}

TEST_CASE("byz counter system size") {
    const auto& s = byz();
    CHECK(s.cs.size() == 29842);
    CHECK(s.cs.ks.initial.size() == 7);
    for (StateId i = 0; i < s.cs.size(); ++i) CHECK_FALSE(s.cs.ks.succ[i].empty());
}

TEST_CASE("counter system equals an independent breadth-first construction") {
    const auto& s = byz();
    const auto inc = shift_oracle(s.b, 1), dec = shift_oracle(s.b, -1);
    AbstractStepper stepper(s.b.full);
    const int values = s.b.ts.size();
    std::map<CounterState, std::set<CounterState>> edges;
    std::deque<CounterState> work;
    for (StateId i : s.cs.ks.initial) {
        edges[s.cs.states[i]];
        work.push_back(s.cs.states[i]);
    }
    while (!work.empty()) {
        CounterState w = work.front();
        work.pop_front();
        std::set<CounterState> out;
        for (std::size_t from = 0; from < w.kappa.size(); ++from) {
            if (w.kappa[from] == 0) continue;
            const auto& l = s.cs.locals[from];
            ProcessState ps{l.sv, std::vector<Int>(l.locals.begin(), l.locals.end()),
                            std::vector<Int>(w.shared.begin(), w.shared.end())};
            for (const auto& t : stepper.successors(ps)) {
                const int to = local_state_index(s.cs.cfa, values, {t.sv, std::vector<int>(t.locals.begin(), t.locals.end())});
                CounterState base{w.kappa, std::vector<int>(t.shared.begin(), t.shared.end())};
                if (static_cast<std::size_t>(to) == from) {
                    out.insert(base);
                    continue;
                }
                for (int a : dec[static_cast<std::size_t>(w.kappa[from])])
                    for (int c : inc[static_cast<std::size_t>(w.kappa[static_cast<std::size_t>(to)])]) {
                        CounterState nx = base;
                        nx.kappa[from] = a;
                        nx.kappa[static_cast<std::size_t>(to)] = c;
                        out.insert(nx);
                    }
            }
        }
        if (out.empty()) out.insert(w);
        for (const auto& x : out)
            if (edges.emplace(x, std::set<CounterState>{}).second) work.push_back(x);
        edges[w] = std::move(out);
    }
    REQUIRE(edges.size() == s.cs.size());
    std::size_t matched = 0;
    for (const auto& [w, out] : edges) {
        auto id = s.cs.find(w);
        REQUIRE(id);
        std::set<CounterState> got;
        for (StateId t : s.cs.ks.succ[*id]) got.insert(s.cs.states[t]);
        matched += got == out;
    }
    CHECK(matched == edges.size());
}

TEST_CASE("every transition moves at most one local state") {
    const auto& s = byz();
    const auto inc = shift_oracle(s.b, 1), dec = shift_oracle(s.b, -1);
    std::size_t bad = 0;
    for (StateId i = 0; i < s.cs.size(); ++i) {
        const auto& w = s.cs.states[i];
        for (StateId j : s.cs.ks.succ[i]) {
            const auto& w2 = s.cs.states[j];
            std::vector<std::size_t> diff;
            for (std::size_t k = 0; k < w.kappa.size(); ++k)
                if (w.kappa[k] != w2.kappa[k]) diff.push_back(k);
            if (diff.empty()) continue;
            if (diff.size() > 2) {
                ++bad;
                continue;
            }
            // one index decreased, the other increased; a lone change is a
            // counter staying in its interval on the other side
            bool ok = false;
            for (std::size_t a = 0; a < diff.size() && !ok; ++a) {
                const std::size_t from = diff[a];
                if (!dec[static_cast<std::size_t>(w.kappa[from])].count(w2.kappa[from])) continue;
                if (diff.size() == 1) {
                    ok = true;
                    continue;
                }
                const std::size_t to = diff[1 - a];
                ok = inc[static_cast<std::size_t>(w.kappa[to])].count(w2.kappa[to]) > 0;
            }
            if (diff.size() == 1 && !ok)
                ok = inc[static_cast<std::size_t>(w.kappa[diff[0]])].count(w2.kappa[diff[0]]) > 0;
            bad += !ok;
        }
    }
    CHECK(bad == 0);
}

TEST_CASE("initial counter states are images of concrete initial states") {
    const auto& s = byz();
    std::set<CounterState> images;
    const std::size_t v0 = static_cast<std::size_t>(local_state_index(s.cs.cfa, 4, {s.cs.cfa.status_index("V0"), {0}}));
    const std::size_t v1 = static_cast<std::size_t>(local_state_index(s.cs.cfa, 4, {s.cs.cfa.status_index("V1"), {0}}));
    for (const auto& p : sample_parameters(s.b.model.cfa.space, 60, 30)) {
        const Int n = s.b.model.cfa.space.size.eval(p);
        for (Int k = 0; k <= n; ++k) {
            CounterState w{std::vector<int>(16, 0), {0}};
            w.kappa[v0] = abstract_value(s.b.ts, p, k).index;
            w.kappa[v1] = abstract_value(s.b.ts, p, n - k).index;
            images.insert(w);
        }
    }
    std::set<CounterState> init;
    for (StateId i : s.cs.ks.initial) init.insert(s.cs.states[i]);
    for (const auto& w : images) CHECK(init.count(w));
    CHECK(images == init);
}

TEST_CASE("counter labels follow the quantified proposition") {
    const auto& s = byz();
    REQUIRE(s.cs.ks.labels.count("<all> sv != AC"));
    const int ac = s.cs.cfa.status_index("AC");
    const auto& lab = s.cs.ks.labels.at("<all> sv != AC");
    const auto& some = s.cs.ks.labels.at("<some> sv == AC");
    for (StateId i = 0; i < s.cs.size(); ++i) {
        bool all = true;
        for (std::size_t k = 0; k < s.cs.locals.size(); ++k)
            if (s.cs.states[i].kappa[k] > 0 && s.cs.locals[k].sv == ac) all = false;
        CHECK(lab[i] == all);
        CHECK(some[i] == !all);
    }
}

TEST_CASE("three processes in one local state count as I3 at (4,1,1)") {
    const auto& s = byz();
    GlobalState a{{2, 2, 2}, {{1}, {1}, {1}}, {2}};
    CounterState w = map_state_counter(s.cs, p3(4, 1, 1), a);
    const std::size_t idx = static_cast<std::size_t>(local_state_index(s.cs.cfa, 4, {2, {1}}));
    for (std::size_t k = 0; k < w.kappa.size(); ++k) CHECK(w.kappa[k] == (k == idx ? 3 : 0));
    CHECK(w.shared == std::vector<int>{2});
    a.sv.pop_back();
    a.locals.pop_back();
    CHECK(map_state_counter(s.cs, p3(4, 1, 1), a).kappa[idx] == 2);
}

TEST_CASE("concrete instances are simulated by the abstract instance and the counter system") {
    const auto& s = byz();
    const auto start = std::chrono::steady_clock::now();
    for (const auto& p : {p3(4, 1, 1), p3(5, 1, 1)}) {
        CAPTURE(p.at("n"));
        ConcreteInstance inst = build_concrete_instance(s.b.model.cfa, p, s.props);
        AbstractInstance ai = build_abstract_instance(s.b.full, p);
        std::set<StateId> init(s.cs.ks.initial.begin(), s.cs.ks.initial.end());
        std::size_t missing_dat = 0, missing_cnt = 0, missing_ai = 0, bad_init = 0, bad_label = 0;
        std::vector<GlobalState> images(inst.size());
        std::vector<StateId> cimage(inst.size());
        for (StateId i = 0; i < inst.size(); ++i) {
            images[i] = abstract_global(s.cs.ts, p, inst.state(i));
            auto c = s.cs.find(map_state_dc(s.cs, p, inst.state(i)));
            REQUIRE(c);
            cimage[i] = *c;
            for (const auto& q : s.props)
                if (inst.ks.label(q.name(), i) && !s.cs.ks.label(q.name(), *c)) ++bad_label;
        }
        for (StateId i : inst.ks.initial) {
            bad_init += !init.count(cimage[i]);
            bad_init += !ai.index.count(images[i]);
        }
        for (StateId i = 0; i < inst.size(); ++i)
            for (StateId j : inst.ks.succ[i]) {
                auto a = ai.index.find(images[i]), b = ai.index.find(images[j]);
                if (a == ai.index.end() || b == ai.index.end()) {
                    ++missing_dat;
                    continue;
                }
                const auto& sa = ai.succ[a->second];
                if (!std::binary_search(sa.begin(), sa.end(), b->second) && a != b) ++missing_dat;
                if (!s.cs.has_edge(cimage[i], cimage[j])) ++missing_cnt;
            }
        // the counter system simulates the abstract instance
        for (StateId i = 0; i < ai.states.size(); ++i) {
            auto c = s.cs.find(map_state_counter(s.cs, p, ai.states[i]));
            if (!c) {
                ++missing_ai;
                continue;
            }
            for (StateId j : ai.succ[i]) {
                auto d = s.cs.find(map_state_counter(s.cs, p, ai.states[j]));
                if (!d || !s.cs.has_edge(*c, *d)) ++missing_ai;
            }
        }
        CHECK(missing_dat == 0);
        CHECK(missing_cnt == 0);
        CHECK(missing_ai == 0);
        CHECK(bad_init == 0);
        CHECK(bad_label == 0);
    }
    CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(60));
}

TEST_CASE("symbolic VASS constraints") {
    support::Built b("byz");
    auto props = support::spec_props(b.model);
    SymbolicVass v = encode_lvass(b.lonly, props);
    REQUIRE(v.locals.size() == 16);
    auto sum = [&](bool primed) {
        std::vector<smt::Term> ks;
        for (std::size_t i = 0; i < v.locals.size(); ++i) ks.push_back(smt::var(SymbolicVass::counter(i, primed)));
        return smt::add(ks);
    };
    const smt::Term n_f = smt::sub(smt::var("n"), smt::var("f"));
    CHECK(check({v.step}).sat());
    CHECK(check({v.init}).sat());
    std::vector<smt::Query> nonzero, same;
    for (std::size_t i = 0; i < v.locals.size(); ++i) {
        const smt::Term ii = smt::lit(static_cast<Int>(i));
        nonzero.push_back({{{"", smt::conj({v.step, smt::eq(smt::var("_from"), ii),
                                            smt::eq(smt::var(SymbolicVass::counter(i)), smt::lit(0))})}}});
        same.push_back({{{"", smt::conj({v.step, smt::eq(smt::var("_from"), ii), smt::eq(smt::var("_to"), ii),
                                         smt::neg(smt::eq(smt::var(SymbolicVass::counter(i, true)),
                                                          smt::var(SymbolicVass::counter(i))))})}}});
    }
    for (const auto& r : support::solver().check_all(nonzero)) CHECK(r.unsat());
    for (const auto& r : support::solver().check_all(same)) CHECK(r.unsat());
    CHECK(check({v.init, smt::neg(smt::eq(sum(false), n_f))}).unsat());
    CHECK(check({v.step, smt::neg(smt::eq(sum(true), sum(false)))}).unsat());
    const Int v1 = b.model.cfa.status_index("V1");
    CHECK(check({v.step, smt::eq(smt::var("_sv"), smt::lit(v1)),
                 smt::neg(smt::eq(smt::var("nsnt'"), smt::add({smt::var("nsnt"), smt::lit(1)})))})
              .unsat());
    CHECK(check({v.step, smt::eq(smt::var("_sv"), smt::lit(v1))}).sat());
    CHECK(check({v.step, smt::lt(smt::var("nsnt'"), smt::var("nsnt"))}).unsat());
    CHECK(smt::free_vars(v.init).count("_sv") == 0);
}

TEST_CASE("symbolic VASS admits sampled concrete transitions and labels") {
    const auto& s = byz();
    SymbolicVass v = encode_lvass(s.b.lonly, s.props);
    const auto p = p3(5, 1, 1);
    ConcreteInstance inst = build_concrete_instance(s.b.model.cfa, p, s.props);
    std::mt19937 rng(5);
    std::vector<smt::Query> qs, neg;
    std::vector<bool> expect;
    auto fix = [&](std::vector<smt::Term>& body, const GlobalState& g, bool primed) {
        auto k = local_counts(s.cs, p, g);
        for (std::size_t i = 0; i < k.size(); ++i) body.push_back(smt::eq(smt::var(SymbolicVass::counter(i, primed)), smt::lit(k[i])));
        for (std::size_t j = 0; j < v.shared.size(); ++j)
            body.push_back(smt::eq(smt::var(SymbolicVass::shared_var(v.shared[j], primed)), smt::lit(g.shared[j])));
    };
    auto params = [&](std::vector<smt::Term>& body) {
        for (const auto& [x, val] : p) body.push_back(smt::eq(smt::var(x), smt::lit(val)));
    };
    std::uniform_int_distribution<StateId> pick(0, static_cast<StateId>(inst.size() - 1));
    for (int n = 0; n < 60; ++n) {
        StateId i = pick(rng);
        const auto& succ = inst.ks.succ[i];
        StateId j = succ[std::uniform_int_distribution<std::size_t>(0, succ.size() - 1)(rng)];
        GlobalState g = inst.state(i), h = inst.state(j);
        if (g == h) continue;
        std::vector<smt::Term> body{v.step};
        params(body);
        fix(body, g, false);
        fix(body, h, true);
        qs.push_back({{{"", smt::conj(body)}}});
        for (const auto& q : s.props) {
            std::vector<smt::Term> lb{v.rc, v.labels.at(q.name())};
            params(lb);
            fix(lb, g, false);
            if (inst.ks.label(q.name(), i)) qs.push_back({{{"", smt::conj(lb)}}});
            else if (q.is_status) neg.push_back({{{"", smt::conj(lb)}}});
        }
    }
    REQUIRE(qs.size() > 50);
    for (const auto& r : support::solver().check_all(qs)) CHECK(r.sat());
    for (const auto& r : support::solver().check_all(neg)) CHECK(r.unsat());
}

}
