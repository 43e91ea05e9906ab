#include "pia/cegar.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <map>
#include <sstream>
#include <unordered_map>

#include "pia/errors.hpp"

namespace pia {

FairSet OffuSet::fair_set() const {
    FairSet f;
    f.name = "offu:" + q;
    f.members.resize(unjust.size());
    for (std::size_t i = 0; i < unjust.size(); ++i) f.members[i] = !unjust[i];
    return f;
}

namespace {

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// What a core label constrains: the source or target state, and which field.
struct CoreRef {
    bool post = false;
    bool counter = true;
    std::size_t index = 0;
};

std::optional<CoreRef> parse_core_label(const std::string& l, const SymbolicVass* vass, const CounterSystem* cs) {
    CoreRef r;
    std::string rest;
    if (l.rfind("pre_", 0) == 0) rest = l.substr(4);
    else if (l.rfind("post_", 0) == 0) {
        r.post = true;
        rest = l.substr(5);
    } else {
        return std::nullopt;
    }
    const auto& shared = vass ? vass->shared : cs->cfa.shared;
    auto it = std::find(shared.begin(), shared.end(), rest);
    if (it != shared.end()) {
        r.counter = false;
        r.index = static_cast<std::size_t>(it - shared.begin());
        return r;
    }
    if (rest.size() > 1 && rest[0] == 'K') {
        r.index = std::stoul(rest.substr(1));
        return r;
    }
    return std::nullopt;
}

}  // namespace

std::vector<SpuriousResult> check_transitions(const std::vector<std::pair<CounterState, CounterState>>& ts,
                                              const SymbolicVass& vass, smt::Solver& solver,
                                              const std::vector<smt::Term>& invariants) {
    std::vector<smt::Query> qs;
    for (const auto& [w, w2] : ts) {
        smt::Query q;
        q.want_core = true;
        q.assertions.push_back({"", vass.step});
        for (const auto& inv : invariants) {
            q.assertions.push_back({"", inv});
            q.assertions.push_back({"", vass.prime(inv)});
        }
        for (auto& a : vass.state_constraints(w, false, "pre_")) q.assertions.push_back(std::move(a));
        for (auto& a : vass.state_constraints(w2, true, "post_")) q.assertions.push_back(std::move(a));
        qs.push_back(std::move(q));
    }
    std::vector<SpuriousResult> out(ts.size());
    std::vector<smt::Verdict> vs;
    try {
        vs = solver.check_all(qs);
    } catch (const SolverError&) {
        return out;
    }
    for (std::size_t i = 0; i < ts.size(); ++i) {
        out[i].spurious = vs[i].unsat();
        out[i].core = vs[i].core;
    }
    return out;
}

SpuriousResult is_transition_spurious(const CounterState& w, const CounterState& w2, const SymbolicVass& vass,
                                      smt::Solver& solver, const std::vector<smt::Term>& invariants) {
    return check_transitions({{w, w2}}, vass, solver, invariants).front();
}

std::vector<Transition> transitions_matching_core(const CounterSystem& cs, const CounterState& w, const CounterState& w2,
                                                  const std::set<std::string>& core) {
    std::vector<CoreRef> refs;
    for (const auto& l : core)
        if (auto r = parse_core_label(l, nullptr, &cs)) refs.push_back(*r);
    auto value = [](const CounterState& s, const CoreRef& r) { return r.counter ? s.kappa[r.index] : s.shared[r.index]; };
    std::vector<Transition> out;
    for (StateId s = 0; s < cs.size(); ++s) {
        bool pre_ok = true;
        for (const auto& r : refs)
            if (!r.post && value(cs.states[s], r) != value(w, r)) {
                pre_ok = false;
                break;
            }
        if (!pre_ok) continue;
        for (StateId t : cs.ks.succ[s]) {
            bool ok = true;
            for (const auto& r : refs)
                if (r.post && value(cs.states[t], r) != value(w2, r)) {
                    ok = false;
                    break;
                }
            if (ok) out.emplace_back(s, t);
        }
    }
    return out;
}

std::vector<bool> check_unjust(const std::vector<CounterState>& ws, const std::string& q, const SymbolicVass& vass,
                               smt::Solver& solver, const std::vector<smt::Term>& invariants) {
    std::vector<bool> out(ws.size(), false);
    auto it = vass.labels.find(q);
    if (it == vass.labels.end()) throw Error("cegar", "no VASS label for justice proposition '" + q + "'");
    std::vector<smt::Query> qs;
    for (const auto& w : ws) {
        smt::Query qu;
        qu.assertions = {{"", it->second}, {"", vass.rc}, {"", vass.size_ok}};
        for (const auto& inv : invariants) qu.assertions.push_back({"", inv});
        for (auto& a : vass.state_constraints(w, false, "")) qu.assertions.push_back({"", a.term});
        qs.push_back(std::move(qu));
    }
    try {
        auto vs = solver.check_all(qs);
        for (std::size_t i = 0; i < ws.size(); ++i) out[i] = vs[i].unsat();
    } catch (const SolverError&) {
    }
    return out;
}

bool is_state_unjust(const CounterState& w, const std::string& q, const SymbolicVass& vass, smt::Solver& solver) {
    return check_unjust({w}, q, vass, solver).front();
}

InvariantResult check_invariant(const smt::Term& inv, const SymbolicVass& vass, smt::Solver& solver) {
    smt::Query init;
    init.want_model = true;
    init.assertions = {{"", vass.init}, {"", smt::neg(inv)}};
    smt::Query step;
    step.want_model = true;
    step.assertions = {{"", inv}, {"", vass.step}, {"", smt::neg(vass.prime(inv))}};
    auto vs = solver.check_all({init, step});
    InvariantResult r;
    if (!vs[0].unsat()) {
        r.failed = "init";
        r.model = vs[0].model;
    } else if (!vs[1].unsat()) {
        r.failed = "step";
        r.model = vs[1].model;
    } else {
        r.proven = true;
    }
    return r;
}

smt::Term invariant_term(const InvariantCandidate& c, const SymbolicVass& vass, const Cfa& cfa) {
    auto matches = [&](const CounterPattern& pat, const LocalState& l) {
        if (pat.any) return true;
        if (pat.status && !pat.status->count(cfa.status_values.at(l.sv))) return false;
        for (const auto& [x, allowed] : pat.locals) {
            int i = cfa.local_index(x);
            if (i < 0 || !allowed.count(l.locals.at(i))) return false;
        }
        return true;
    };
    auto side = [&](const std::vector<InvariantTerm>& terms) {
        std::vector<smt::Term> parts{smt::lit(0)};
        for (const auto& t : terms) {
            if (t.kind == InvariantTerm::Kind::Const) {
                parts.push_back(smt::lit(t.coeff));
            } else if (t.kind == InvariantTerm::Kind::Name) {
                parts.push_back(smt::mul(t.coeff, smt::var(t.name)));
            } else {
                for (std::size_t i = 0; i < vass.locals.size(); ++i)
                    if (matches(t.pattern, vass.locals[i]))
                        parts.push_back(smt::mul(t.coeff, smt::var(SymbolicVass::counter(i))));
            }
        }
        return smt::add(parts);
    };
    std::vector<smt::Term> atoms;
    for (const auto& a : c.atoms) atoms.push_back(smt::cmp(side(a.lhs), a.rel, side(a.rhs)));
    return smt::conj(atoms);
}

Kripke refined_kripke(const CounterSystem& cs, const RefinementState& st) { return cs.without(st.removed); }

std::vector<FairSet> refined_fairness(const CounterSystem& cs, const RefinementState& st,
                                      const std::vector<std::string>& justice) {
    std::vector<FairSet> out;
    for (const auto& q : justice) {
        auto it = cs.ks.labels.find(q);
        if (it == cs.ks.labels.end()) throw Error("cegar", "counter system has no label for '" + q + "'");
        out.push_back({q, it->second});
    }
    for (const auto& o : st.offu_sets) out.push_back(o.fair_set());
    return out;
}

RefineResult refine_step(const CounterSystem& cs, const Lasso& cex, RefinementState& st, const SymbolicVass& vass,
                         const std::vector<std::string>& justice, smt::Solver& solver, const RefineOptions& opts) {
    std::vector<Transition> trans;
    for (std::size_t i = 0; i < cex.length(); ++i) {
        Transition t{cex.at(i), cex.at(cex.next(i))};
        if (std::find(trans.begin(), trans.end(), t) == trans.end()) trans.push_back(t);
    }
    std::vector<StateId> loop;
    for (StateId s : cex.loop)
        if (std::find(loop.begin(), loop.end(), s) == loop.end()) loop.push_back(s);

    auto try_spurious = [&](const std::vector<smt::Term>& invs, const char* kind) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<std::pair<CounterState, CounterState>> pairs;
        for (const auto& [s, t] : trans) pairs.emplace_back(cs.states[s], cs.states[t]);
        auto res = check_transitions(pairs, vass, solver, invs);
        std::size_t before = st.removed.size();
        for (std::size_t i = 0; i < trans.size(); ++i) {
            if (!res[i].spurious) continue;
            st.removed.insert(trans[i]);
            for (const auto& t : transitions_matching_core(cs, pairs[i].first, pairs[i].second, res[i].core))
                st.removed.insert(t);
        }
        if (st.removed.size() == before) return false;
        st.trace.push_back({kind, st.removed.size() - before, "", elapsed(t0)});
        return true;
    };
    auto try_unjust = [&](const std::vector<smt::Term>& invs, const char* kind) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<CounterState> ws;
        for (StateId s : loop) ws.push_back(cs.states[s]);
        bool any = false;
        for (const auto& q : justice) {
            auto un = check_unjust(ws, q, vass, solver, invs);
            if (!std::all_of(un.begin(), un.end(), [](bool b) { return b; })) continue;
            OffuSet o;
            o.q = q;
            o.unjust.assign(cs.size(), false);
            for (StateId s : loop) o.unjust[s] = true;
            st.offu_sets.push_back(std::move(o));
            st.trace.push_back({kind, 0, q, elapsed(t0)});
            any = true;
            if (!opts.all_q) break;
        }
        return any;
    };

    std::vector<smt::Term> invs;
    for (const auto& i : st.invariants) invs.push_back(i.term);
    for (char c : opts.order) {
        bool done = false;
        if (c == 's') done = try_spurious({}, "spurious");
        else if (c == 'u') done = try_unjust({}, "unjust");
        else if (c == 'i' && !invs.empty()) done = try_spurious(invs, "invariant") || try_unjust(invs, "invariant-unjust");
        if (done) {
            ++st.iterations;
            return {true, ""};
        }
    }
    std::ostringstream o;
    o << "no uniformly spurious transition and no unjust loop in a lasso of " << cex.prefix.size() << "+"
      << cex.loop.size() << " states";
    return {false, o.str()};
}

namespace {

std::vector<FairSet> concrete_fairness(const Kripke& ks, const std::vector<Proposition>& justice) {
    std::vector<FairSet> out;
    for (const auto& q : justice) out.push_back({q.name(), ks.labels.at(q.name())});
    return out;
}

ConcreteWitness to_witness(const ConcreteInstance& inst, const Lasso& l) {
    ConcreteWitness w;
    w.params = inst.params;
    for (StateId s : l.prefix) w.prefix.push_back(inst.state(s));
    for (StateId s : l.loop) w.loop.push_back(inst.state(s));
    return w;
}

}  // namespace

std::optional<ConcreteWitness> concrete_replay(const CounterSystem& cs, const Lasso& cex, const Valuation& p,
                                               const std::vector<Proposition>& justice, const ReplayOptions& opts) {
    InstanceOptions io;
    io.cap = opts.cap;
    io.budget = opts.budget;
    ConcreteInstance inst = build_concrete_instance(cs.cfa, p, justice, io);
    std::vector<std::optional<StateId>> image(inst.size());
    for (StateId s = 0; s < inst.size(); ++s) image[s] = cs.find(map_state_dc(cs, p, inst.state(s)));

    // Product of concrete states with lasso positions.
    Kripke prod;
    std::vector<std::pair<StateId, std::size_t>> nodes;
    std::map<std::pair<StateId, std::size_t>, StateId> index;
    std::deque<StateId> work;
    auto intern = [&](StateId s, std::size_t i) {
        auto [it, fresh] = index.emplace(std::make_pair(s, i), static_cast<StateId>(nodes.size()));
        if (fresh) {
            nodes.emplace_back(s, i);
            prod.succ.emplace_back();
            work.push_back(it->second);
        }
        return it->second;
    };
    for (StateId s : inst.ks.initial)
        if (image[s] == cex.at(0)) prod.initial.push_back(intern(s, 0));
    while (!work.empty()) {
        StateId v = work.front();
        work.pop_front();
        auto [s, i] = nodes[v];
        const std::size_t j = cex.next(i);
        std::vector<StateId> succ = inst.ks.succ[s];
        if (succ.empty()) succ.push_back(s);
        std::vector<StateId> out;
        for (StateId t : succ)
            if (image[t] == cex.at(j)) out.push_back(intern(t, j));
        prod.succ[v] = std::move(out);
    }
    std::vector<FairSet> fair;
    for (const auto& q : justice) {
        FairSet f{q.name(), std::vector<bool>(nodes.size())};
        for (StateId v = 0; v < nodes.size(); ++v) f.members[v] = inst.ks.label(q.name(), nodes[v].first);
        fair.push_back(std::move(f));
    }
    FairSet head{"loop-head", std::vector<bool>(nodes.size())};
    for (StateId v = 0; v < nodes.size(); ++v) head.members[v] = nodes[v].second == cex.prefix.size();
    fair.push_back(std::move(head));
    CheckOptions co;
    co.stutter_deadlocks = false;
    auto r = check_fair(prod, ltl::bottom(), fair, co);
    if (r.holds) return std::nullopt;
    Lasso l;
    for (StateId v : r.counterexample->prefix) l.prefix.push_back(nodes[v].first);
    for (StateId v : r.counterexample->loop) l.loop.push_back(nodes[v].first);
    auto w = to_witness(inst, l);
    w.image_matched = true;
    return w;
}

std::optional<ConcreteWitness> concrete_counterexample(const Cfa& cfa, const Ltl& phi, const Valuation& p,
                                                       const std::vector<Proposition>& justice, const ReplayOptions& opts) {
    std::vector<Proposition> props = propositions(phi);
    for (const auto& q : justice) props.push_back(q);
    InstanceOptions io;
    io.cap = opts.cap;
    io.budget = opts.budget;
    ConcreteInstance inst = build_concrete_instance(cfa, p, props, io);
    auto r = check_fair(inst.ks, phi, concrete_fairness(inst.ks, justice));
    if (r.holds) return std::nullopt;
    return to_witness(inst, *r.counterexample);
}

bool witness_is_genuine(const Cfa& cfa, const ConcreteWitness& w, const Ltl& phi, const std::vector<Proposition>& justice,
                        std::optional<Int> cap) {
    if (w.loop.empty()) return false;
    std::vector<Proposition> props = propositions(phi);
    for (const auto& q : justice) props.push_back(q);
    InstanceOptions io;
    io.cap = cap;
    ConcreteInstance inst = build_concrete_instance(cfa, w.params, props, io);
    Lasso l;
    for (const auto& g : w.prefix) {
        auto id = inst.find(g);
        if (!id) return false;
        l.prefix.push_back(*id);
    }
    for (const auto& g : w.loop) {
        auto id = inst.find(g);
        if (!id) return false;
        l.loop.push_back(*id);
    }
    if (!lasso_is_path(inst.ks, l)) return false;
    for (const auto& q : justice) {
        bool hit = false;
        for (StateId s : l.loop) hit = hit || inst.ks.label(q.name(), s);
        if (!hit) return false;
    }
    return !eval_lasso(phi, lasso_word(inst.ks, l), l.prefix.size());
}

std::vector<Valuation> sample_parameters(const ParamSpace& ps, std::size_t count, Int bound) {
    std::vector<std::pair<Int, std::vector<Int>>> found;
    std::vector<Int> v(ps.params.size(), 0);
    for (;;) {
        Valuation p;
        for (std::size_t i = 0; i < v.size(); ++i) p[ps.params[i]] = v[i];
        if (ps.admits(p)) {
            Int n = ps.size.eval(p);
            if (n >= 1) found.emplace_back(n, v);
        }
        std::size_t i = 0;
        while (i < v.size() && ++v[i] > bound) v[i++] = 0;
        if (i == v.size()) break;
    }
    std::sort(found.begin(), found.end());
    std::vector<Valuation> out;
    for (std::size_t k = 0; k < found.size() && out.size() < count; ++k) {
        Valuation p;
        for (std::size_t i = 0; i < ps.params.size(); ++i) p[ps.params[i]] = found[k].second[i];
        out.push_back(std::move(p));
    }
    return out;
}

const char* verdict_name(VerdictKind k) {
    switch (k) {
        case VerdictKind::Verified: return "Verified";
        case VerdictKind::Falsified: return "Falsified";
        case VerdictKind::Inconclusive: return "Inconclusive";
    }
    return "?";
}

std::size_t VerifyResult::refinements() const {
    std::size_t n = 0;
    for (const auto& p : parts) n += p.state.iterations;
    return n;
}

namespace {

void run_part(PartResult& part, const Model& model, const Ltl& spec, const std::vector<Proposition>& justice,
              const std::vector<InvariantCandidate>& invariants, smt::Solver& solver, const VerifyOptions& opts) {
    Cfa cfa = model.cfa;
    cfa.space = part.space;
    Abstractor abs(part.space, part.ts, solver);
    AbstractCfa full = abstract_cfa(cfa, AbstractionMode::Full, abs);
    AbstractCfa lonly = abstract_cfa(cfa, AbstractionMode::LocalsOnly, abs);
    std::vector<Proposition> props = propositions(spec);
    for (const auto& q : justice)
        if (std::find(props.begin(), props.end(), q) == props.end()) props.push_back(q);
    CounterOptions co;
    co.budget = opts.budget;
    part.system = std::make_shared<CounterSystem>(build_counter_system(full, abs, props, co));
    const CounterSystem& cs = *part.system;
    SymbolicVass vass = encode_lvass(lonly, justice, opts.delta_accel);
    for (const auto& c : invariants) {
        smt::Term t = invariant_term(c, vass, cfa);
        if (check_invariant(t, vass, solver).proven) part.state.invariants.push_back({c.text, t});
    }
    std::vector<std::string> jn;
    for (const auto& q : justice) jn.push_back(q.name());
    CheckOptions chk;
    chk.stutter_deadlocks = false;
    for (;;) {
        auto r = check_fair(refined_kripke(cs, part.state), spec, refined_fairness(cs, part.state, jn), chk);
        part.product_states = r.product_states;
        if (r.holds) {
            part.verdict = VerdictKind::Verified;
            part.counterexample.reset();
            return;
        }
        part.counterexample = r.counterexample;
        if (part.state.iterations >= opts.max_refinements) {
            part.verdict = VerdictKind::Inconclusive;
            return;
        }
        auto rr = refine_step(cs, *r.counterexample, part.state, vass, jn, solver, opts.refine);
        if (!rr.refined) {
            part.verdict = VerdictKind::Falsified;
            part.stuck_report = rr.report;
            break;
        }
        if (opts.on_refine) opts.on_refine(cs, part.state);
    }

    // Try to upgrade the abstract counterexample to a concrete one.
    ReplayOptions ro;
    ro.budget = opts.replay_budget;
    std::vector<Valuation> points = opts.oracle_params;
    for (auto& p : sample_parameters(part.space, opts.replay_samples)) points.push_back(std::move(p));
    for (const auto& p : points) {
        if (!part.space.admits(p)) continue;
        try {
            auto w = concrete_replay(cs, *part.counterexample, p, justice, ro);
            if (w && witness_is_genuine(cfa, *w, spec, justice)) {
                part.witness = std::move(w);
                return;
            }
        } catch (const Error&) {
        }
    }
    for (const auto& p : points) {
        if (!part.space.admits(p)) continue;
        try {
            auto w = concrete_counterexample(cfa, spec, p, justice, ro);
            if (w && witness_is_genuine(cfa, *w, spec, justice)) {
                part.witness = std::move(w);
                return;
            }
        } catch (const Error&) {
        }
    }
}

}  // namespace

VerifyResult verify(const Model& model, const Ltl& spec, const std::vector<std::string>& justice,
                    const std::vector<InvariantCandidate>& invariants, smt::Solver& solver, const VerifyOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t q0 = solver.stats().queries;
    std::vector<Proposition> jprops;
    for (const auto& name : justice) {
        const NamedProp* np = model.justice_prop(name);
        if (!np) throw Error("cegar", "unknown justice requirement '" + name + "'");
        jprops.push_back(np->prop);
    }
    OrderResult order = check_uniform_order(collect_thresholds(model.cfa), model.cfa.space, solver, true);
    VerifyResult res;
    if (order.kind == OrderResult::Kind::Ordered) {
        res.parts.push_back({});
        res.parts.back().space = model.cfa.space;
        res.parts.back().ts = order.ordered;
    } else if (order.kind == OrderResult::Kind::OrderSplit) {
        for (const auto& s : order.splits) {
            res.parts.push_back({});
            res.parts.back().space = s.space;
            res.parts.back().ts = s.thresholds;
        }
    } else {
        throw OrderError(order);
    }
    for (auto& part : res.parts) run_part(part, model, spec, jprops, invariants, solver, opts);
    res.verdict = VerdictKind::Verified;
    for (const auto& p : res.parts) {
        if (p.verdict == VerdictKind::Falsified) res.verdict = VerdictKind::Falsified;
        else if (p.verdict == VerdictKind::Inconclusive && res.verdict == VerdictKind::Verified)
            res.verdict = VerdictKind::Inconclusive;
    }
    res.seconds = elapsed(t0);
    res.solver_queries = solver.stats().queries - q0;
    return res;
}

}  // namespace pia
