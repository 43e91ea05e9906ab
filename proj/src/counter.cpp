#include "pia/counter.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

#include "pia/errors.hpp"

namespace pia {

std::vector<LocalState> enumerate_local_states(const Cfa& cfa, int values) {
    const std::size_t nsv = cfa.status_values.size(), nl = cfa.locals.size();
    std::size_t total = nsv;
    for (std::size_t i = 0; i < nl; ++i) total *= static_cast<std::size_t>(values);
    std::vector<LocalState> out;
    out.reserve(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        LocalState l;
        l.sv = static_cast<int>(idx % nsv);
        std::size_t rest = idx / nsv;
        for (std::size_t i = 0; i < nl; ++i) {
            l.locals.push_back(static_cast<int>(rest % static_cast<std::size_t>(values)));
            rest /= static_cast<std::size_t>(values);
        }
        out.push_back(std::move(l));
    }
    return out;
}

int local_state_index(const Cfa& cfa, int values, const LocalState& l) {
    int idx = 0, w = 1;
    for (int x : l.locals) {
        idx += w * x;
        w *= values;
    }
    return l.sv + static_cast<int>(cfa.status_values.size()) * idx;
}

std::string local_state_str(const Cfa& cfa, const LocalState& l) {
    std::string s = "[" + cfa.status_values.at(l.sv);
    for (std::size_t i = 0; i < l.locals.size(); ++i) s += "," + cfa.locals[i] + "=I" + std::to_string(l.locals[i]);
    return s + "]";
}

std::string counter_key(const CounterState& w) {
    std::string k;
    k.reserve(w.kappa.size() + w.shared.size() + 1);
    for (int v : w.kappa) k.push_back(static_cast<char>(v));
    k.push_back('|');
    for (int v : w.shared) k.push_back(static_cast<char>(v));
    return k;
}

std::optional<StateId> CounterSystem::find(const CounterState& w) const {
    auto it = index.find(counter_key(w));
    if (it == index.end()) return std::nullopt;
    return it->second;
}

bool CounterSystem::has_edge(StateId s, StateId t) const {
    const auto& v = ks.succ.at(s);
    return std::binary_search(v.begin(), v.end(), t);
}

std::string CounterSystem::state_str(StateId s) const {
    const auto& w = states.at(s);
    std::string out;
    for (std::size_t i = 0; i < w.kappa.size(); ++i)
        if (w.kappa[i] != 0) out += (out.empty() ? "" : " ") + local_state_str(cfa, locals[i]) + "=I" + std::to_string(w.kappa[i]);
    for (std::size_t j = 0; j < w.shared.size(); ++j)
        out += (out.empty() ? "" : " ") + cfa.shared[j] + "=I" + std::to_string(w.shared[j]);
    return out;
}

Kripke CounterSystem::without(const std::set<std::pair<StateId, StateId>>& removed) const {
    Kripke k = ks;
    if (removed.empty()) return k;
    for (StateId s = 0; s < k.succ.size(); ++s) {
        auto& v = k.succ[s];
        v.erase(std::remove_if(v.begin(), v.end(), [&](StateId t) { return removed.count({s, t}) > 0; }), v.end());
    }
    return k;
}

bool label_counter(const PropositionAbstraction& pa, const CounterSystem& cs, const CounterState& w) {
    const bool all = pa.prop().quant == Quant::All;
    for (std::size_t i = 0; i < cs.locals.size(); ++i) {
        if (w.kappa[i] == 0) continue;
        bool h = pa.holds(cs.locals[i].sv, cs.locals[i].locals, w.shared);
        if (all && !h) return false;
        if (!all && h) return true;
    }
    return all;
}

CounterSystem build_counter_system(const AbstractCfa& acfa, Abstractor& abs, const std::vector<Proposition>& props,
                                   const CounterOptions& opts) {
    if (acfa.mode != AbstractionMode::Full) throw Error("counter", "counter system needs the full abstraction");
    CounterSystem cs;
    cs.cfa = acfa.base;
    cs.ts = acfa.ts;
    cs.props = props;
    const int values = cs.ts.size();
    cs.locals = enumerate_local_states(cs.cfa, values);
    const std::size_t nloc = cs.locals.size();
    const auto& inc = abs.shift(1);
    const auto& dec = abs.shift(-1);
    AbstractStepper stepper(acfa);

    std::deque<StateId> work;
    auto intern = [&](CounterState w) {
        auto key = counter_key(w);
        auto [it, fresh] = cs.index.emplace(std::move(key), static_cast<StateId>(cs.states.size()));
        if (fresh) {
            if (cs.states.size() >= opts.budget) throw TooLarge("counter system exceeds state budget");
            cs.states.push_back(std::move(w));
            cs.ks.succ.emplace_back();
            work.push_back(it->second);
        }
        return it->second;
    };

    // Initial states: abstract images of some split of N(p) processes over
    // the initial local states, for some admissible p.
    std::vector<std::size_t> l0;
    for (std::size_t i = 0; i < nloc; ++i) {
        const auto& l = cs.locals[i];
        if (cs.cfa.is_initial_status(l.sv) && std::all_of(l.locals.begin(), l.locals.end(), [](int x) { return x == 0; }))
            l0.push_back(i);
    }
    std::vector<std::vector<int>> cands;
    std::vector<int> c(l0.size(), 0);
    std::function<void(std::size_t)> gen = [&](std::size_t i) {
        if (i == l0.size()) {
            cands.push_back(c);
            return;
        }
        for (int v = 0; v < values; ++v) {
            c[i] = v;
            gen(i + 1);
        }
    };
    gen(0);
    std::vector<smt::Query> qs;
    const smt::Term rc = resilience_term(cs.cfa.space);
    const smt::Term n = smt::from_linear(cs.cfa.space.size);
    for (const auto& cand : cands) {
        std::vector<smt::Term> body{rc};
        std::vector<smt::Term> sum;
        for (std::size_t i = 0; i < l0.size(); ++i) {
            smt::Term k = smt::var("k" + std::to_string(i));
            sum.push_back(k);
            body.push_back(interval_term(cs.ts, k, {cand[i]}));
        }
        body.push_back(smt::eq(smt::add(sum), n));
        smt::Query q;
        q.assertions = {{"", smt::conj(body)}};
        qs.push_back(std::move(q));
    }
    auto vs = abs.solver().check_all(qs);
    for (std::size_t k = 0; k < cands.size(); ++k) {
        if (vs[k].unsat()) continue;
        CounterState w;
        w.kappa.assign(nloc, 0);
        w.shared.assign(cs.cfa.shared.size(), 0);
        for (std::size_t i = 0; i < l0.size(); ++i) w.kappa[l0[i]] = cands[k][i];
        cs.ks.initial.push_back(intern(std::move(w)));
    }

    std::map<std::pair<std::size_t, std::vector<int>>, std::vector<std::pair<std::size_t, std::vector<int>>>> memo;
    auto moves = [&](std::size_t from, const std::vector<int>& shared) -> const auto& {
        auto key = std::make_pair(from, shared);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        ProcessState ps;
        ps.sv = cs.locals[from].sv;
        ps.locals.assign(cs.locals[from].locals.begin(), cs.locals[from].locals.end());
        ps.shared.assign(shared.begin(), shared.end());
        std::vector<std::pair<std::size_t, std::vector<int>>> out;
        for (const auto& t : stepper.successors(ps)) {
            LocalState l{t.sv, std::vector<int>(t.locals.begin(), t.locals.end())};
            out.emplace_back(static_cast<std::size_t>(local_state_index(cs.cfa, values, l)),
                             std::vector<int>(t.shared.begin(), t.shared.end()));
        }
        return memo.emplace(std::move(key), std::move(out)).first->second;
    };

    while (!work.empty()) {
        const StateId s = work.front();
        work.pop_front();
        const CounterState w = cs.states[s];
        std::vector<StateId> out;
        for (std::size_t from = 0; from < nloc; ++from) {
            if (w.kappa[from] == 0) continue;
            const auto mv = moves(from, w.shared);
            for (const auto& [to, shared] : mv) {
                if (to == from) {
                    CounterState nx{w.kappa, shared};
                    out.push_back(intern(std::move(nx)));
                    continue;
                }
                for (int b : inc[w.kappa[to]])
                    for (int a : dec[w.kappa[from]]) {
                        CounterState nx{w.kappa, shared};
                        nx.kappa[to] = b;
                        nx.kappa[from] = a;
                        out.push_back(intern(std::move(nx)));
                    }
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        if (out.empty()) out.push_back(s);
        cs.ks.succ[s] = std::move(out);
    }

    for (const auto& prop : props) {
        PropositionAbstraction pa(prop, cs.cfa, abs);
        std::vector<bool> lab(cs.states.size());
        for (StateId s = 0; s < cs.states.size(); ++s) lab[s] = label_counter(pa, cs, cs.states[s]);
        cs.ks.labels[prop.name()] = std::move(lab);
    }
    return cs;
}

CounterState map_state_counter(const CounterSystem& cs, const Valuation& p, const GlobalState& abstract) {
    const int values = cs.ts.size();
    std::vector<Int> count(cs.locals.size(), 0);
    for (std::size_t i = 0; i < abstract.processes(); ++i) {
        LocalState l{abstract.sv[i], {}};
        for (Int x : abstract.locals[i]) l.locals.push_back(static_cast<int>(x));
        ++count.at(static_cast<std::size_t>(local_state_index(cs.cfa, values, l)));
    }
    CounterState w;
    for (Int k : count) w.kappa.push_back(abstract_value(cs.ts, p, k).index);
    for (Int g : abstract.shared) w.shared.push_back(static_cast<int>(g));
    return w;
}

CounterState map_state_dc(const CounterSystem& cs, const Valuation& p, const GlobalState& concrete) {
    GlobalState a;
    for (std::size_t i = 0; i < concrete.processes(); ++i) {
        auto ps = map_state_data(cs.ts, p, concrete.process(i));
        a.sv.push_back(ps.sv);
        a.locals.push_back(ps.locals);
        a.shared = ps.shared;
    }
    if (concrete.processes() == 0)
        for (Int g : concrete.shared) a.shared.push_back(abstract_value(cs.ts, p, g).index);
    return map_state_counter(cs, p, a);
}

AbstractInstance build_abstract_instance(const AbstractCfa& acfa, const Valuation& p, std::size_t budget) {
    const Cfa& c = acfa.base;
    if (!c.space.admits(p)) throw Error("concrete", "parameters violate the resilience condition");
    AbstractInstance ai;
    ai.n = static_cast<std::size_t>(c.space.size.eval(p));
    AbstractStepper stepper(acfa);
    std::map<ProcessState, std::vector<ProcessState>> memo;
    std::deque<StateId> work;
    auto intern = [&](const GlobalState& g) {
        auto [it, fresh] = ai.index.emplace(g, static_cast<StateId>(ai.states.size()));
        if (fresh) {
            if (ai.states.size() >= budget) throw TooLarge("abstract instance exceeds state budget");
            ai.states.push_back(g);
            ai.succ.emplace_back();
            work.push_back(it->second);
        }
        return it->second;
    };
    std::vector<int> init_sv;
    for (std::size_t v = 0; v < c.status_values.size(); ++v)
        if (c.is_initial_status(static_cast<int>(v))) init_sv.push_back(static_cast<int>(v));
    GlobalState g;
    g.sv.assign(ai.n, 0);
    g.locals.assign(ai.n, std::vector<Int>(c.locals.size(), 0));
    g.shared.assign(c.shared.size(), 0);
    std::vector<std::size_t> choice(ai.n, 0);
    if (!init_sv.empty()) {
        for (;;) {
            for (std::size_t i = 0; i < ai.n; ++i) g.sv[i] = init_sv[choice[i]];
            ai.initial.push_back(intern(g));
            std::size_t i = 0;
            while (i < ai.n && ++choice[i] == init_sv.size()) choice[i++] = 0;
            if (i == ai.n) break;
        }
    }
    while (!work.empty()) {
        StateId s = work.front();
        work.pop_front();
        const GlobalState cur = ai.states[s];
        std::vector<StateId> out;
        for (std::size_t i = 0; i < ai.n; ++i) {
            auto ps = cur.process(i);
            auto it = memo.find(ps);
            if (it == memo.end()) it = memo.emplace(ps, stepper.successors(ps)).first;
            for (const auto& t : it->second) {
                GlobalState nx = cur;
                nx.sv[i] = t.sv;
                nx.locals[i] = t.locals;
                nx.shared = t.shared;
                out.push_back(intern(nx));
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        ai.succ[s] = std::move(out);
    }
    return ai;
}

std::string SymbolicVass::counter(std::size_t i, bool primed) {
    return "K" + std::to_string(i) + (primed ? "'" : "");
}

std::string SymbolicVass::shared_var(const std::string& g, bool primed) { return primed ? g + "'" : g; }

std::vector<smt::Assertion> SymbolicVass::state_constraints(const CounterState& w, bool primed,
                                                            const std::string& label_prefix) const {
    std::vector<smt::Assertion> out;
    for (std::size_t i = 0; i < locals.size(); ++i)
        out.push_back({label_prefix + "K" + std::to_string(i),
                       interval_term(ts, smt::var(counter(i, primed)), {w.kappa.at(i)})});
    for (std::size_t j = 0; j < shared.size(); ++j)
        out.push_back({label_prefix + shared[j], interval_term(ts, smt::var(shared_var(shared[j], primed)), {w.shared.at(j)})});
    return out;
}

smt::Term SymbolicVass::prime(const smt::Term& t) const {
    std::map<std::string, std::string> m;
    for (std::size_t i = 0; i < locals.size(); ++i) m[counter(i)] = counter(i, true);
    for (const auto& g : shared) m[g] = shared_var(g, true);
    return smt::rename(t, m);
}

std::string SymbolicVass::dump() const {
    std::ostringstream o;
    auto section = [&](const std::string& title, const smt::Term& t) {
        smt::Query q;
        q.assertions = {{"", t}};
        o << "; " << title << "\n" << smt::to_smtlib(q) << "\n";
    };
    o << "; local states by index\n";
    for (std::size_t i = 0; i < locals.size(); ++i) {
        o << ";   K" << i << " sv=" << locals[i].sv;
        for (int x : locals[i].locals) o << " I" << x;
        o << "\n";
    }
    section("Init", init);
    section("Step", step);
    for (const auto& [name, t] : labels) section("label " + name, t);
    return o.str();
}

namespace {

std::string proc_var(const std::string& x, bool primed) { return "_x." + x + (primed ? "'" : ""); }
std::string sv_var(bool primed) { return primed ? "_sv'" : "_sv"; }

smt::Term local_index_term(const Cfa& c, int values, bool primed) {
    std::vector<smt::Term> parts{smt::var(sv_var(primed))};
    Int w = static_cast<Int>(c.status_values.size());
    for (const auto& x : c.locals) {
        parts.push_back(smt::mul(w, smt::var(proc_var(x, primed))));
        w *= values;
    }
    return smt::add(parts);
}

}  // namespace

smt::Term vass_label(const Proposition& prop, const Cfa& cfa, const ThresholdSet& ts,
                     const std::vector<LocalState>& locals) {
    const bool all = prop.quant == Quant::All;
    std::vector<smt::Term> parts;
    for (std::size_t i = 0; i < locals.size(); ++i) {
        const auto& l = locals[i];
        smt::Term k = smt::var(SymbolicVass::counter(i));
        smt::Term inner;
        if (prop.is_status) {
            inner = smt::boolean((l.sv == cfa.status_index(prop.status)) == (prop.rel == Rel::Eq));
        } else {
            // Fresh witness values for the local data of processes in l.
            std::map<std::string, std::string> m;
            std::vector<smt::Term> body;
            for (std::size_t j = 0; j < cfa.locals.size(); ++j) {
                std::string w = "_q" + std::to_string(i) + "." + cfa.locals[j];
                m[cfa.locals[j]] = w;
                body.push_back(interval_term(ts, smt::var(w), {l.locals[j]}));
            }
            body.push_back(smt::rename(smt::from_atom(prop.data), m));
            inner = smt::conj(body);
        }
        if (all) parts.push_back(smt::disj({smt::eq(k, smt::lit(0)), inner}));
        else parts.push_back(smt::conj({smt::gt(k, smt::lit(0)), inner}));
    }
    return all ? smt::conj(parts) : smt::disj(parts);
}

SymbolicVass encode_lvass(const AbstractCfa& lcfa, const std::vector<Proposition>& props, bool delta_accel) {
    if (lcfa.mode != AbstractionMode::LocalsOnly) throw Error("counter", "VASS encoding needs the locals-only abstraction");
    const Cfa& c = lcfa.base;
    SymbolicVass v;
    v.params = c.space.params;
    v.shared = c.shared;
    v.ts = lcfa.ts;
    v.delta_accel = delta_accel;
    const int values = v.ts.size();
    const int mu = v.ts.mu();
    v.locals = enumerate_local_states(c, values);
    const std::size_t nloc = v.locals.size();
    for (const auto& l : v.locals)
        v.initial_local.push_back(c.is_initial_status(l.sv) &&
                                  std::all_of(l.locals.begin(), l.locals.end(), [](int x) { return x == 0; }));

    v.rc = resilience_term(c.space);
    std::vector<smt::Term> ks, ks2;
    for (std::size_t i = 0; i < nloc; ++i) {
        ks.push_back(smt::var(SymbolicVass::counter(i)));
        ks2.push_back(smt::var(SymbolicVass::counter(i, true)));
    }
    const smt::Term n = smt::from_linear(c.space.size);
    v.size_ok = smt::eq(smt::add(ks), n);

    std::vector<smt::Term> init{v.rc, v.size_ok};
    for (std::size_t i = 0; i < nloc; ++i)
        init.push_back(v.initial_local[i] ? smt::ge(ks[i], smt::lit(0)) : smt::eq(ks[i], smt::lit(0)));
    for (const auto& g : c.shared) init.push_back(smt::eq(smt::var(g), smt::lit(0)));
    v.init = smt::conj(init);

    const smt::Term delta = smt::var("_delta");
    auto data_var = [&](const VarRef& r) {
        return c.local_index(r.name) >= 0 ? smt::var(proc_var(r.name, r.primed))
                                          : smt::var(SymbolicVass::shared_var(r.name, r.primed));
    };

    std::vector<smt::Term> path_terms;
    for (const auto& path : lcfa.paths()) {
        std::vector<smt::Term> body;
        bool sv_primed = false;
        std::set<std::string> primed;
        for (const auto& at : lcfa.path_atoms(path)) {
            if (const auto* st = std::get_if<StatusGuard>(&at)) {
                sv_primed |= st->primed;
                smt::Term s = smt::var(sv_var(st->primed));
                smt::Term val = smt::lit(c.status_index(st->value));
                body.push_back(st->equal ? smt::eq(s, val) : smt::neg(smt::eq(s, val)));
            } else if (const auto* th = std::get_if<AbstractThreshold>(&at)) {
                if (th->var.primed) primed.insert(th->var.name);
                smt::Term x = data_var(th->var);
                body.push_back(th->at_least ? smt::ge(x, smt::lit(th->index)) : smt::lt(x, smt::lit(th->index)));
            } else if (const auto* tg = std::get_if<ThresholdGuard>(&at)) {
                if (tg->var.primed) primed.insert(tg->var.name);
                smt::Term b = smt::from_linear(tg->bound), x = data_var(tg->var);
                body.push_back(tg->at_least ? smt::le(b, x) : smt::gt(b, x));
            } else if (const auto* g = std::get_if<TupleGuard>(&at)) {
                for (const auto& r : g->vars)
                    if (r.primed) primed.insert(r.name);
                std::vector<smt::Term> alts;
                for (const auto& tu : g->set.tuples) {
                    std::vector<smt::Term> conj;
                    for (std::size_t i = 0; i < tu.size(); ++i)
                        conj.push_back(g->concrete[i] ? interval_term(v.ts, data_var(g->vars[i]), {tu[i]})
                                                      : smt::eq(data_var(g->vars[i]), smt::lit(tu[i])));
                    alts.push_back(smt::conj(conj));
                }
                body.push_back(smt::disj(alts));
            } else {
                const auto& cg = std::get<ComparisonGuard>(at);
                for (const auto& r : data_vars(cg))
                    if (r.primed) primed.insert(r.name);
                // g' == g + c: all delta processes add c.
                if (cg.lhs.primed && cg.rel == Rel::Eq && cg.rhs_vars.size() == 1 && !cg.rhs_vars[0].primed &&
                    cg.rhs_vars[0].name == cg.lhs.name && cg.rhs_lin.coeffs().empty()) {
                    body.push_back(smt::eq(data_var(cg.lhs),
                                           smt::add({data_var(cg.rhs_vars[0]), smt::mul(cg.rhs_lin.constant(), delta)})));
                } else {
                    body.push_back(smt::from_atom(as_linear(cg)));
                }
            }
        }
        if (!sv_primed) body.push_back(smt::eq(smt::var(sv_var(true)), smt::var(sv_var(false))));
        for (const auto& x : c.locals)
            if (!primed.count(x)) body.push_back(smt::eq(smt::var(proc_var(x, true)), smt::var(proc_var(x, false))));
        for (const auto& g : c.shared)
            if (!primed.count(g)) body.push_back(smt::eq(smt::var(SymbolicVass::shared_var(g, true)), smt::var(g)));
        path_terms.push_back(smt::conj(body));
    }

    std::vector<smt::Term> step{v.rc, v.size_ok};
    const int nsv = static_cast<int>(c.status_values.size());
    for (bool pr : {false, true}) {
        step.push_back(smt::ge(smt::var(sv_var(pr)), smt::lit(0)));
        step.push_back(smt::lt(smt::var(sv_var(pr)), smt::lit(nsv)));
        for (const auto& x : c.locals) {
            step.push_back(smt::ge(smt::var(proc_var(x, pr)), smt::lit(0)));
            step.push_back(smt::le(smt::var(proc_var(x, pr)), smt::lit(mu)));
        }
        for (const auto& g : c.shared) step.push_back(smt::ge(smt::var(SymbolicVass::shared_var(g, pr)), smt::lit(0)));
    }
    step.push_back(smt::disj(path_terms));
    const smt::Term from = smt::var("_from"), to = smt::var("_to");
    step.push_back(smt::eq(from, local_index_term(c, values, false)));
    step.push_back(smt::eq(to, local_index_term(c, values, true)));
    step.push_back(delta_accel ? smt::ge(delta, smt::lit(1)) : smt::eq(delta, smt::lit(1)));
    for (std::size_t i = 0; i < nloc; ++i) {
        const smt::Term ii = smt::lit(static_cast<Int>(i));
        const smt::Term is_from = smt::eq(from, ii), is_to = smt::eq(to, ii);
        step.push_back(smt::ge(ks[i], smt::lit(0)));
        step.push_back(smt::ge(ks2[i], smt::lit(0)));
        step.push_back(smt::implies(is_from, smt::ge(ks[i], delta)));
        step.push_back(smt::eq(ks2[i], smt::add({ks[i], smt::mul(-1, smt::ite(is_from, delta, smt::lit(0))),
                                                 smt::ite(is_to, delta, smt::lit(0))})));
    }
    v.step = smt::conj(step);

    for (const auto& prop : props) v.labels[prop.name()] = vass_label(prop, c, v.ts, v.locals);
    return v;
}

}  // namespace pia
