#include "pia/abstraction.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace pia {

smt::Query exists_query(const std::vector<LinearAtom>& phi, const std::vector<std::string>& vars, const ParamSpace& ps,
                        const ThresholdSet& ts, const Tuple& t, bool quantified) {
    std::vector<smt::Term> body;
    for (const auto& a : phi) body.push_back(smt::from_atom(a));
    for (std::size_t i = 0; i < vars.size(); ++i) body.push_back(interval_term(ts, smt::var(vars[i]), {t[i]}));
    smt::Term b = smt::conj(std::move(body));
    if (quantified) b = smt::exists(vars, b);
    smt::Query q;
    q.assertions = {{"", resilience_term(ps)}, {"", b}};
    return q;
}

AbstractTupleSet exists_abstraction(const std::vector<LinearAtom>& phi, const std::vector<std::string>& vars,
                                    const ParamSpace& ps, const ThresholdSet& ts, smt::Solver& solver,
                                    const AbstractionOptions& opts) {
    AbstractTupleSet out;
    out.vars = vars;
    const int mu = ts.mu();
    std::vector<Tuple> all;
    Tuple t(vars.size(), 0);
    std::function<void(std::size_t)> gen = [&](std::size_t i) {
        if (i == vars.size()) {
            all.push_back(t);
            return;
        }
        for (int v = 0; v <= mu; ++v) {
            t[i] = v;
            gen(i + 1);
        }
    };
    gen(0);

    const bool monotone = opts.prune && phi.size() == 1 && phi[0].rel != Rel::Eq && phi[0].rel != Rel::Ne;
    if (!monotone) {
        std::vector<smt::Query> qs;
        for (const auto& tu : all) qs.push_back(exists_query(phi, vars, ps, ts, tu, opts.quantified));
        auto vs = solver.check_all(qs);
        for (std::size_t i = 0; i < all.size(); ++i)
            if (!vs[i].unsat()) out.tuples.insert(all[i]);
        return out;
    }

    // For < and <=, satisfiability is preserved by moving variables with a
    // positive coefficient down and those with a negative coefficient up.
    const LinearExpr e = phi[0].lhs - phi[0].rhs;
    const bool less = phi[0].rel == Rel::Lt || phi[0].rel == Rel::Le;
    std::vector<int> dir(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i) {
        Int c = e.coeff(vars[i]);
        int d = c > 0 ? 1 : (c < 0 ? -1 : 0);
        dir[i] = less ? d : -d;
    }
    auto difficulty = [&](const Tuple& tu, std::size_t i) { return dir[i] > 0 ? tu[i] : (dir[i] < 0 ? mu - tu[i] : 0); };
    auto score = [&](const Tuple& tu) {
        int s = 0;
        for (std::size_t i = 0; i < tu.size(); ++i) s += difficulty(tu, i);
        return s;
    };
    auto easier = [&](const Tuple& a, const Tuple& b) {
        for (std::size_t i = 0; i < a.size(); ++i)
            if (dir[i] != 0 && difficulty(a, i) > difficulty(b, i)) return false;
        return true;
    };
    std::map<int, std::vector<Tuple>> layers;
    for (const auto& tu : all) layers[score(tu)].push_back(tu);
    std::vector<Tuple> unsat;
    for (auto& [s, layer] : layers) {
        std::vector<Tuple> ask;
        for (const auto& tu : layer) {
            bool implied = std::any_of(unsat.begin(), unsat.end(), [&](const Tuple& u) { return easier(u, tu); });
            if (!implied) ask.push_back(tu);
        }
        std::vector<smt::Query> qs;
        for (const auto& tu : ask) qs.push_back(exists_query(phi, vars, ps, ts, tu, opts.quantified));
        auto vs = solver.check_all(qs);
        for (std::size_t i = 0; i < ask.size(); ++i) {
            if (vs[i].unsat()) unsat.push_back(ask[i]);
            else out.tuples.insert(ask[i]);
        }
    }
    return out;
}

std::vector<AbstractAtom> AbstractCfa::path_atoms(const std::vector<int>& path) const {
    std::vector<AbstractAtom> out;
    for (int e : path)
        for (const auto& a : edges[e].atoms) out.push_back(a);
    return out;
}

const AbstractTupleSet& Abstractor::tuples(const std::vector<LinearAtom>& phi, const std::vector<std::string>& vars) {
    std::string key;
    for (const auto& a : phi) key += a.str() + ";";
    key += "|";
    for (const auto& v : vars) key += v + ",";
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(key, exists_abstraction(phi, vars, ps_, ts_, solver_, opts_)).first->second;
}

const std::vector<std::vector<int>>& Abstractor::shift(int delta) {
    auto it = shifts_.find(delta);
    if (it != shifts_.end()) return it->second;
    LinearAtom a{LinearExpr::var("x'"), Rel::Eq, LinearExpr::var("x") + LinearExpr(delta)};
    const auto& set = tuples({a}, {"x", "x'"});
    std::vector<std::vector<int>> m(ts_.size());
    for (const auto& t : set.tuples) m[t[0]].push_back(t[1]);
    return shifts_.emplace(delta, std::move(m)).first->second;
}

std::vector<AbstractAtom> abstract_guard(const Guard& g, const Cfa& cfa, AbstractionMode mode, Abstractor& abs) {
    std::vector<AbstractAtom> out;
    auto is_shared = [&](const VarRef& v) { return cfa.shared_index(v.name) >= 0; };
    for (const auto& a : g.atoms) {
        if (const auto* s = std::get_if<StatusGuard>(&a)) {
            out.push_back(*s);
        } else if (const auto* t = std::get_if<ThresholdGuard>(&a)) {
            if (mode == AbstractionMode::LocalsOnly && is_shared(t->var)) {
                out.push_back(*t);
                continue;
            }
            int j = abs.thresholds().find(t->bound);
            if (j < 0) throw Error("abstraction", "threshold " + t->bound.str() + " missing from the domain");
            out.push_back(AbstractThreshold{t->var, j, t->at_least});
        } else {
            const auto& c = std::get<ComparisonGuard>(a);
            auto vars = data_vars(a);
            bool any_local = std::any_of(vars.begin(), vars.end(), [&](const VarRef& v) { return !is_shared(v); });
            if (mode == AbstractionMode::LocalsOnly && !any_local) {
                out.push_back(c);
                continue;
            }
            TupleGuard tg;
            tg.vars = vars;
            std::vector<std::string> keys;
            for (const auto& v : vars) {
                keys.push_back(var_key(v));
                tg.concrete.push_back(mode == AbstractionMode::LocalsOnly && is_shared(v));
            }
            tg.set = abs.tuples({as_linear(a)}, keys);
            tg.origin = atom_str(a);
            out.push_back(std::move(tg));
        }
    }
    return out;
}

AbstractCfa abstract_cfa(const Cfa& cfa, AbstractionMode mode, Abstractor& abs) {
    AbstractCfa a;
    a.base = cfa;
    a.mode = mode;
    a.ts = abs.thresholds();
    for (const auto& e : cfa.edges) a.edges.push_back({e.from, e.to, abstract_guard(e.guard, cfa, mode, abs)});
    return a;
}

std::string abstract_atom_str(const AbstractAtom& a, const ThresholdSet& ts) {
    if (const auto* s = std::get_if<StatusGuard>(&a)) return atom_str(*s);
    if (const auto* t = std::get_if<AbstractThreshold>(&a))
        return "I" + std::to_string(t->index) + (t->at_least ? " <= " : " > ") + "^" + t->var.str();
    if (const auto* t = std::get_if<ThresholdGuard>(&a)) return atom_str(*t);
    if (const auto* c = std::get_if<ComparisonGuard>(&a)) return atom_str(*c);
    const auto& g = std::get<TupleGuard>(a);
    std::string s = "(";
    bool first = true;
    for (const auto& t : g.set.tuples) {
        if (!first) s += " || ";
        first = false;
        std::string conj;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (i) conj += " && ";
            if (g.concrete[i]) {
                LinearPredicate p = interval_formula(ts, g.vars[i].str(), {t[i]});
                conj += p.str();
            } else {
                conj += "^" + g.vars[i].str() + " == I" + std::to_string(t[i]);
            }
        }
        s += t.size() > 1 ? "(" + conj + ")" : conj;
    }
    if (first) s += "false";
    return s + ")";
}

std::string describe(const AbstractCfa& a) {
    std::ostringstream o;
    const Cfa& c = a.base;
    o << "# " << (a.mode == AbstractionMode::Full ? "full" : "locals_only") << " abstraction of " << c.name << "\n";
    o << "# thresholds " << a.ts.str() << "\n";
    o << "skeleton " << c.name << "_abs {\n";
    for (const auto& e : a.edges) {
        o << "  edge " << c.locations[e.from] << " -> " << c.locations[e.to];
        if (!e.atoms.empty()) {
            o << " when ";
            for (std::size_t i = 0; i < e.atoms.size(); ++i)
                o << (i ? " && " : "") << abstract_atom_str(e.atoms[i], a.ts);
        }
        o << ";\n";
    }
    o << "}\n# tuple tables\n";
    for (const auto& e : a.edges)
        for (const auto& at : e.atoms)
            if (const auto* g = std::get_if<TupleGuard>(&at)) {
                o << "# " << g->origin << " over (";
                for (std::size_t i = 0; i < g->vars.size(); ++i) o << (i ? ", " : "") << g->vars[i].str();
                o << "):";
                for (const auto& t : g->set.tuples) {
                    o << " (";
                    for (std::size_t i = 0; i < t.size(); ++i) o << (i ? "," : "") << "I" << t[i];
                    o << ")";
                }
                o << "\n";
            }
    return o.str();
}

namespace {

int slot_index(const Cfa& c, const VarRef& v) {
    int i = c.local_index(v.name);
    return i >= 0 ? i : static_cast<int>(c.locals.size()) + c.shared_index(v.name);
}

}  // namespace

AbstractStepper::AbstractStepper(const AbstractCfa& a) : a_(a) {
    if (a.mode != AbstractionMode::Full) throw Error("abstraction", "stepper needs the full abstraction");
    const Cfa& c = a.base;
    for (const auto& path : a.paths()) {
        PathInfo pi;
        pi.atoms = a.path_atoms(path);
        std::set<int> primed;
        for (const auto& at : pi.atoms) {
            if (const auto* s = std::get_if<StatusGuard>(&at)) pi.sv_primed |= s->primed;
            if (const auto* t = std::get_if<AbstractThreshold>(&at); t && t->var.primed) primed.insert(slot_index(c, t->var));
            if (const auto* g = std::get_if<TupleGuard>(&at))
                for (const auto& v : g->vars)
                    if (v.primed) primed.insert(slot_index(c, v));
        }
        pi.primed.assign(primed.begin(), primed.end());
        paths_.push_back(std::move(pi));
    }
}

std::vector<ProcessState> AbstractStepper::successors(const ProcessState& s) const {
    const Cfa& c = a_.base;
    const std::size_t nl = c.locals.size(), nv = nl + c.shared.size();
    std::vector<int> cur(nv), next(nv);
    for (std::size_t i = 0; i < nl; ++i) cur[i] = static_cast<int>(s.locals[i]);
    for (std::size_t i = 0; i < c.shared.size(); ++i) cur[nl + i] = static_cast<int>(s.shared[i]);
    std::vector<ProcessState> out;
    const int mu = a_.ts.mu();
    for (const auto& pi : paths_) {
        next = cur;
        const int nsv = pi.sv_primed ? static_cast<int>(c.status_values.size()) : 1;
        auto value = [&](const VarRef& v) { return v.primed ? next[slot_index(c, v)] : cur[slot_index(c, v)]; };
        std::function<void(std::size_t, int)> go = [&](std::size_t k, int svn) {
            if (k < pi.primed.size()) {
                for (int v = 0; v <= mu; ++v) {
                    next[pi.primed[k]] = v;
                    go(k + 1, svn);
                }
                next[pi.primed[k]] = cur[pi.primed[k]];
                return;
            }
            for (const auto& at : pi.atoms) {
                if (const auto* st = std::get_if<StatusGuard>(&at)) {
                    int v = st->primed ? svn : s.sv;
                    if ((v == c.status_index(st->value)) != st->equal) return;
                } else if (const auto* t = std::get_if<AbstractThreshold>(&at)) {
                    if ((value(t->var) >= t->index) != t->at_least) return;
                } else if (const auto* g = std::get_if<TupleGuard>(&at)) {
                    Tuple tu;
                    for (const auto& v : g->vars) tu.push_back(value(v));
                    if (!g->set.contains(tu)) return;
                }
            }
            ProcessState t;
            t.sv = svn;
            for (std::size_t i = 0; i < nl; ++i) t.locals.push_back(next[i]);
            for (std::size_t i = nl; i < nv; ++i) t.shared.push_back(next[i]);
            out.push_back(std::move(t));
        };
        for (int v = 0; v < nsv; ++v) go(0, pi.sv_primed ? v : s.sv);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool locals_only_admits(const AbstractCfa& lcfa, const Valuation& p, const ProcessState& s, const ProcessState& t) {
    const Cfa& c = lcfa.base;
    const ThresholdSet& ts = lcfa.ts;
    const std::size_t nl = c.locals.size();
    auto concrete = [&](const VarRef& v) -> Int {
        const ProcessState& st = v.primed ? t : s;
        int i = c.local_index(v.name);
        return i >= 0 ? st.locals[i] : st.shared[c.shared_index(v.name)];
    };
    auto alpha = [&](const VarRef& v) { return abstract_value(ts, p, concrete(v)).index; };
    Valuation env = p;
    for (std::size_t i = 0; i < nl; ++i) {
        env[c.locals[i]] = s.locals[i];
        env[c.locals[i] + "'"] = t.locals[i];
    }
    for (std::size_t i = 0; i < c.shared.size(); ++i) {
        env[c.shared[i]] = s.shared[i];
        env[c.shared[i] + "'"] = t.shared[i];
    }
    for (const auto& path : lcfa.paths()) {
        auto atoms = lcfa.path_atoms(path);
        std::set<std::string> primed;
        bool ok = true;
        for (const auto& at : atoms) {
            if (const auto* st = std::get_if<StatusGuard>(&at)) {
                if (st->primed) primed.insert("sv");
                int v = st->primed ? t.sv : s.sv;
                ok = ok && ((v == c.status_index(st->value)) == st->equal);
            } else if (const auto* th = std::get_if<AbstractThreshold>(&at)) {
                if (th->var.primed) primed.insert(th->var.name);
                ok = ok && ((alpha(th->var) >= th->index) == th->at_least);
            } else if (const auto* th2 = std::get_if<ThresholdGuard>(&at)) {
                if (th2->var.primed) primed.insert(th2->var.name);
                Int b = th2->bound.eval(p);
                ok = ok && ((b <= concrete(th2->var)) == th2->at_least);
            } else if (const auto* g = std::get_if<TupleGuard>(&at)) {
                for (const auto& v : g->vars)
                    if (v.primed) primed.insert(v.name);
                bool any = false;
                for (const auto& tu : g->set.tuples) {
                    bool m = true;
                    for (std::size_t i = 0; i < tu.size() && m; ++i)
                        m = g->concrete[i] ? concretize(ts, p, {tu[i]}).contains(concrete(g->vars[i]))
                                           : alpha(g->vars[i]) == tu[i];
                    if (m) {
                        any = true;
                        break;
                    }
                }
                ok = ok && any;
            } else {
                const auto& cg = std::get<ComparisonGuard>(at);
                for (const auto& v : data_vars(cg))
                    if (v.primed) primed.insert(v.name);
                ok = ok && as_linear(cg).eval(env);
            }
        }
        if (!ok) continue;
        if (!primed.count("sv") && s.sv != t.sv) continue;
        for (std::size_t i = 0; i < nl && ok; ++i)
            if (!primed.count(c.locals[i]))
                ok = abstract_value(ts, p, s.locals[i]) == abstract_value(ts, p, t.locals[i]);
        for (std::size_t i = 0; i < c.shared.size() && ok; ++i)
            if (!primed.count(c.shared[i])) ok = s.shared[i] == t.shared[i];
        if (ok) return true;
    }
    return false;
}

ProcessState map_state_data(const ThresholdSet& ts, const Valuation& p, const ProcessState& s) {
    ProcessState a;
    a.sv = s.sv;
    for (Int v : s.locals) a.locals.push_back(abstract_value(ts, p, v).index);
    for (Int v : s.shared) a.shared.push_back(abstract_value(ts, p, v).index);
    return a;
}

PropositionAbstraction::PropositionAbstraction(const Proposition& prop, const Cfa& cfa, Abstractor& abs) : prop_(prop) {
    if (prop.is_status) {
        status_ = cfa.status_index(prop.status);
        return;
    }
    std::vector<std::string> vars;
    for (const auto& v : (prop.data.lhs - prop.data.rhs).vars()) {
        int li = cfa.local_index(v), si = cfa.shared_index(v);
        if (li >= 0) where_.emplace_back(true, li);
        else if (si >= 0) where_.emplace_back(false, si);
        else continue;
        vars.push_back(v);
    }
    set_ = abs.tuples({prop.data}, vars);
}

bool PropositionAbstraction::holds(int sv, const std::vector<int>& locals, const std::vector<int>& shared) const {
    if (prop_.is_status) return (sv == status_) == (prop_.rel == Rel::Eq);
    Tuple t;
    for (const auto& [local, i] : where_) t.push_back(local ? locals[i] : shared[i]);
    return set_.contains(t);
}

bool prop_holds_concrete(const Proposition& prop, const Cfa& cfa, const Valuation& p, int sv,
                         const std::vector<Int>& locals, const std::vector<Int>& shared) {
    if (prop.is_status) return (sv == cfa.status_index(prop.status)) == (prop.rel == Rel::Eq);
    Valuation v = p;
    for (std::size_t i = 0; i < cfa.locals.size(); ++i) v[cfa.locals[i]] = locals[i];
    for (std::size_t i = 0; i < cfa.shared.size(); ++i) v[cfa.shared[i]] = shared[i];
    return prop.data.eval(v);
}

}  // namespace pia
