#include "pia/cfa.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "pia/errors.hpp"

namespace pia {

std::string var_key(const VarRef& v) { return v.str(); }

std::string atom_str(const GuardAtom& a) {
    if (const auto* s = std::get_if<StatusGuard>(&a))
        return std::string(s->primed ? "sv'" : "sv") + (s->equal ? " == " : " != ") + s->value;
    if (const auto* t = std::get_if<ThresholdGuard>(&a))
        return t->bound.str() + (t->at_least ? " <= " : " > ") + t->var.str();
    const auto& c = std::get<ComparisonGuard>(a);
    std::string r;
    for (const auto& v : c.rhs_vars) {
        if (!r.empty()) r += " + ";
        r += v.str();
    }
    if (!c.rhs_lin.is_constant() || c.rhs_lin.constant() != 0 || r.empty()) {
        std::string lin = c.rhs_lin.str();
        if (r.empty()) r = lin;
        else if (lin.front() == '-') r += " - " + (-c.rhs_lin).str();
        else r += " + " + lin;
    }
    return c.lhs.str() + " " + rel_symbol(c.rel) + " " + r;
}

std::string guard_str(const Guard& g) {
    if (g.atoms.empty()) return "true";
    std::string s;
    for (const auto& a : g.atoms) {
        if (!s.empty()) s += " && ";
        s += atom_str(a);
    }
    return s;
}

std::vector<VarRef> data_vars(const GuardAtom& a) {
    if (std::holds_alternative<StatusGuard>(a)) return {};
    if (const auto* t = std::get_if<ThresholdGuard>(&a)) return {t->var};
    const auto& c = std::get<ComparisonGuard>(a);
    std::vector<VarRef> out{c.lhs};
    for (const auto& v : c.rhs_vars)
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    return out;
}

LinearAtom as_linear(const GuardAtom& a) {
    if (const auto* t = std::get_if<ThresholdGuard>(&a))
        return {t->bound, t->at_least ? Rel::Le : Rel::Gt, LinearExpr::var(var_key(t->var))};
    if (const auto* c = std::get_if<ComparisonGuard>(&a)) {
        LinearExpr rhs = c->rhs_lin;
        for (const auto& v : c->rhs_vars) rhs += LinearExpr::var(var_key(v));
        return {LinearExpr::var(var_key(c->lhs)), c->rel, rhs};
    }
    throw Error("cfa", "status guard has no linear form");
}

bool ParamSpace::admits(const Valuation& p) const {
    for (const auto& n : params) {
        auto it = p.find(n);
        if (it == p.end() || it->second < 0) return false;
    }
    return resilience.eval(p);
}

int Cfa::status_index(const std::string& v) const {
    auto it = std::find(status_values.begin(), status_values.end(), v);
    return it == status_values.end() ? -1 : static_cast<int>(it - status_values.begin());
}

int Cfa::local_index(const std::string& v) const {
    auto it = std::find(locals.begin(), locals.end(), v);
    return it == locals.end() ? -1 : static_cast<int>(it - locals.begin());
}

int Cfa::shared_index(const std::string& v) const {
    auto it = std::find(shared.begin(), shared.end(), v);
    return it == shared.end() ? -1 : static_cast<int>(it - shared.begin());
}

bool Cfa::is_param(const std::string& v) const {
    return std::find(space.params.begin(), space.params.end(), v) != space.params.end();
}

bool Cfa::is_initial_status(int sv) const {
    return std::find(initial_status.begin(), initial_status.end(), status_values.at(sv)) != initial_status.end();
}

std::vector<std::vector<int>> Cfa::paths() const {
    std::vector<std::vector<int>> out_edges(locations.size());
    for (std::size_t i = 0; i < edges.size(); ++i) out_edges[edges[i].from].push_back(static_cast<int>(i));
    std::vector<std::vector<int>> result;
    std::vector<int> cur;
    std::function<void(int)> dfs = [&](int loc) {
        if (loc == final) {
            result.push_back(cur);
            return;
        }
        for (int e : out_edges[loc]) {
            cur.push_back(e);
            dfs(edges[e].to);
            cur.pop_back();
        }
    };
    dfs(initial);
    return result;
}

std::vector<GuardAtom> Cfa::path_atoms(const std::vector<int>& path) const {
    std::vector<GuardAtom> out;
    for (int e : path)
        for (const auto& a : edges[e].guard.atoms) out.push_back(a);
    return out;
}

const char* kind_name(Diagnostic::Kind k) {
    switch (k) {
        case Diagnostic::Kind::CyclicCfa: return "CyclicCfa";
        case Diagnostic::Kind::SsaViolation: return "SsaViolation";
        case Diagnostic::Kind::FinalUnreachable: return "FinalUnreachable";
        case Diagnostic::Kind::IllegalGuard: return "IllegalGuard";
        case Diagnostic::Kind::UndeclaredIdentifier: return "UndeclaredIdentifier";
    }
    return "?";
}

namespace {

bool has_cycle(const Cfa& cfa) {
    std::vector<int> color(cfa.locations.size(), 0);
    std::function<bool(int)> dfs = [&](int v) {
        color[v] = 1;
        for (const auto& e : cfa.edges) {
            if (e.from != v) continue;
            if (color[e.to] == 1) return true;
            if (color[e.to] == 0 && dfs(e.to)) return true;
        }
        color[v] = 2;
        return false;
    };
    for (std::size_t v = 0; v < cfa.locations.size(); ++v)
        if (color[v] == 0 && dfs(static_cast<int>(v))) return true;
    return false;
}

}  // namespace

std::vector<Diagnostic> validate_cfa(const Cfa& cfa) {
    using K = Diagnostic::Kind;
    std::vector<Diagnostic> d;
    auto is_data = [&](const std::string& n) { return cfa.local_index(n) >= 0 || cfa.shared_index(n) >= 0; };

    for (const auto& n : cfa.space.resilience.vars())
        if (!cfa.is_param(n)) d.push_back({K::UndeclaredIdentifier, "resilience uses '" + n + "'"});
    for (const auto& n : cfa.space.size.vars())
        if (!cfa.is_param(n)) d.push_back({K::UndeclaredIdentifier, "size uses '" + n + "'"});
    for (const auto& s : cfa.initial_status)
        if (cfa.status_index(s) < 0) d.push_back({K::UndeclaredIdentifier, "initial status '" + s + "'"});

    const int nloc = static_cast<int>(cfa.locations.size());
    for (const auto& e : cfa.edges) {
        if (e.from < 0 || e.from >= nloc || e.to < 0 || e.to >= nloc) {
            d.push_back({K::IllegalGuard, "edge references unknown location"});
            return d;
        }
        for (const auto& a : e.guard.atoms) {
            if (const auto* s = std::get_if<StatusGuard>(&a)) {
                if (cfa.status_index(s->value) < 0)
                    d.push_back({K::UndeclaredIdentifier, "status value '" + s->value + "'"});
                continue;
            }
            for (const auto& v : data_vars(a))
                if (!is_data(v.name)) d.push_back({K::UndeclaredIdentifier, "data variable '" + v.name + "'"});
            const LinearExpr& lin = std::holds_alternative<ThresholdGuard>(a) ? std::get<ThresholdGuard>(a).bound
                                                                              : std::get<ComparisonGuard>(a).rhs_lin;
            for (const auto& n : lin.vars())
                if (!cfa.is_param(n))
                    d.push_back({K::IllegalGuard, "parameter term uses non-parameter '" + n + "' in " + atom_str(a)});
            if (const auto* c = std::get_if<ComparisonGuard>(&a); c && c->rhs_vars.empty())
                d.push_back({K::IllegalGuard, "comparison without right-hand variables: " + atom_str(a)});
        }
    }

    if (has_cycle(cfa)) {
        d.push_back({K::CyclicCfa, "control flow graph has a cycle"});
        return d;
    }

    std::vector<bool> seen(nloc, false);
    std::vector<int> stack{cfa.initial};
    seen[cfa.initial] = true;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (const auto& e : cfa.edges)
            if (e.from == v && !seen[e.to]) {
                seen[e.to] = true;
                stack.push_back(e.to);
            }
    }
    if (!seen[cfa.final]) d.push_back({K::FinalUnreachable, "final location unreachable"});

    std::set<std::string> reported;
    for (const auto& path : cfa.paths()) {
        std::map<std::string, int> assigned;
        for (const auto& a : cfa.path_atoms(path)) {
            if (const auto* s = std::get_if<StatusGuard>(&a)) {
                if (s->primed && s->equal) ++assigned["sv'"];
            } else if (const auto* c = std::get_if<ComparisonGuard>(&a)) {
                if (c->lhs.primed && c->rel == Rel::Eq) ++assigned[c->lhs.str()];
            }
        }
        for (const auto& [v, n] : assigned)
            if (n > 1 && reported.insert(v).second)
                d.push_back({K::SsaViolation, v + " is assigned more than once on a path"});
    }
    return d;
}

ConcreteStepper::ConcreteStepper(const Cfa& cfa, Valuation params, Int cap)
    : cfa_(cfa), params_(std::move(params)), cap_(cap), nvars_(cfa.locals.size() + cfa.shared.size()) {
    auto slot_of = [&](const VarRef& v) {
        int i = cfa_.local_index(v.name);
        if (i < 0) i = static_cast<int>(cfa_.locals.size()) + cfa_.shared_index(v.name);
        return v.primed ? i + static_cast<int>(nvars_) : i;
    };
    for (const auto& path : cfa_.paths()) {
        CompiledPath cp;
        cp.data_primed.assign(nvars_, false);
        auto atoms = cfa_.path_atoms(path);
        for (const auto& a : atoms) {
            if (const auto* s = std::get_if<StatusGuard>(&a)) {
                if (s->primed) cp.sv_primed = true;
            }
            for (const auto& v : data_vars(a))
                if (v.primed) cp.data_primed[slot_of(v) - nvars_] = true;
        }
        if (cp.sv_primed) cp.order.push_back(-1);
        for (std::size_t i = 0; i < nvars_; ++i)
            if (cp.data_primed[i]) cp.order.push_back(static_cast<int>(i + nvars_));
        cp.checks.resize(cp.order.size() + 1);
        for (const auto& a : atoms) {
            Check c;
            std::vector<int> used;
            if (const auto* s = std::get_if<StatusGuard>(&a)) {
                c.status = true;
                c.slot = s->primed ? 1 : 0;
                c.equal = s->equal;
                c.value = cfa_.status_index(s->value);
                if (s->primed) used.push_back(-1);
            } else {
                LinearAtom la = as_linear(a);
                LinearExpr e = la.lhs - la.rhs;
                for (const auto& v : data_vars(a)) {
                    int sl = slot_of(v);
                    c.terms.emplace_back(sl, e.coeff(var_key(v)));
                    if (v.primed) used.push_back(sl);
                }
                LinearExpr rest = e;
                rest.split_off([&](const std::string& n) { return cfa_.is_param(n); });
                c.constant = rest.eval(params_);
                c.rel = la.rel;
            }
            std::size_t level = 0;
            for (int u : used) {
                auto it = std::find(cp.order.begin(), cp.order.end(), u);
                level = std::max(level, static_cast<std::size_t>(it - cp.order.begin()) + 1);
            }
            cp.checks[level].push_back(c);
        }
        paths_.push_back(std::move(cp));
    }
}

bool ConcreteStepper::check(const Check& c, const std::vector<Int>& slots, int sv, int sv_next) const {
    if (c.status) {
        int v = c.slot == 0 ? sv : sv_next;
        return (v == c.value) == c.equal;
    }
    Int s = c.constant;
    for (const auto& [sl, k] : c.terms) s += k * slots[sl];
    return holds(s, c.rel, 0);
}

void ConcreteStepper::enumerate(const CompiledPath& cp, std::size_t level, std::vector<Int>& slots,
                                int& sv_next, int sv, std::vector<ProcessState>& out) const {
    for (const auto& c : cp.checks[level])
        if (!check(c, slots, sv, sv_next)) return;
    if (level == cp.order.size()) {
        ProcessState t;
        t.sv = sv_next;
        const std::size_t nl = cfa_.locals.size();
        for (std::size_t i = 0; i < nvars_; ++i) {
            Int v = slots[i + nvars_];
            if (v > cap_) throw CapExceeded("value " + std::to_string(v) + " above cap " + std::to_string(cap_));
            (i < nl ? t.locals : t.shared).push_back(v);
        }
        out.push_back(std::move(t));
        return;
    }
    int slot = cp.order[level];
    if (slot < 0) {
        for (int v = 0; v < static_cast<int>(cfa_.status_values.size()); ++v) {
            sv_next = v;
            enumerate(cp, level + 1, slots, sv_next, sv, out);
        }
        sv_next = sv;
        return;
    }
    Int saved = slots[slot];
    for (Int v = 0; v <= cap_ + 1; ++v) {
        slots[slot] = v;
        enumerate(cp, level + 1, slots, sv_next, sv, out);
    }
    slots[slot] = saved;
}

std::vector<ProcessState> ConcreteStepper::successors(const ProcessState& s) const {
    std::vector<ProcessState> out;
    std::vector<Int> slots(2 * nvars_);
    for (std::size_t i = 0; i < s.locals.size(); ++i) slots[i] = s.locals[i];
    for (std::size_t i = 0; i < s.shared.size(); ++i) slots[s.locals.size() + i] = s.shared[i];
    for (const auto& cp : paths_) {
        for (std::size_t i = 0; i < nvars_; ++i) slots[i + nvars_] = slots[i];
        int sv_next = s.sv;
        enumerate(cp, 0, slots, sv_next, s.sv, out);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<ProcessState> step_valuations(const Cfa& cfa, const Valuation& p, const ProcessState& s, Int cap) {
    return ConcreteStepper(cfa, p, cap).successors(s);
}

Int default_cap(const Cfa& cfa, const Valuation& p) {
    Int slack = 0;
    for (const auto& e : cfa.edges)
        for (const auto& a : e.guard.atoms)
            if (const auto* c = std::get_if<ComparisonGuard>(&a)) {
                Int v = c->rhs_lin.eval(p);
                slack = std::max(slack, v < 0 ? -v : v);
            }
    return cfa.space.size.eval(p) + slack;
}

}  // namespace pia
