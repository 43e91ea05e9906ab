#include "pia/ltl.hpp"

#include <functional>

#include "pia/errors.hpp"

namespace pia {

namespace ltl {

namespace {
Ltl make(LtlOp op, Ltl l = nullptr, Ltl r = nullptr) {
    return std::make_shared<const LtlNode>(LtlNode{op, {}, nullptr, std::move(l), std::move(r)});
}
}  // namespace

Ltl top() { return make(LtlOp::True); }
Ltl bottom() { return make(LtlOp::False); }

Ltl atom(const std::string& name) {
    return std::make_shared<const LtlNode>(LtlNode{LtlOp::Atom, name, nullptr, nullptr, nullptr});
}

Ltl atom(const Proposition& p) {
    return std::make_shared<const LtlNode>(
        LtlNode{LtlOp::Atom, p.name(), std::make_shared<const Proposition>(p), nullptr, nullptr});
}

Ltl neg(const Ltl& f) {
    switch (f->op) {
        case LtlOp::True: return bottom();
        case LtlOp::False: return top();
        case LtlOp::Atom: return std::make_shared<const LtlNode>(LtlNode{LtlOp::NotAtom, f->atom, f->prop, nullptr, nullptr});
        case LtlOp::NotAtom: return std::make_shared<const LtlNode>(LtlNode{LtlOp::Atom, f->atom, f->prop, nullptr, nullptr});
        case LtlOp::And: return disj(neg(f->lhs), neg(f->rhs));
        case LtlOp::Or: return conj(neg(f->lhs), neg(f->rhs));
        case LtlOp::Until: return release(neg(f->lhs), neg(f->rhs));
        case LtlOp::Release: return until(neg(f->lhs), neg(f->rhs));
    }
    return f;
}

Ltl conj(const Ltl& a, const Ltl& b) { return make(LtlOp::And, a, b); }
Ltl disj(const Ltl& a, const Ltl& b) { return make(LtlOp::Or, a, b); }
Ltl until(const Ltl& a, const Ltl& b) { return make(LtlOp::Until, a, b); }
Ltl release(const Ltl& a, const Ltl& b) { return make(LtlOp::Release, a, b); }
Ltl eventually(const Ltl& f) { return until(top(), f); }
Ltl globally(const Ltl& f) { return release(bottom(), f); }
Ltl implies(const Ltl& a, const Ltl& b) { return disj(neg(a), b); }

}  // namespace ltl

std::string to_string(const Ltl& f) {
    switch (f->op) {
        case LtlOp::True: return "true";
        case LtlOp::False: return "false";
        case LtlOp::Atom: return f->prop ? "(" + f->atom + ")" : f->atom;
        case LtlOp::NotAtom: return f->prop ? "!(" + f->atom + ")" : "!" + f->atom;
        case LtlOp::And: return "(" + to_string(f->lhs) + " && " + to_string(f->rhs) + ")";
        case LtlOp::Or: return "(" + to_string(f->lhs) + " || " + to_string(f->rhs) + ")";
        case LtlOp::Until:
            if (f->lhs->op == LtlOp::True) return "F " + to_string(f->rhs);
            return "(" + to_string(f->lhs) + " U " + to_string(f->rhs) + ")";
        case LtlOp::Release:
            if (f->lhs->op == LtlOp::False) return "G " + to_string(f->rhs);
            return "(" + to_string(f->lhs) + " R " + to_string(f->rhs) + ")";
    }
    return "?";
}

namespace {
void walk(const Ltl& f, const std::function<void(const LtlNode&)>& fn) {
    fn(*f);
    if (f->lhs) walk(f->lhs, fn);
    if (f->rhs) walk(f->rhs, fn);
}
}  // namespace

std::vector<std::string> atom_names(const Ltl& f) {
    std::set<std::string> s;
    walk(f, [&](const LtlNode& n) {
        if (n.op == LtlOp::Atom || n.op == LtlOp::NotAtom) s.insert(n.atom);
    });
    return {s.begin(), s.end()};
}

std::vector<Proposition> propositions(const Ltl& f) {
    std::map<std::string, Proposition> m;
    walk(f, [&](const LtlNode& n) {
        if (n.prop) m.emplace(n.atom, *n.prop);
    });
    std::vector<Proposition> out;
    for (auto& [k, p] : m) out.push_back(p);
    return out;
}

bool eval_lasso(const Ltl& f, const std::vector<std::set<std::string>>& word, std::size_t loop_start) {
    const std::size_t n = word.size();
    auto next = [&](std::size_t i) { return i + 1 < n ? i + 1 : loop_start; };
    std::function<std::vector<bool>(const Ltl&)> ev = [&](const Ltl& g) -> std::vector<bool> {
        std::vector<bool> v(n);
        switch (g->op) {
            case LtlOp::True: v.assign(n, true); break;
            case LtlOp::False: v.assign(n, false); break;
            case LtlOp::Atom:
            case LtlOp::NotAtom:
                for (std::size_t i = 0; i < n; ++i) v[i] = (word[i].count(g->atom) > 0) == (g->op == LtlOp::Atom);
                break;
            case LtlOp::And:
            case LtlOp::Or: {
                auto a = ev(g->lhs), b = ev(g->rhs);
                for (std::size_t i = 0; i < n; ++i) v[i] = g->op == LtlOp::And ? (a[i] && b[i]) : (a[i] || b[i]);
                break;
            }
            case LtlOp::Until:
            case LtlOp::Release: {
                auto a = ev(g->lhs), b = ev(g->rhs);
                const bool until = g->op == LtlOp::Until;
                v.assign(n, !until);
                for (bool changed = true; changed;) {
                    changed = false;
                    for (std::size_t k = n; k-- > 0;) {
                        bool nv = until ? (b[k] || (a[k] && v[next(k)])) : (b[k] && (a[k] || v[next(k)]));
                        if (nv != v[k]) {
                            v[k] = nv;
                            changed = true;
                        }
                    }
                }
                break;
            }
        }
        return v;
    };
    return n > 0 && ev(f)[0];
}

Gba::Gba(Ltl formula) : formula_(std::move(formula)) {
    collect(formula_);
    if (temporal_.size() > 24) throw TooLarge("formula has too many temporal subformulas");
    if (aps_.size() > 64) throw TooLarge("formula has more than 64 atoms");
}

void Gba::collect(const Ltl& f) {
    if (f->lhs) collect(f->lhs);
    if (f->rhs) collect(f->rhs);
    if (f->op == LtlOp::Atom || f->op == LtlOp::NotAtom) {
        if (ap_index_.emplace(f->atom, static_cast<int>(aps_.size())).second) aps_.push_back(f->atom);
    } else if (f->op == LtlOp::Until || f->op == LtlOp::Release) {
        // Structurally equal subformulas share one state bit.
        const std::string key = to_string(f);
        for (std::size_t i = 0; i < temporal_.size(); ++i)
            if (to_string(temporal_[i]) == key) {
                temporal_index_[f.get()] = static_cast<int>(i);
                return;
            }
        temporal_index_[f.get()] = static_cast<int>(temporal_.size());
        if (f->op == LtlOp::Until) until_idx_.push_back(static_cast<int>(temporal_.size()));
        temporal_.push_back(f);
    }
}

bool Gba::value(const Ltl& f, std::uint32_t state, std::uint64_t letter) const {
    switch (f->op) {
        case LtlOp::True: return true;
        case LtlOp::False: return false;
        case LtlOp::Atom: return (letter >> ap_index_.at(f->atom)) & 1U;
        case LtlOp::NotAtom: return !((letter >> ap_index_.at(f->atom)) & 1U);
        case LtlOp::And: return value(f->lhs, state, letter) && value(f->rhs, state, letter);
        case LtlOp::Or: return value(f->lhs, state, letter) || value(f->rhs, state, letter);
        case LtlOp::Until:
        case LtlOp::Release: return (state >> temporal_index_.at(f.get())) & 1U;
    }
    return false;
}

bool Gba::initial(std::uint32_t state, std::uint64_t letter) const { return value(formula_, state, letter); }

const std::vector<std::uint32_t>& Gba::successors(std::uint32_t state, std::uint64_t letter) const {
    auto key = std::make_pair(state, letter);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    // Each bit of the successor is either forced or free; enumerate the free ones.
    std::uint32_t forced_mask = 0, forced_val = 0;
    bool consistent = true;
    for (std::size_t i = 0; i < temporal_.size(); ++i) {
        const Ltl& f = temporal_[i];
        const bool cur = (state >> i) & 1U;
        const bool a = value(f->lhs, state, letter), b = value(f->rhs, state, letter);
        if (f->op == LtlOp::Until) {
            // cur <=> b || (a && next)
            if (b) consistent &= cur;
            else if (!a) consistent &= !cur;
            else {
                forced_mask |= 1U << i;
                if (cur) forced_val |= 1U << i;
            }
        } else {
            // cur <=> b && (a || next)
            if (!b) consistent &= !cur;
            else if (a) consistent &= cur;
            else {
                forced_mask |= 1U << i;
                if (cur) forced_val |= 1U << i;
            }
        }
    }
    std::vector<std::uint32_t> out;
    if (consistent) {
        const std::uint32_t all = static_cast<std::uint32_t>(num_states()) - 1;
        const std::uint32_t free_mask = all & ~forced_mask;
        // Iterate subsets of free_mask.
        std::uint32_t sub = 0;
        do {
            out.push_back(forced_val | sub);
            sub = (sub - free_mask) & free_mask;
        } while (sub != 0);
    }
    return cache_.emplace(key, std::move(out)).first->second;
}

bool Gba::accepting(std::size_t set, std::uint32_t state, std::uint64_t letter) const {
    const int i = until_idx_.at(set);
    return !((state >> i) & 1U) || value(temporal_[i]->rhs, state, letter);
}

Gba negate_to_buchi(const Ltl& phi) { return Gba(ltl::neg(phi)); }

}  // namespace pia
