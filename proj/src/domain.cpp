#include "pia/domain.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace pia {

ThresholdSet::ThresholdSet(std::vector<LinearExpr> sorted) : thresholds_(std::move(sorted)) {
    if (thresholds_.size() < 2 || thresholds_[0] != LinearExpr(0) || thresholds_[1] != LinearExpr(1))
        throw Error("domain", "threshold set must start with 0, 1");
}

int ThresholdSet::find(const LinearExpr& e) const {
    for (std::size_t i = 0; i < thresholds_.size(); ++i)
        if (thresholds_[i] == e) return static_cast<int>(i);
    for (const auto& [a, j] : aliases_)
        if (a == e) return j;
    return -1;
}

void ThresholdSet::alias(const LinearExpr& e, int j) {
    if (find(e) < 0) aliases_.emplace_back(e, j);
}

std::string ThresholdSet::str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < thresholds_.size(); ++i) s += (i ? ", " : "") + thresholds_[i].str();
    return s + "]";
}

std::vector<LinearExpr> collect_thresholds(const Cfa& cfa) {
    std::vector<LinearExpr> out{LinearExpr(0), LinearExpr(1)};
    for (const auto& e : cfa.edges)
        for (const auto& a : e.guard.atoms)
            if (const auto* t = std::get_if<ThresholdGuard>(&a))
                if (std::find(out.begin(), out.end(), t->bound) == out.end()) out.push_back(t->bound);
    return out;
}

smt::Term resilience_term(const ParamSpace& ps) {
    std::vector<smt::Term> ts;
    for (const auto& p : ps.params) ts.push_back(smt::ge(smt::var(p), smt::lit(0)));
    ts.push_back(smt::from_predicate(ps.resilience));
    return smt::conj(std::move(ts));
}

namespace {

std::string order_message(const OrderResult& r) {
    std::string s = "thresholds are not uniformly ordered under the resilience condition";
    if (!r.witness.empty()) {
        s += "; witness";
        for (const auto& [k, v] : r.witness) s += " " + k + "=" + std::to_string(v);
    }
    return s;
}

}  // namespace

OrderError::OrderError(OrderResult r) : Error("order", order_message(r)), result_(std::move(r)) {}

OrderResult check_uniform_order(const std::vector<LinearExpr>& input, const ParamSpace& ps, smt::Solver& solver,
                                bool allow_split) {
    using smt::Query;
    std::vector<LinearExpr> cand{LinearExpr(0), LinearExpr(1)};
    for (const auto& e : input)
        if (std::find(cand.begin(), cand.end(), e) == cand.end()) cand.push_back(e);
    const smt::Term rc = resilience_term(ps);
    auto q = [&](smt::Term t) {
        Query qq;
        qq.assertions = {{"", rc}, {"", t}};
        qq.want_model = true;
        return qq;
    };

    // Merge candidates equal under RC.
    std::vector<LinearExpr> uniq;
    std::vector<std::pair<LinearExpr, LinearExpr>> merged;  // dropped candidate, representative
    {
        std::vector<Query> qs;
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (std::size_t i = 0; i < cand.size(); ++i)
            for (std::size_t j = i + 1; j < cand.size(); ++j) {
                qs.push_back(q(smt::cmp(smt::from_linear(cand[i]), Rel::Ne, smt::from_linear(cand[j]))));
                pairs.emplace_back(i, j);
            }
        auto vs = solver.check_all(qs);
        std::vector<bool> dropped(cand.size(), false);
        for (std::size_t k = 0; k < vs.size(); ++k)
            if (vs[k].unsat() && !dropped[pairs[k].first] && !dropped[pairs[k].second]) {
                dropped[pairs[k].second] = true;
                merged.emplace_back(cand[pairs[k].second], cand[pairs[k].first]);
            }
        for (std::size_t i = 0; i < cand.size(); ++i)
            if (!dropped[i]) uniq.push_back(cand[i]);
    }

    const std::size_t k = uniq.size();
    // less[i][j]: RC implies uniq[i] < uniq[j].
    std::vector<std::vector<int>> less(k, std::vector<int>(k, 0));
    std::vector<Query> qs;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (i != j) {
                qs.push_back(q(smt::ge(smt::from_linear(uniq[i]), smt::from_linear(uniq[j]))));
                pairs.emplace_back(i, j);
            }
    auto vs = solver.check_all(qs);
    OrderResult res;
    bool total = true;
    for (std::size_t n = 0; n < vs.size(); ++n) {
        auto [i, j] = pairs[n];
        if (vs[n].unsat()) less[i][j] = 1;
    }
    for (std::size_t n = 0; n < vs.size() && total; ++n) {
        auto [i, j] = pairs[n];
        if (i < j && !less[i][j] && !less[j][i]) {
            total = false;
            // A point where i >= j; together with the existence of i < j-points
            // or equality this shows the order is not uniform.
            res.witness = vs[n].model;
        }
    }
    if (total) {
        std::vector<std::size_t> order(k);
        for (std::size_t i = 0; i < k; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return less[a][b] == 1; });
        if (order[0] != 0 || order[1] != 1) throw Error("order", "a threshold can be smaller than 1");
        std::vector<LinearExpr> sorted;
        for (auto i : order) sorted.push_back(uniq[i]);
        res.kind = OrderResult::Kind::Ordered;
        res.ordered = ThresholdSet(sorted);
        for (const auto& [e, r] : merged) res.ordered.alias(e, res.ordered.find(r));
        return res;
    }
    res.kind = OrderResult::Kind::CounterexampleParams;
    if (!allow_split) return res;
    if (k > 7) throw Error("order", "too many thresholds to enumerate orders");

    // Enumerate weak orders as rank functions onto 0..r-1, respecting proven facts.
    std::vector<std::vector<int>> ranks_list;
    std::vector<int> rank(k, 0);
    std::function<void(std::size_t)> gen = [&](std::size_t i) {
        if (i == k) {
            int mx = *std::max_element(rank.begin(), rank.end());
            std::vector<bool> used(mx + 1, false);
            for (int r : rank) used[r] = true;
            if (std::find(used.begin(), used.end(), false) != used.end()) return;
            for (std::size_t a = 0; a < k; ++a)
                for (std::size_t b = 0; b < k; ++b)
                    if (a != b && less[a][b] && rank[a] >= rank[b]) return;
            if (rank[0] != 0 || rank[1] != 1) return;
            ranks_list.push_back(rank);
            return;
        }
        for (int r = 0; r < static_cast<int>(k); ++r) {
            rank[i] = r;
            gen(i + 1);
        }
    };
    gen(0);
    std::vector<Query> split_qs;
    std::vector<LinearPredicate> chains;
    for (const auto& rk : ranks_list) {
        int mx = *std::max_element(rk.begin(), rk.end());
        std::vector<std::size_t> rep(mx + 1, SIZE_MAX);
        for (std::size_t i = 0; i < k; ++i)
            if (rep[rk[i]] == SIZE_MAX) rep[rk[i]] = i;
        LinearPredicate chain;
        for (std::size_t i = 0; i < k; ++i)
            if (rep[rk[i]] != i) chain.atoms.push_back({uniq[i], Rel::Eq, uniq[rep[rk[i]]]});
        for (int r = 0; r + 1 <= mx; ++r) chain.atoms.push_back({uniq[rep[r]], Rel::Lt, uniq[rep[r + 1]]});
        Query qq;
        qq.assertions = {{"", rc}, {"", smt::from_predicate(chain)}};
        split_qs.push_back(qq);
        chains.push_back(chain);
    }
    auto svs = solver.check_all(split_qs);
    for (std::size_t n = 0; n < svs.size(); ++n) {
        if (svs[n].unsat()) continue;
        const auto& rk = ranks_list[n];
        int mx = *std::max_element(rk.begin(), rk.end());
        std::vector<LinearExpr> sorted(mx + 1);
        std::vector<bool> set(mx + 1, false);
        for (std::size_t i = 0; i < k; ++i)
            if (!set[rk[i]]) {
                sorted[rk[i]] = uniq[i];
                set[rk[i]] = true;
            }
        OrderResult::Split sp;
        sp.space = ps;
        for (const auto& a : chains[n].atoms) sp.space.resilience.atoms.push_back(a);
        sp.thresholds = ThresholdSet(sorted);
        for (std::size_t i = 0; i < k; ++i) sp.thresholds.alias(uniq[i], rk[i]);
        for (const auto& [e, r] : merged) sp.thresholds.alias(e, sp.thresholds.find(r));
        res.splits.push_back(std::move(sp));
    }
    res.kind = OrderResult::Kind::OrderSplit;
    return res;
}

ThresholdSet extract_threshold_set(const Cfa& cfa, smt::Solver& solver) {
    auto r = check_uniform_order(collect_thresholds(cfa), cfa.space, solver, false);
    if (r.kind != OrderResult::Kind::Ordered) throw OrderError(std::move(r));
    return r.ordered;
}

AbstractValue abstract_value(const ThresholdSet& ts, const Valuation& p, Int a) {
    int j = 0;
    for (int i = 0; i < ts.size(); ++i)
        if (ts[i].eval(p) <= a) j = i;
    return {j};
}

Interval concretize(const ThresholdSet& ts, const Valuation& p, AbstractValue v) {
    Interval iv;
    iv.lo = ts[v.index].eval(p);
    if (v.index < ts.mu()) iv.hi = ts[v.index + 1].eval(p);
    return iv;
}

smt::Term interval_term(const ThresholdSet& ts, const smt::Term& y, AbstractValue v) {
    smt::Term lo = smt::le(smt::from_linear(ts[v.index]), y);
    if (v.index == ts.mu()) return lo;
    return smt::conj({lo, smt::lt(y, smt::from_linear(ts[v.index + 1]))});
}

LinearPredicate interval_formula(const ThresholdSet& ts, const std::string& y, AbstractValue v) {
    LinearPredicate p;
    p.atoms.push_back({ts[v.index], Rel::Le, LinearExpr::var(y)});
    if (v.index < ts.mu()) p.atoms.push_back({LinearExpr::var(y), Rel::Lt, ts[v.index + 1]});
    return p;
}

bool sizes_unbounded(const ParamSpace& ps, smt::Solver& solver, const std::vector<Int>& ks) {
    std::vector<smt::Query> qs;
    for (Int k : ks) {
        smt::Query q;
        q.assertions = {{"", resilience_term(ps)}, {"", smt::gt(smt::from_linear(ps.size), smt::lit(k))}};
        qs.push_back(std::move(q));
    }
    auto vs = solver.check_all(qs);
    return std::all_of(vs.begin(), vs.end(), [](const smt::Verdict& v) { return v.sat(); });
}

}  // namespace pia
