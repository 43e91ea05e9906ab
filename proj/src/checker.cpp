#include "pia/checker.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

#include "pia/errors.hpp"

namespace pia {

bool Kripke::label(const std::string& ap, StateId s) const {
    auto it = labels.find(ap);
    return it != labels.end() && it->second.at(s);
}

namespace {

struct Product {
    std::vector<std::pair<StateId, std::uint32_t>> nodes;
    std::vector<std::vector<std::uint32_t>> succ;
    std::vector<std::uint32_t> initial;
};

std::vector<StateId> ks_successors(const Kripke& ks, StateId s, bool stutter = true) {
    if (stutter && ks.succ[s].empty()) return {s};
    return ks.succ[s];
}

}  // namespace

CheckResult check_fair(const Kripke& ks, const Ltl& phi, const std::vector<FairSet>& fairness, const CheckOptions& opts) {
    Gba gba = negate_to_buchi(phi);
    const auto& aps = gba.aps();
    std::vector<const std::vector<bool>*> ap_labels;
    for (const auto& a : aps) {
        auto it = ks.labels.find(a);
        if (it == ks.labels.end()) throw Error("checker", "structure has no label for atom '" + a + "'");
        ap_labels.push_back(&it->second);
    }
    auto letter = [&](StateId s) {
        std::uint64_t l = 0;
        for (std::size_t i = 0; i < ap_labels.size(); ++i)
            if ((*ap_labels[i])[s]) l |= std::uint64_t{1} << i;
        return l;
    };

    Product pr;
    std::unordered_map<std::uint64_t, std::uint32_t> index;
    std::deque<std::uint32_t> work;
    auto intern = [&](StateId s, std::uint32_t q) {
        std::uint64_t key = (static_cast<std::uint64_t>(s) << 32) | q;
        auto [it, fresh] = index.emplace(key, static_cast<std::uint32_t>(pr.nodes.size()));
        if (fresh) {
            if (pr.nodes.size() >= opts.max_product_states) throw TooLarge("product exceeds state budget");
            pr.nodes.emplace_back(s, q);
            pr.succ.emplace_back();
            work.push_back(it->second);
        }
        return it->second;
    };
    for (StateId s : ks.initial) {
        const auto l = letter(s);
        for (std::uint32_t q = 0; q < gba.num_states(); ++q)
            if (gba.initial(q, l)) pr.initial.push_back(intern(s, q));
    }
    std::size_t edges = 0;
    while (!work.empty()) {
        const std::uint32_t v = work.front();
        work.pop_front();
        const auto [s, q] = pr.nodes[v];
        const auto& qs = gba.successors(q, letter(s));
        if (qs.empty()) continue;
        std::vector<std::uint32_t> out;
        for (StateId t : ks_successors(ks, s, opts.stutter_deadlocks))
            for (std::uint32_t q2 : qs) out.push_back(intern(t, q2));
        edges += out.size();
        pr.succ[v] = std::move(out);
    }

    CheckResult res;
    res.product_states = pr.nodes.size();
    res.product_edges = edges;

    // Acceptance sets over product nodes.
    const std::size_t n = pr.nodes.size();
    std::vector<std::vector<bool>> accept;
    for (std::size_t k = 0; k < gba.num_acceptance_sets(); ++k) {
        std::vector<bool> a(n);
        for (std::size_t v = 0; v < n; ++v) a[v] = gba.accepting(k, pr.nodes[v].second, letter(pr.nodes[v].first));
        accept.push_back(std::move(a));
    }
    for (const auto& f : fairness) {
        std::vector<bool> a(n);
        for (std::size_t v = 0; v < n; ++v) a[v] = f.members.at(pr.nodes[v].first);
        accept.push_back(std::move(a));
    }

    // Iterative Tarjan.
    std::vector<std::int64_t> idx(n, -1), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::uint32_t> stack, comp(n, UINT32_MAX);
    std::int64_t counter = 0;
    std::uint32_t ncomp = 0;
    std::optional<std::uint32_t> fair_comp;
    std::vector<std::pair<std::uint32_t, std::size_t>> call;
    for (std::uint32_t root = 0; root < n && !fair_comp; ++root) {
        if (idx[root] >= 0) continue;
        call.emplace_back(root, 0);
        while (!call.empty() && !fair_comp) {
            auto& [v, i] = call.back();
            if (i == 0 && idx[v] < 0) {
                idx[v] = low[v] = counter++;
                stack.push_back(v);
                on_stack[v] = true;
            }
            if (i < pr.succ[v].size()) {
                std::uint32_t w = pr.succ[v][i++];
                if (idx[w] < 0) call.emplace_back(w, 0);
                else if (on_stack[w]) low[v] = std::min(low[v], idx[w]);
                continue;
            }
            if (low[v] == idx[v]) {
                std::vector<std::uint32_t> members;
                std::uint32_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = ncomp;
                    members.push_back(w);
                } while (w != v);
                bool nontrivial = members.size() > 1 ||
                                  std::find(pr.succ[v].begin(), pr.succ[v].end(), v) != pr.succ[v].end();
                if (nontrivial) {
                    bool all = true;
                    for (const auto& a : accept) {
                        bool hit = false;
                        for (auto m : members) hit = hit || a[m];
                        all = all && hit;
                    }
                    if (all) fair_comp = ncomp;
                }
                ++ncomp;
            }
            std::uint32_t done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
        }
    }
    if (!fair_comp) return res;

    // Lasso extraction by BFS.
    const std::uint32_t target = *fair_comp;
    auto bfs = [&](const std::vector<std::uint32_t>& from, auto&& goal, bool inside) -> std::vector<std::uint32_t> {
        std::vector<std::int64_t> parent(n, -2);
        std::deque<std::uint32_t> q;
        for (auto f : from) {
            if (parent[f] != -2) continue;
            parent[f] = -1;
            q.push_back(f);
        }
        while (!q.empty()) {
            auto v = q.front();
            q.pop_front();
            if (goal(v)) {
                std::vector<std::uint32_t> path;
                for (std::int64_t x = v; x >= 0; x = parent[x]) path.push_back(static_cast<std::uint32_t>(x));
                std::reverse(path.begin(), path.end());
                return path;
            }
            for (auto w : pr.succ[v]) {
                if (inside && comp[w] != target) continue;
                if (parent[w] == -2) {
                    parent[w] = v;
                    q.push_back(w);
                }
            }
        }
        return {};
    };
    auto to_prefix = bfs(pr.initial, [&](std::uint32_t v) { return comp[v] == target; }, false);
    const std::uint32_t head = to_prefix.back();
    std::vector<std::uint32_t> cycle{head};
    std::uint32_t cur = head;
    for (const auto& a : accept) {
        if (a[cur]) continue;
        auto seg = bfs({cur}, [&](std::uint32_t v) { return static_cast<bool>(a[v]); }, true);
        cycle.insert(cycle.end(), seg.begin() + 1, seg.end());
        cur = seg.back();
    }
    std::vector<std::uint32_t> starts;
    for (auto w : pr.succ[cur])
        if (comp[w] == target) starts.push_back(w);
    auto back = bfs(starts, [&](std::uint32_t v) { return v == head; }, true);
    // back ends in head, which is already the first element of cycle.
    cycle.insert(cycle.end(), back.begin(), back.end() - 1);

    Lasso l;
    for (std::size_t i = 0; i + 1 < to_prefix.size(); ++i) l.prefix.push_back(pr.nodes[to_prefix[i]].first);
    for (auto v : cycle) l.loop.push_back(pr.nodes[v].first);
    res.holds = false;
    res.counterexample = std::move(l);
    return res;
}

bool lasso_is_path(const Kripke& ks, const Lasso& l) {
    if (l.loop.empty()) return false;
    if (std::find(ks.initial.begin(), ks.initial.end(), l.at(0)) == ks.initial.end()) return false;
    for (std::size_t i = 0; i < l.length(); ++i) {
        auto s = l.at(i), t = l.at(l.next(i));
        auto succ = ks_successors(ks, s);
        if (std::find(succ.begin(), succ.end(), t) == succ.end()) return false;
    }
    return true;
}

std::vector<std::set<std::string>> lasso_word(const Kripke& ks, const Lasso& l) {
    std::vector<std::set<std::string>> w;
    for (std::size_t i = 0; i < l.length(); ++i) {
        std::set<std::string> letter;
        for (const auto& [ap, v] : ks.labels)
            if (v[l.at(i)]) letter.insert(ap);
        w.push_back(std::move(letter));
    }
    return w;
}

}  // namespace pia
