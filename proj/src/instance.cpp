#include "pia/instance.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "pia/abstraction.hpp"
#include "pia/errors.hpp"

namespace pia {

std::size_t VectorHash::operator()(const std::vector<Int>& v) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (Int x : v) {
        h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

GlobalState ConcreteInstance::state(StateId s) const {
    const auto& c = codes.at(s);
    GlobalState g;
    const std::size_t nl = cfa.locals.size();
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        g.sv.push_back(static_cast<int>(c[k++]));
        g.locals.emplace_back(c.begin() + static_cast<long>(k), c.begin() + static_cast<long>(k + nl));
        k += nl;
    }
    g.shared.assign(c.begin() + static_cast<long>(k), c.end());
    return g;
}

std::vector<Int> ConcreteInstance::encode(const GlobalState& g) const {
    std::vector<Int> c;
    for (std::size_t i = 0; i < g.processes(); ++i) {
        c.push_back(g.sv[i]);
        c.insert(c.end(), g.locals[i].begin(), g.locals[i].end());
    }
    c.insert(c.end(), g.shared.begin(), g.shared.end());
    return c;
}

std::optional<StateId> ConcreteInstance::find(const GlobalState& g) const {
    auto it = index.find(encode(g));
    if (it == index.end()) return std::nullopt;
    return it->second;
}

bool label_concrete(const Proposition& prop, const Cfa& cfa, const Valuation& p, const GlobalState& g) {
    const bool all = prop.quant == Quant::All;
    for (std::size_t i = 0; i < g.processes(); ++i) {
        bool h = prop_holds_concrete(prop, cfa, p, g.sv[i], g.locals[i], g.shared);
        if (all && !h) return false;
        if (!all && h) return true;
    }
    return all;
}

ConcreteInstance build_concrete_instance(const Cfa& cfa, const Valuation& p, const std::vector<Proposition>& props,
                                         const InstanceOptions& opts) {
    if (!cfa.space.admits(p)) throw Error("concrete", "parameters violate the resilience condition");
    const Int size = cfa.space.size.eval(p);
    if (size < 1) throw Error("concrete", "instance needs at least one process");
    ConcreteInstance inst;
    inst.cfa = cfa;
    inst.params = p;
    inst.cap = opts.cap ? *opts.cap : default_cap(cfa, p);
    inst.n = static_cast<std::size_t>(size);
    inst.props = props;
    ConcreteStepper stepper(cfa, p, inst.cap);
    std::map<ProcessState, std::vector<ProcessState>> memo;
    auto succ_of = [&](const ProcessState& s) -> const std::vector<ProcessState>& {
        auto it = memo.find(s);
        if (it != memo.end()) return it->second;
        return memo.emplace(s, stepper.successors(s)).first->second;
    };

    std::deque<StateId> work;
    auto intern = [&](const GlobalState& g) {
        auto code = inst.encode(g);
        auto [it, fresh] = inst.index.emplace(code, static_cast<StateId>(inst.codes.size()));
        if (fresh) {
            if (inst.codes.size() >= opts.budget) throw TooLarge("concrete instance exceeds state budget");
            inst.codes.push_back(std::move(code));
            inst.ks.succ.emplace_back();
            work.push_back(it->second);
        }
        return it->second;
    };

    // Initial states: every sv in SV0 per process, all data zero.
    std::vector<int> init_sv;
    for (std::size_t v = 0; v < cfa.status_values.size(); ++v)
        if (cfa.is_initial_status(static_cast<int>(v))) init_sv.push_back(static_cast<int>(v));
    GlobalState g;
    g.sv.assign(inst.n, 0);
    g.locals.assign(inst.n, std::vector<Int>(cfa.locals.size(), 0));
    g.shared.assign(cfa.shared.size(), 0);
    std::vector<std::size_t> choice(inst.n, 0);
    if (!init_sv.empty()) {
        for (;;) {
            for (std::size_t i = 0; i < inst.n; ++i) g.sv[i] = init_sv[choice[i]];
            inst.ks.initial.push_back(intern(g));
            std::size_t i = 0;
            while (i < inst.n && ++choice[i] == init_sv.size()) choice[i++] = 0;
            if (i == inst.n) break;
        }
    }

    while (!work.empty()) {
        StateId s = work.front();
        work.pop_front();
        GlobalState cur = inst.state(s);
        std::vector<StateId> out;
        for (std::size_t i = 0; i < inst.n; ++i) {
            for (const auto& t : succ_of(cur.process(i))) {
                GlobalState nx = cur;
                nx.sv[i] = t.sv;
                nx.locals[i] = t.locals;
                nx.shared = t.shared;
                out.push_back(intern(nx));
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        inst.ks.succ[s] = std::move(out);
    }

    for (const auto& prop : props) {
        std::vector<bool> lab(inst.codes.size());
        for (StateId s = 0; s < inst.codes.size(); ++s) lab[s] = label_concrete(prop, cfa, p, inst.state(s));
        inst.ks.labels[prop.name()] = std::move(lab);
    }
    return inst;
}

}  // namespace pia
