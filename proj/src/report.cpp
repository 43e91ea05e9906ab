#include "pia/report.hpp"

#include <sstream>

namespace pia {

using nlohmann::json;

namespace {

std::string interval(int j) { return "I" + std::to_string(j); }

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace

void to_json(json& j, const StateReport& s) {
    j = json{{"counters", s.counters}, {"shared", s.shared}, {"labels", s.labels}};
}
void from_json(const json& j, StateReport& s) {
    j.at("counters").get_to(s.counters);
    j.at("shared").get_to(s.shared);
    j.at("labels").get_to(s.labels);
}

void to_json(json& j, const CounterexampleReport& c) {
    json states = json::object();
    for (const auto& [id, s] : c.states) states[std::to_string(id)] = s;
    j = json{{"prefix", c.prefix}, {"loop", c.loop}, {"states", states}};
}
void from_json(const json& j, CounterexampleReport& c) {
    j.at("prefix").get_to(c.prefix);
    j.at("loop").get_to(c.loop);
    for (const auto& [k, v] : j.at("states").items()) c.states[static_cast<StateId>(std::stoull(k))] = v.get<StateReport>();
}

void to_json(json& j, const WitnessReport& w) {
    j = json{{"params", w.params}, {"prefix", w.prefix}, {"loop", w.loop}, {"image_matched", w.image_matched}};
}
void from_json(const json& j, WitnessReport& w) {
    j.at("params").get_to(w.params);
    j.at("prefix").get_to(w.prefix);
    j.at("loop").get_to(w.loop);
    j.at("image_matched").get_to(w.image_matched);
}

void to_json(json& j, const TraceReport& t) {
    j = json{{"kind", t.kind}, {"solver_time", t.solver_time}};
    if (t.kind == "unjust") j["unjust_q"] = t.unjust_q;
    else j["removed_count"] = t.removed_count;
}
void from_json(const json& j, TraceReport& t) {
    j.at("kind").get_to(t.kind);
    j.at("solver_time").get_to(t.solver_time);
    if (j.contains("unjust_q")) j.at("unjust_q").get_to(t.unjust_q);
    if (j.contains("removed_count")) j.at("removed_count").get_to(t.removed_count);
}

void to_json(json& j, const PartReport& p) {
    j = json{{"resilience", p.resilience}, {"thresholds", p.thresholds}, {"verdict", p.verdict},
             {"states", p.states}, {"edges", p.edges}, {"product_states", p.product_states},
             {"refinements", p.refinements}, {"invariants", p.invariants}, {"trace", p.trace}};
    if (!p.stuck.empty()) j["stuck"] = p.stuck;
    if (p.counterexample) j["counterexample"] = *p.counterexample;
    if (p.witness) j["witness"] = *p.witness;
}
void from_json(const json& j, PartReport& p) {
    j.at("resilience").get_to(p.resilience);
    j.at("thresholds").get_to(p.thresholds);
    j.at("verdict").get_to(p.verdict);
    j.at("states").get_to(p.states);
    j.at("edges").get_to(p.edges);
    j.at("product_states").get_to(p.product_states);
    j.at("refinements").get_to(p.refinements);
    j.at("invariants").get_to(p.invariants);
    j.at("trace").get_to(p.trace);
    if (j.contains("stuck")) j.at("stuck").get_to(p.stuck);
    if (j.contains("counterexample")) p.counterexample = j.at("counterexample").get<CounterexampleReport>();
    if (j.contains("witness")) p.witness = j.at("witness").get<WitnessReport>();
}


StateReport state_report(const CounterSystem& cs, StateId s) {
    StateReport r;
    const CounterState& w = cs.states[s];
    for (std::size_t i = 0; i < w.kappa.size(); ++i)
        if (w.kappa[i] != 0) r.counters[local_state_str(cs.cfa, cs.locals[i])] = interval(w.kappa[i]);
    for (std::size_t g = 0; g < w.shared.size(); ++g) r.shared[cs.cfa.shared[g]] = interval(w.shared[g]);
    for (const auto& [name, members] : cs.ks.labels)
        if (members[s]) r.labels.push_back(name);
    return r;
}

std::string global_state_str(const Cfa& cfa, const GlobalState& g) {
    std::ostringstream os;
    for (std::size_t i = 0; i < g.processes(); ++i) {
        os << (i ? " " : "") << "[" << cfa.status_values[static_cast<std::size_t>(g.sv[i])];
        for (std::size_t x = 0; x < cfa.locals.size(); ++x) os << "," << cfa.locals[x] << "=" << g.locals[i][x];
        os << "]";
    }
    for (std::size_t x = 0; x < cfa.shared.size(); ++x) os << " " << cfa.shared[x] << "=" << g.shared[x];
    return os.str();
}

Report make_report(const std::string& model, const std::string& spec, const std::vector<std::string>& justice,
                   const Cfa& cfa, const VerifyResult& r) {
    Report rep;
    rep.model = model;
    rep.spec = spec;
    rep.justice = justice;
    rep.verdict = verdict_name(r.verdict);
    rep.refinements = r.refinements();
    rep.seconds = r.seconds;
    rep.solver_queries = r.solver_queries;
    for (const auto& p : r.parts) {
        PartReport pr;
        pr.resilience = p.space.resilience.str();
        for (const auto& t : p.ts.thresholds()) pr.thresholds.push_back(t.str());
        pr.verdict = verdict_name(p.verdict);
        if (p.system) {
            pr.states = p.system->size();
            for (const auto& s : p.system->ks.succ) pr.edges += s.size();
        }
        pr.product_states = p.product_states;
        pr.refinements = p.state.iterations;
        for (const auto& inv : p.state.invariants) pr.invariants.push_back(inv.text);
        for (const auto& t : p.state.trace) pr.trace.push_back({t.kind, t.removed_count, t.unjust_q, t.solver_time});
        pr.stuck = p.stuck_report;
        if (p.counterexample && p.system && p.verdict != VerdictKind::Verified) {
            CounterexampleReport c;
            c.prefix = p.counterexample->prefix;
            c.loop = p.counterexample->loop;
            for (std::size_t i = 0; i < p.counterexample->length(); ++i) {
                const StateId s = p.counterexample->at(i);
                c.states[s] = state_report(*p.system, s);
            }
            pr.counterexample = std::move(c);
        }
        if (p.witness) {
            WitnessReport w;
            w.params = std::map<std::string, Int>(p.witness->params.begin(), p.witness->params.end());
            for (const auto& g : p.witness->prefix) w.prefix.push_back(global_state_str(cfa, g));
            for (const auto& g : p.witness->loop) w.loop.push_back(global_state_str(cfa, g));
            w.image_matched = p.witness->image_matched;
            pr.witness = std::move(w);
        }
        rep.parts.push_back(std::move(pr));
    }
    return rep;
}

void to_json(json& j, const Report& r) {
    j = json{{"model", r.model},
             {"spec", r.spec},
             {"justice", r.justice},
             {"verdict", r.verdict},
             {"refinements", r.refinements},
             {"seconds", r.seconds},
             {"solver_queries", r.solver_queries},
             {"parts", r.parts}};
}

void from_json(const json& j, Report& r) {
    j.at("model").get_to(r.model);
    j.at("spec").get_to(r.spec);
    j.at("justice").get_to(r.justice);
    j.at("verdict").get_to(r.verdict);
    j.at("refinements").get_to(r.refinements);
    j.at("seconds").get_to(r.seconds);
    j.at("solver_queries").get_to(r.solver_queries);
    j.at("parts").get_to(r.parts);
}

std::string to_dot(const Kripke& ks, const std::function<std::string(StateId)>& label, const std::string& name) {
    std::ostringstream os;
    os << "digraph " << name << " {\n";
    if (ks.size() == 0) {
        os << "}\n";
        return os.str();
    }
    os << "  node [shape=box, fontname=monospace];\n";
    for (StateId s : ks.initial) os << "  init" << s << " [shape=point];\n";
    for (StateId s = 0; s < ks.size(); ++s) os << "  s" << s << " [label=\"" << escape(label(s)) << "\"];\n";
    for (StateId s : ks.initial) os << "  init" << s << " -> s" << s << ";\n";
    for (StateId s = 0; s < ks.size(); ++s)
        for (StateId t : ks.succ[s]) os << "  s" << s << " -> s" << t << ";\n";
    os << "}\n";
    return os.str();
}

std::string to_dot(const CounterSystem& cs) {
    return to_dot(
        cs.ks,
        [&](StateId s) {
            const StateReport r = state_report(cs, s);
            std::string l;
            for (const auto& [k, v] : r.counters) l += k + "=" + v + "\\n";
            for (const auto& [k, v] : r.shared) l += k + "=" + v + "\\n";
            for (const auto& x : r.labels) l += x + "\\n";
            return l;
        },
        "counter_system");
}

std::string dump_counter_system(const CounterSystem& cs) {
    std::ostringstream os;
    os << "# " << cs.size() << " states, thresholds " << cs.ts.str() << "\n";
    os << "initial";
    for (StateId s : cs.ks.initial) os << " " << s;
    os << "\n";
    for (StateId s = 0; s < cs.size(); ++s) {
        os << s << ": " << cs.state_str(s) << "\n   ->";
        for (StateId t : cs.ks.succ[s]) os << " " << t;
        os << "\n";
    }
    return os.str();
}

}  // namespace pia
