#include "pia/twocm.hpp"

#include <regex>
#include <set>
#include <sstream>

#include "pia/errors.hpp"

namespace pia {

namespace {

char counter_char(Counter c) { return c == Counter::B ? 'B' : 'C'; }

Counter parse_counter(const std::string& s) { return s == "B" ? Counter::B : Counter::C; }

Ltl some(const std::string& status) {
    Proposition p;
    p.quant = Quant::Some;
    p.is_status = true;
    p.rel = Rel::Eq;
    p.status = status;
    return ltl::atom(p);
}

Ltl conj_all(const std::vector<Ltl>& fs) {
    Ltl r = ltl::top();
    bool first = true;
    for (const auto& f : fs) {
        r = first ? f : ltl::conj(r, f);
        first = false;
    }
    return r;
}

Guard step_guard(const std::string& from, const std::string& to) {
    Guard g;
    g.atoms.push_back(StatusGuard{false, true, from});
    g.atoms.push_back(StatusGuard{true, true, to});
    return g;
}

struct Edges {
    std::vector<std::pair<int, int>> plus, zero, minus;
    std::vector<Counter> used;  // C(v)
};

Edges edges_of(const TwoCounterMachine& m) {
    Edges e;
    e.used.assign(m.statements.size(), Counter::B);
    for (int v = 0; v <= m.m(); ++v) {
        const auto& s = m.statements[static_cast<std::size_t>(v)];
        if (const auto* i = std::get_if<Inc>(&s)) {
            e.plus.emplace_back(v, i->go);
            e.used[static_cast<std::size_t>(v)] = i->c;
        } else if (const auto* t = std::get_if<TestDec>(&s)) {
            e.zero.emplace_back(v, t->go_zero);
            e.minus.emplace_back(v, t->go_dec);
            e.used[static_cast<std::size_t>(v)] = t->c;
        }
    }
    return e;
}

}  // namespace

std::string control_status(int v, int w, const std::string& phase) {
    return "L" + std::to_string(v) + "_" + std::to_string(w) + "_" + phase;
}

std::string data_status(char x, char y, const std::string& phase) {
    return std::string(1, x) + "_" + std::string(1, y) + "_" + phase;
}

TwoCounterMachine parse_2cm(const std::string& text) {
    static const std::regex inc_re(R"(^(\d+)\s*:\s*inc\s+([BC])\s+goto\s+(\d+)$)");
    static const std::regex dec_re(
        R"(^(\d+)\s*:\s*if\s+([BC])\s*==?\s*0\s+goto\s+(\d+)\s+else\s+dec\s+([BC])\s+goto\s+(\d+)$)");
    static const std::regex halt_re(R"(^(\d+)\s*:\s*halt$)");

    TwoCounterMachine m;
    std::vector<std::pair<int, std::vector<int>>> targets;
    int line = 1;
    std::string cur;
    auto flush = [&](int at) {
        const auto b = cur.find_first_not_of(" \t\r");
        if (b == std::string::npos) {
            cur.clear();
            return;
        }
        const std::string s = cur.substr(b, cur.find_last_not_of(" \t\r") - b + 1);
        cur.clear();
        std::smatch mt;
        int idx = 0;
        if (std::regex_match(s, mt, inc_re)) {
            idx = std::stoi(mt[1]);
            m.statements.emplace_back(Inc{parse_counter(mt[2]), std::stoi(mt[3])});
            targets.push_back({at, {std::stoi(mt[3])}});
        } else if (std::regex_match(s, mt, dec_re)) {
            if (mt[2] != mt[4]) throw ParseError(at, 1, "test and decrement use different counters");
            idx = std::stoi(mt[1]);
            m.statements.emplace_back(TestDec{parse_counter(mt[2]), std::stoi(mt[3]), std::stoi(mt[5])});
            targets.push_back({at, {std::stoi(mt[3]), std::stoi(mt[5])}});
        } else if (std::regex_match(s, mt, halt_re)) {
            idx = std::stoi(mt[1]);
            m.statements.emplace_back(Halt{});
        } else {
            throw ParseError(at, 1, "bad statement '" + s + "'");
        }
        if (idx != static_cast<int>(m.statements.size()) - 1)
            throw ParseError(at, 1, "statement " + std::to_string(idx) + " out of order");
    };
    for (char ch : text) {
        if (ch == ';' || ch == '\n') {
            flush(line);
            if (ch == '\n') ++line;
        } else {
            cur += ch;
        }
    }
    flush(line);
    if (m.statements.empty()) throw ParseError(line, 1, "empty machine");
    for (int v = 0; v < m.m(); ++v)
        if (std::holds_alternative<Halt>(m.statements[static_cast<std::size_t>(v)]))
            throw ParseError(line, 1, "halt before the last statement");
    if (!std::holds_alternative<Halt>(m.statements.back())) throw ParseError(line, 1, "last statement must be halt");
    for (const auto& [at, ts] : targets)
        for (int t : ts)
            if (t < 0 || t > m.m()) throw ParseError(at, 1, "goto target " + std::to_string(t) + " out of range");
    return m;
}

std::string to_string(const TwoCounterMachine& m) {
    std::ostringstream os;
    for (int v = 0; v <= m.m(); ++v) {
        if (v) os << "; ";
        os << v << ": ";
        const auto& s = m.statements[static_cast<std::size_t>(v)];
        if (const auto* i = std::get_if<Inc>(&s)) {
            os << "inc " << counter_char(i->c) << " goto " << i->go;
        } else if (const auto* t = std::get_if<TestDec>(&s)) {
            os << "if " << counter_char(t->c) << " == 0 goto " << t->go_zero << " else dec " << counter_char(t->c)
               << " goto " << t->go_dec;
        } else {
            os << "halt";
        }
    }
    return os.str();
}

Model build_2cm_cfa(const TwoCounterMachine& m) {
    const Edges e = edges_of(m);
    const int mm = m.m();

    Model model;
    Cfa& cfa = model.cfa;
    cfa.name = "twocm";
    cfa.space.params = {"n"};
    cfa.space.resilience.atoms.push_back(LinearAtom{LinearExpr::var("n"), Rel::Ge, LinearExpr(1)});
    cfa.space.size = LinearExpr::var("n") + LinearExpr(1);

    for (int v = 0; v <= mm; ++v) cfa.status_values.push_back(control_status(v, v, "IdlC"));
    for (int v = 0; v <= mm; ++v)
        for (int w = 0; w <= mm; ++w) {
            cfa.status_values.push_back(control_status(v, w, "SynC"));
            cfa.status_values.push_back(control_status(v, w, "AckC"));
        }
    const std::string xs = "BCD";
    for (char x : xs) cfa.status_values.push_back(data_status(x, x, "IdlD"));
    for (char x : xs)
        for (char y : xs) {
            cfa.status_values.push_back(data_status(x, y, "SynD"));
            cfa.status_values.push_back(data_status(x, y, "AckD"));
        }
    cfa.initial_status = {control_status(0, 0, "IdlC"), data_status('D', 'D', "IdlD")};
    cfa.locations = {"qI", "qF"};
    cfa.initial = 0;
    cfa.final = 1;

    std::set<std::string> seen_edges;
    auto add = [&](const std::string& a, const std::string& b) {
        if (seen_edges.insert(a + ">" + b).second) cfa.edges.push_back(Edge{0, 1, step_guard(a, b)});
    };
    // J(v, w): IdlC -> SynC -> AckC -> IdlC at w.
    std::set<std::string> qj;
    auto jump = [&](int v, int w) {
        const auto i = control_status(v, v, "IdlC"), s = control_status(v, w, "SynC"),
                   a = control_status(v, w, "AckC"), d = control_status(w, w, "IdlC");
        add(i, s);
        add(s, a);
        add(a, d);
        qj.insert({i, s, a, d});
    };
    // I(x, y): one digit moves from x to y.
    auto digit = [&](char x, char y) {
        add(data_status(x, x, "IdlD"), data_status(x, y, "SynD"));
        add(data_status(x, y, "SynD"), data_status(x, y, "AckD"));
        add(data_status(x, y, "AckD"), data_status(y, y, "IdlD"));
    };
    for (auto [v, w] : e.plus) jump(v, w);
    for (auto [v, w] : e.zero) jump(v, w);
    for (auto [v, w] : e.minus) jump(v, w);
    jump(mm, mm);
    for (auto [v, w] : e.plus) digit('D', counter_char(e.used[static_cast<std::size_t>(v)]));
    for (auto [v, w] : e.minus) digit(counter_char(e.used[static_cast<std::size_t>(v)]), 'D');

    auto hs = [&](int v, int w, char x, char y) {
        const Ltl syn_d = some(data_status(x, y, "SynD")), ack_d = some(data_status(x, y, "AckD"));
        return conj_all({ltl::implies(syn_d, some(control_status(v, w, "SynC"))),
                         ltl::implies(ack_d, ltl::neg(syn_d)),
                         ltl::implies(ack_d, some(control_status(v, w, "AckC"))),
                         ltl::implies(some(control_status(w, w, "IdlC")),
                                      ltl::conj(ltl::neg(syn_d), ltl::neg(ack_d)))});
    };
    auto eq0 = [&](int v, int w) {
        const char c = counter_char(e.used[static_cast<std::size_t>(v)]);
        return ltl::implies(some(control_status(v, w, "SynC")), ltl::neg(some(data_status(c, c, "IdlD"))));
    };
    std::vector<Ltl> cp_parts;
    const std::vector<std::string> qv(qj.begin(), qj.end());
    for (std::size_t i = 0; i < qv.size(); ++i)
        for (std::size_t j = i + 1; j < qv.size(); ++j)
            cp_parts.push_back(ltl::disj(ltl::neg(some(qv[i])), ltl::neg(some(qv[j]))));
    const Ltl cp = conj_all(cp_parts);

    auto spec = [&](const std::string& name, const Ltl& f) { model.specs.push_back({name, to_string(f), f}); };
    std::vector<Ltl> guard_parts{cp};
    for (auto [v, w] : e.plus) {
        const Ltl f = hs(v, w, 'D', counter_char(e.used[static_cast<std::size_t>(v)]));
        spec("HS_" + std::to_string(v) + "_" + std::to_string(w), f);
        guard_parts.push_back(f);
    }
    for (auto [v, w] : e.minus) {
        const Ltl f = hs(v, w, counter_char(e.used[static_cast<std::size_t>(v)]), 'D');
        spec("HS_" + std::to_string(v) + "_" + std::to_string(w), f);
        guard_parts.push_back(f);
    }
    for (auto [v, w] : e.zero) {
        const Ltl f = eq0(v, w);
        spec("EQ0_" + std::to_string(v) + "_" + std::to_string(w), f);
        guard_parts.push_back(f);
    }
    spec("CP", cp);
    spec("nonhalt", ltl::disj(ltl::globally(ltl::neg(some(control_status(mm, mm, "IdlC")))),
                              ltl::eventually(ltl::neg(conj_all(guard_parts)))));
    return model;
}

}  // namespace pia
