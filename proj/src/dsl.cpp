#include "pia/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "pia/errors.hpp"

namespace pia {

const NamedSpec* Model::spec(const std::string& name) const {
    for (const auto& s : specs)
        if (s.name == name) return &s;
    return nullptr;
}

const NamedProp* Model::justice_prop(const std::string& name) const {
    for (const auto& j : justice)
        if (j.name == name) return &j;
    return nullptr;
}

namespace {

struct Token {
    enum class T { Ident, Int, Sym, End } type = T::End;
    std::string text;
    bool primed = false;
    Int value = 0;
    int line = 1;
    int col = 1;
    std::size_t offset = 0;
};

std::vector<Token> lex(const std::string& s) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto adv = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < s.size(); ++k, ++i) {
            if (s[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    static const char* syms[] = {"<all>", "<some>", "->", "==", "!=", "<=", ">=", "&&", "||", "<", ">", "=",
                                 "!",     "+",      "-",  "*",  "(",  ")",  "{",  "}",  "[",  "]", ",", ";",
                                 ":",     "."};
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            adv(1);
            continue;
        }
        if (c == '#' || (c == '/' && i + 1 < s.size() && s[i + 1] == '/')) {
            while (i < s.size() && s[i] != '\n') adv(1);
            continue;
        }
        Token t;
        t.line = line;
        t.col = col;
        t.offset = i;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
            t.type = Token::T::Ident;
            t.text = s.substr(i, j - i);
            adv(j - i);
            if (i < s.size() && s[i] == '\'') {
                t.primed = true;
                adv(1);
            }
            out.push_back(t);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            t.type = Token::T::Int;
            t.text = s.substr(i, j - i);
            t.value = std::stoll(t.text);
            adv(j - i);
            out.push_back(t);
            continue;
        }
        bool found = false;
        for (const char* sym : syms) {
            std::size_t n = std::char_traits<char>::length(sym);
            if (s.compare(i, n, sym) == 0) {
                t.type = Token::T::Sym;
                t.text = sym;
                adv(n);
                out.push_back(t);
                found = true;
                break;
            }
        }
        if (!found) throw ParseError(line, col, std::string("unexpected character '") + c + "'");
    }
    Token end;
    end.line = line;
    end.col = col;
    end.offset = s.size();
    out.push_back(end);
    return out;
}

class Parser {
public:
    Parser(const std::string& src, const Cfa* cfa) : src_(src), toks_(lex(src)), cfa_(cfa) {}

    const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    const Token& get() {
        const Token& t = toks_[pos_];
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }
    bool at_end() const { return peek().type == Token::T::End; }
    bool is_sym(const std::string& s, std::size_t k = 0) const {
        return peek(k).type == Token::T::Sym && peek(k).text == s;
    }
    bool is_ident(const std::string& s) const {
        return peek().type == Token::T::Ident && peek().text == s && !peek().primed;
    }
    bool accept(const std::string& s) {
        if (is_sym(s)) {
            get();
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& msg, const Token* at = nullptr) const {
        const Token& t = at ? *at : peek();
        throw ParseError(t.line, t.col, msg);
    }
    void expect(const std::string& s) {
        if (!accept(s)) fail("expected '" + s + "'");
    }
    void expect_keyword(const std::string& s) {
        if (!is_ident(s)) fail("expected '" + s + "'");
        get();
    }
    std::string ident(const char* what = "identifier") {
        if (peek().type != Token::T::Ident || peek().primed) fail(std::string("expected ") + what);
        return get().text;
    }
    std::vector<std::string> ident_list(const std::string& end) {
        std::vector<std::string> out;
        if (is_sym(end)) return out;
        do out.push_back(ident());
        while (accept(","));
        return out;
    }

    // Linear expressions. Variable keys carry a trailing ' when primed.
    LinearExpr lin() {
        LinearExpr e = term();
        for (;;) {
            if (accept("+")) e += term();
            else if (accept("-")) e -= term();
            else return e;
        }
    }
    LinearExpr term() {
        const Token& start = peek();
        LinearExpr e = factor();
        for (;;) {
            bool juxtaposed = e.is_constant() && !at_end() &&
                              (peek().type == Token::T::Ident && !is_reserved(peek()));
            if (!accept("*") && !juxtaposed) return e;
            LinearExpr f = factor();
            if (!e.is_constant() && !f.is_constant()) fail("non-linear expression", &start);
            e = e.is_constant() ? f * e.constant() : e * f.constant();
        }
    }
    LinearExpr factor() {
        if (accept("-")) return -factor();
        if (accept("(")) {
            LinearExpr e = lin();
            expect(")");
            return e;
        }
        const Token& t = peek();
        if (t.type == Token::T::Int) {
            get();
            return LinearExpr(t.value);
        }
        if (t.type == Token::T::Ident && !is_reserved(t)) {
            get();
            check_name(t);
            return LinearExpr::var(t.primed ? t.text + "'" : t.text);
        }
        fail("expected expression");
    }
    bool is_reserved(const Token& t) const {
        if (t.type != Token::T::Ident) return false;
        static const std::set<std::string> kw{"G", "F", "U", "X", "R", "true", "false", "when"};
        return kw.count(t.text) > 0;
    }
    // Names in expressions must be declared when a CFA is known.
    void check_name(const Token& t) const {
        if (!cfa_ || allow_any_name_) return;
        if (extra_names_.count(t.text)) return;
        const bool data = cfa_->local_index(t.text) >= 0 || cfa_->shared_index(t.text) >= 0;
        if (data || cfa_->is_param(t.text)) {
            if (t.primed && !data) fail("parameter '" + t.text + "' cannot be primed", &t);
            if (t.primed && !allow_primed_) fail("primed variable not allowed here", &t);
            return;
        }
        fail("undeclared identifier '" + t.text + "'", &t);
    }
    std::optional<Rel> rel() {
        static const std::pair<const char*, Rel> rels[] = {{"==", Rel::Eq}, {"=", Rel::Eq}, {"!=", Rel::Ne},
                                                           {"<=", Rel::Le}, {">=", Rel::Ge}, {"<", Rel::Lt},
                                                           {">", Rel::Gt}};
        for (const auto& [s, r] : rels)
            if (accept(s)) return r;
        return std::nullopt;
    }
    LinearAtom lin_atom() {
        LinearExpr l = lin();
        auto r = rel();
        if (!r) fail("expected comparison operator");
        return {l, *r, lin()};
    }

    bool is_data(const std::string& key) const {
        std::string base = key.back() == '\'' ? key.substr(0, key.size() - 1) : key;
        return cfa_->local_index(base) >= 0 || cfa_->shared_index(base) >= 0;
    }
    static VarRef ref(const std::string& key) {
        if (key.back() == '\'') return {key.substr(0, key.size() - 1), true};
        return {key, false};
    }

    std::string status_value() {
        const Token& t = peek();
        std::string v = ident("status value");
        if (cfa_ && cfa_->status_index(v) < 0) fail("undeclared status value '" + v + "'", &t);
        return v;
    }

    GuardAtom guard_atom() {
        if (peek().type == Token::T::Ident && peek().text == "sv") {
            bool primed = get().primed;
            bool equal;
            if (accept("==") || accept("=")) equal = true;
            else if (accept("!=")) equal = false;
            else fail("expected == or != after sv");
            return StatusGuard{primed, equal, status_value()};
        }
        const Token& start = peek();
        LinearAtom a = lin_atom();
        return classify(a, start);
    }

    GuardAtom classify(const LinearAtom& a, const Token& at) const {
        LinearExpr e = a.lhs - a.rhs;
        std::vector<std::string> data;
        for (const auto& v : e.vars())
            if (is_data(v)) data.push_back(v);
        if (data.empty()) fail("guard compares no data variable", &at);
        if (data.size() == 1) {
            const std::string& x = data.front();
            Int c = e.coeff(x);
            if (c != 1 && c != -1) fail("threshold guard needs coefficient 1 on '" + x + "'", &at);
            Rel r = a.rel;
            if (c == -1) {
                e *= -1;
                r = flip(r);
            }
            if (r == Rel::Eq || r == Rel::Ne) fail("equality with a parameter expression is not a guard form", &at);
            LinearExpr theta = -(e - LinearExpr::var(x));
            ThresholdGuard g;
            g.var = ref(x);
            switch (r) {
                case Rel::Ge: g.bound = theta; g.at_least = true; break;
                case Rel::Gt: g.bound = theta + LinearExpr(1); g.at_least = true; break;
                case Rel::Lt: g.bound = theta; g.at_least = false; break;
                case Rel::Le: g.bound = theta + LinearExpr(1); g.at_least = false; break;
                default: break;
            }
            return g;
        }
        auto try_side = [&](const LinearExpr& l, Rel r, const LinearExpr& rhs) -> std::optional<ComparisonGuard> {
            std::vector<std::string> ld;
            for (const auto& v : l.vars())
                if (is_data(v)) ld.push_back(v);
            if (ld.size() != 1 || l.coeff(ld[0]) != 1) return std::nullopt;
            ComparisonGuard g;
            g.lhs = ref(ld[0]);
            g.rel = r;
            LinearExpr rest = rhs - (l - LinearExpr::var(ld[0]));
            for (const auto& v : rest.vars()) {
                if (!is_data(v)) continue;
                if (rest.coeff(v) != 1 || v == ld[0]) return std::nullopt;
                g.rhs_vars.push_back(ref(v));
            }
            if (g.rhs_vars.empty()) return std::nullopt;
            rest.split_off([&](const std::string& v) { return !is_data(v); });
            g.rhs_lin = rest;
            return g;
        };
        if (auto g = try_side(a.lhs, a.rel, a.rhs)) return *g;
        if (auto g = try_side(a.rhs, flip(a.rel), a.lhs)) return *g;
        fail("comparison guard must have the form y op z1 + ... + zk + c", &at);
    }

    Guard guard() {
        Guard g;
        g.atoms.push_back(guard_atom());
        while (accept("&&")) g.atoms.push_back(guard_atom());
        return g;
    }

    Proposition proposition() {
        Proposition p;
        if (accept("<all>")) p.quant = Quant::All;
        else if (accept("<some>")) p.quant = Quant::Some;
        else fail("expected <all> or <some>");
        if (peek().type == Token::T::Ident && peek().text == "sv") {
            if (get().primed) fail("primed sv in a proposition");
            p.is_status = true;
            if (accept("==") || accept("=")) p.rel = Rel::Eq;
            else if (accept("!=")) p.rel = Rel::Ne;
            else fail("expected == or != after sv");
            p.status = status_value();
            return p;
        }
        p.is_status = false;
        const Token& start = peek();
        bool saved = allow_primed_;
        allow_primed_ = false;
        p.data = lin_atom();
        allow_primed_ = saved;
        if (cfa_) {
            bool any = false;
            for (const auto& v : (p.data.lhs - p.data.rhs).vars()) any = any || is_data(v);
            if (!any) fail("proposition mentions no data variable", &start);
        }
        return p;
    }

    // LTL\X, negation normal form.
    Ltl ltl_impl() {
        Ltl a = ltl_or();
        if (accept("->")) return ltl::implies(a, ltl_impl());
        return a;
    }
    Ltl ltl_or() {
        Ltl a = ltl_and();
        while (accept("||")) a = ltl::disj(a, ltl_and());
        return a;
    }
    Ltl ltl_and() {
        Ltl a = ltl_until();
        while (accept("&&")) a = ltl::conj(a, ltl_until());
        return a;
    }
    Ltl ltl_until() {
        Ltl a = ltl_unary();
        if (is_ident("U")) {
            get();
            return ltl::until(a, ltl_until());
        }
        if (is_ident("R")) {
            get();
            return ltl::release(a, ltl_until());
        }
        return a;
    }
    Ltl ltl_unary() {
        if (accept("!")) return ltl::neg(ltl_unary());
        if (is_ident("G")) {
            get();
            return ltl::globally(ltl_unary());
        }
        if (is_ident("F")) {
            get();
            return ltl::eventually(ltl_unary());
        }
        if (is_ident("X")) fail("next-time operator X is not supported");
        return ltl_primary();
    }
    Ltl ltl_primary() {
        if (accept("(")) {
            Ltl f = ltl_impl();
            expect(")");
            return f;
        }
        if (is_ident("true")) {
            get();
            return ltl::top();
        }
        if (is_ident("false")) {
            get();
            return ltl::bottom();
        }
        if (is_sym("<all>") || is_sym("<some>")) return ltl::atom(proposition());
        if (peek().type == Token::T::Ident && !peek().primed) {
            const Token& t = peek();
            if (!plain_atoms_.count(t.text)) fail("undeclared proposition '" + t.text + "'");
            get();
            return ltl::atom(t.text);
        }
        fail("expected formula");
    }

    std::string text_between(std::size_t from_tok, std::size_t to_tok) const {
        std::size_t a = toks_[from_tok].offset, b = toks_[to_tok].offset;
        std::string s = src_.substr(a, b - a);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
        return s;
    }

    Model model();

    std::set<std::string> plain_atoms_;
    std::set<std::string> extra_names_;
    bool allow_primed_ = true;
    bool allow_any_name_ = false;
    std::size_t pos_ = 0;

    const std::string& src_;
    std::vector<Token> toks_;
    const Cfa* cfa_;
    Cfa own_;
};

Model Parser::model() {
    Model m;
    Cfa& c = own_;
    cfa_ = &c;
    expect_keyword("skeleton");
    c.name = ident("skeleton name");
    expect("{");
    std::map<std::string, int> loc_index;
    struct PendingEdge {
        std::string from, to;
        Token at;
        Guard guard;
    };
    std::vector<PendingEdge> edges;
    bool have_init = false, have_final = false;
    int justice_count = 0;
    while (!accept("}")) {
        if (at_end()) fail("unexpected end of input, expected '}'");
        const Token kw = peek();
        std::string k = ident("declaration");
        if (k == "parameters") {
            c.space.params = ident_list(";");
        } else if (k == "resilience") {
            LinearPredicate p;
            p.atoms.push_back(lin_atom());
            while (accept("&&")) p.atoms.push_back(lin_atom());
            c.space.resilience = p;
        } else if (k == "size") {
            c.space.size = lin();
        } else if (k == "shared" || k == "local") {
            do {
                const Token& t = peek();
                std::string v = ident("variable");
                if (c.local_index(v) >= 0 || c.shared_index(v) >= 0 || c.is_param(v) || v == "sv")
                    fail("duplicate name '" + v + "'", &t);
                expect(":");
                const Token& ty = peek();
                if (ident("type") != "nat") fail("only type nat is supported", &ty);
                (k == "shared" ? c.shared : c.locals).push_back(v);
            } while (accept(","));
        } else if (k == "sv") {
            expect("{");
            c.status_values = ident_list("}");
            expect("}");
            expect_keyword("init");
            expect("{");
            c.initial_status.clear();
            while (!is_sym("}")) {
                c.initial_status.push_back(status_value());
                if (!accept(",")) break;
            }
            expect("}");
        } else if (k == "locations") {
            do {
                const Token& t = peek();
                std::string l = ident("location");
                if (loc_index.count(l)) fail("duplicate location '" + l + "'", &t);
                loc_index[l] = static_cast<int>(c.locations.size());
                c.locations.push_back(l);
                while (is_ident("init") || is_ident("final")) {
                    if (get().text == "init") {
                        c.initial = loc_index[l];
                        have_init = true;
                    } else {
                        c.final = loc_index[l];
                        have_final = true;
                    }
                }
            } while (accept(","));
        } else if (k == "edge") {
            PendingEdge e;
            e.at = peek();
            e.from = ident("location");
            expect("->");
            e.to = ident("location");
            if (is_ident("when")) {
                get();
                e.guard = guard();
            }
            edges.push_back(std::move(e));
        } else if (k == "spec") {
            NamedSpec s;
            s.name = ident("spec name");
            std::size_t from = pos_;
            s.formula = ltl_impl();
            s.text = text_between(from, pos_);
            if (m.spec(s.name)) fail("duplicate spec '" + s.name + "'", &kw);
            m.specs.push_back(std::move(s));
        } else if (k == "invariant") {
            // Raw candidate text, parsed once the skeleton is complete.
            std::size_t from = pos_;
            while (!at_end() && !is_sym(";")) get();
            m.candidates.push_back(text_between(from, pos_));
        } else if (k == "justice") {
            NamedProp j;
            if (peek().type == Token::T::Ident) j.name = ident();
            else j.name = "J" + std::to_string(++justice_count);
            j.prop = proposition();
            m.justice.push_back(std::move(j));
        } else {
            fail("unknown declaration '" + k + "'", &kw);
        }
        expect(";");
    }
    if (!at_end()) fail("trailing input after skeleton");
    if (!have_init || !have_final) fail("locations need one init and one final location");
    for (auto& e : edges) {
        auto f = loc_index.find(e.from), t = loc_index.find(e.to);
        if (f == loc_index.end()) fail("undeclared location '" + e.from + "'", &e.at);
        if (t == loc_index.end()) fail("undeclared location '" + e.to + "'", &e.at);
        c.edges.push_back({f->second, t->second, std::move(e.guard)});
    }
    for (const auto& d : validate_cfa(c))
        if (d.kind == Diagnostic::Kind::CyclicCfa || d.kind == Diagnostic::Kind::UndeclaredIdentifier)
            throw ParseError(1, 1, std::string(kind_name(d.kind)) + ": " + d.message);
    m.cfa = std::move(c);
    for (const auto& text : m.candidates) (void)parse_invariants(text, m.cfa);
    return m;
}

}  // namespace

Model parse_model(const std::string& text) {
    Parser p(text, nullptr);
    return p.model();
}

Ltl parse_ltl(const std::string& text, const Cfa* cfa, const std::set<std::string>& plain_atoms) {
    Parser p(text, cfa);
    p.plain_atoms_ = plain_atoms;
    p.allow_primed_ = false;
    if (!cfa) p.allow_any_name_ = true;
    Ltl f = p.ltl_impl();
    if (!p.at_end()) p.fail("trailing input after formula");
    return f;
}

Proposition parse_proposition(const std::string& text, const Cfa& cfa) {
    Parser p(text, &cfa);
    p.allow_primed_ = false;
    Proposition prop = p.proposition();
    if (!p.at_end()) p.fail("trailing input after proposition");
    return prop;
}

LinearPredicate parse_linear_predicate(const std::string& text, const std::vector<std::string>& names) {
    Cfa scope;
    scope.space.params = names;
    Parser p(text, &scope);
    p.allow_primed_ = false;
    LinearPredicate pred;
    pred.atoms.push_back(p.lin_atom());
    while (p.accept("&&")) pred.atoms.push_back(p.lin_atom());
    if (!p.at_end()) p.fail("trailing input after predicate");
    return pred;
}

namespace {

InvariantTerm inv_term(Parser& p, const Cfa& cfa, const std::set<int>& interval_range) {
    InvariantTerm t;
    if (p.accept("-")) {
        t = inv_term(p, cfa, interval_range);
        t.coeff = -t.coeff;
        return t;
    }
    if (p.peek().type == Token::T::Int) {
        Int k = p.get().value;
        if (p.accept("*") || (p.peek().type == Token::T::Ident)) {
            t = inv_term(p, cfa, interval_range);
            t.coeff *= k;
            return t;
        }
        t.kind = InvariantTerm::Kind::Const;
        t.coeff = k;
        return t;
    }
    const Token& at = p.peek();
    std::string n = p.ident("name");
    if (n == "K" && p.accept("[")) {
        t.kind = InvariantTerm::Kind::Count;
        if (p.accept("*")) {
            p.expect("]");
            return t;
        }
        t.pattern.any = false;
        do {
            const Token& vt = p.peek();
            std::string v = p.ident("variable");
            std::set<std::string> values;
            if (p.accept("=") || p.accept("==")) {
                values.insert(p.ident("value"));
            } else {
                p.expect_keyword("in");
                p.expect("{");
                do values.insert(p.ident("value"));
                while (p.accept(","));
                p.expect("}");
            }
            if (v == "sv") {
                for (const auto& s : values)
                    if (cfa.status_index(s) < 0) p.fail("undeclared status value '" + s + "'", &vt);
                t.pattern.status = values;
            } else if (cfa.local_index(v) >= 0) {
                std::set<int> idx;
                for (const auto& s : values) {
                    if (s.size() < 2 || s[0] != 'I') p.fail("expected interval name I<k>", &vt);
                    int k = std::stoi(s.substr(1));
                    if (!interval_range.empty() && !interval_range.count(k)) p.fail("interval out of range", &vt);
                    idx.insert(k);
                }
                t.pattern.locals.emplace_back(v, idx);
            } else {
                p.fail("'" + v + "' is not sv or a local variable", &vt);
            }
        } while (p.accept(","));
        p.expect("]");
        return t;
    }
    if (!cfa.is_param(n) && cfa.shared_index(n) < 0) p.fail("undeclared identifier '" + n + "'", &at);
    t.kind = InvariantTerm::Kind::Name;
    t.name = n;
    return t;
}

std::vector<InvariantTerm> inv_sum(Parser& p, const Cfa& cfa) {
    std::vector<InvariantTerm> out{inv_term(p, cfa, {})};
    for (;;) {
        if (p.accept("+")) out.push_back(inv_term(p, cfa, {}));
        else if (p.accept("-")) {
            auto t = inv_term(p, cfa, {});
            t.coeff = -t.coeff;
            out.push_back(t);
        } else {
            return out;
        }
    }
}

}  // namespace

std::vector<InvariantCandidate> parse_invariants(const std::string& text, const Cfa& cfa) {
    std::vector<InvariantCandidate> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            Parser p(line, &cfa);
            InvariantCandidate c;
            c.text = line.substr(line.find_first_not_of(" \t"));
            while (!c.text.empty() && std::isspace(static_cast<unsigned char>(c.text.back()))) c.text.pop_back();
            do {
                InvariantAtom a;
                a.lhs = inv_sum(p, cfa);
                auto r = p.rel();
                if (!r) p.fail("expected comparison operator");
                a.rel = *r;
                a.rhs = inv_sum(p, cfa);
                c.atoms.push_back(std::move(a));
            } while (p.accept("&&"));
            if (!p.at_end()) p.fail("trailing input in invariant");
            out.push_back(std::move(c));
        } catch (const ParseError& e) {
            throw ParseError(lineno, e.column(), e.what());
        }
    }
    return out;
}

std::string to_dsl(const Model& m) {
    const Cfa& c = m.cfa;
    std::ostringstream o;
    auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
        return s;
    };
    o << "skeleton " << c.name << " {\n";
    o << "  parameters " << join(c.space.params) << ";\n";
    if (!c.space.resilience.atoms.empty()) o << "  resilience " << c.space.resilience.str() << ";\n";
    o << "  size " << c.space.size.str() << ";\n";
    for (const auto& g : c.shared) o << "  shared " << g << ": nat;\n";
    for (const auto& x : c.locals) o << "  local " << x << ": nat;\n";
    o << "  sv {" << join(c.status_values) << "} init {" << join(c.initial_status) << "};\n";
    o << "  locations ";
    for (std::size_t i = 0; i < c.locations.size(); ++i) {
        o << (i ? ", " : "") << c.locations[i];
        if (static_cast<int>(i) == c.initial) o << " init";
        if (static_cast<int>(i) == c.final) o << " final";
    }
    o << ";\n";
    for (const auto& e : c.edges) {
        o << "  edge " << c.locations[e.from] << " -> " << c.locations[e.to];
        if (!e.guard.atoms.empty()) o << " when " << guard_str(e.guard);
        o << ";\n";
    }
    for (const auto& s : m.specs) o << "  spec " << s.name << " " << (s.text.empty() ? to_string(s.formula) : s.text) << ";\n";
    for (const auto& j : m.justice) o << "  justice " << j.name << " " << j.prop.name() << ";\n";
    for (const auto& c : m.candidates) o << "  invariant " << c << ";\n";
    o << "}\n";
    return o.str();
}

}  // namespace pia
