#include "pia/smt.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <sstream>

#include "pia/errors.hpp"

namespace pia::smt {

namespace {

Term mk(Kind k, std::vector<Term> args = {}, Int value = 0) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->args = std::move(args);
    n->value = value;
    return Term(std::move(n));
}

bool is_bool_const(const Term& t, bool v) {
    return t.node().kind == Kind::BoolConst && (t.node().value != 0) == v;
}

}  // namespace

Term lit(Int v) { return mk(Kind::Const, {}, v); }

Term var(const std::string& name) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Var;
    n->name = name;
    return Term(std::move(n));
}

Term boolean(bool b) { return mk(Kind::BoolConst, {}, b ? 1 : 0); }

Term add(std::vector<Term> ts) {
    std::vector<Term> flat;
    for (auto& t : ts) {
        if (t.node().kind == Kind::Add)
            for (const auto& a : t.node().args) flat.push_back(a);
        else if (!(t.node().kind == Kind::Const && t.node().value == 0))
            flat.push_back(t);
    }
    if (flat.empty()) return lit(0);
    if (flat.size() == 1) return flat.front();
    return mk(Kind::Add, std::move(flat));
}

Term sub(const Term& a, const Term& b) { return add({a, mul(-1, b)}); }

Term mul(Int k, const Term& t) {
    if (k == 1) return t;
    if (t.node().kind == Kind::Const) return lit(k * t.node().value);
    return mk(Kind::Mul, {t}, k);
}

Term cmp(const Term& a, Rel r, const Term& b) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Cmp;
    n->rel = r;
    n->args = {a, b};
    return Term(std::move(n));
}

Term eq(const Term& a, const Term& b) { return cmp(a, Rel::Eq, b); }
Term le(const Term& a, const Term& b) { return cmp(a, Rel::Le, b); }
Term lt(const Term& a, const Term& b) { return cmp(a, Rel::Lt, b); }
Term ge(const Term& a, const Term& b) { return cmp(a, Rel::Ge, b); }
Term gt(const Term& a, const Term& b) { return cmp(a, Rel::Gt, b); }

Term conj(std::vector<Term> ts) {
    std::vector<Term> flat;
    for (auto& t : ts) {
        if (is_bool_const(t, true)) continue;
        if (is_bool_const(t, false)) return boolean(false);
        if (t.node().kind == Kind::And)
            for (const auto& a : t.node().args) flat.push_back(a);
        else
            flat.push_back(t);
    }
    if (flat.empty()) return boolean(true);
    if (flat.size() == 1) return flat.front();
    return mk(Kind::And, std::move(flat));
}

Term disj(std::vector<Term> ts) {
    std::vector<Term> flat;
    for (auto& t : ts) {
        if (is_bool_const(t, false)) continue;
        if (is_bool_const(t, true)) return boolean(true);
        if (t.node().kind == Kind::Or)
            for (const auto& a : t.node().args) flat.push_back(a);
        else
            flat.push_back(t);
    }
    if (flat.empty()) return boolean(false);
    if (flat.size() == 1) return flat.front();
    return mk(Kind::Or, std::move(flat));
}

Term neg(const Term& t) {
    if (t.node().kind == Kind::BoolConst) return boolean(t.node().value == 0);
    return mk(Kind::Not, {t});
}

Term implies(const Term& a, const Term& b) { return mk(Kind::Implies, {a, b}); }
Term ite(const Term& c, const Term& a, const Term& b) { return mk(Kind::Ite, {c, a, b}); }

Term exists(std::vector<std::string> vars, const Term& body) {
    if (vars.empty()) return body;
    auto n = std::make_shared<Node>();
    n->kind = Kind::Exists;
    n->args = {body};
    n->bound = std::move(vars);
    return Term(std::move(n));
}

Term from_linear(const LinearExpr& e) {
    std::vector<Term> ts;
    for (const auto& [v, c] : e.coeffs()) ts.push_back(mul(c, var(v)));
    if (e.constant() != 0 || ts.empty()) ts.push_back(lit(e.constant()));
    return add(std::move(ts));
}

Term from_atom(const LinearAtom& a) { return cmp(from_linear(a.lhs), a.rel, from_linear(a.rhs)); }

Term from_predicate(const LinearPredicate& p) {
    std::vector<Term> ts;
    for (const auto& a : p.atoms) ts.push_back(from_atom(a));
    return conj(std::move(ts));
}

std::string symbol(const std::string& name) {
    bool simple = !name.empty() && !std::isdigit(static_cast<unsigned char>(name[0]));
    for (char c : name)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || std::strchr("~!@$%^&*_-+=<>.?/", c))) simple = false;
    return simple ? name : "|" + name + "|";
}

namespace {

void render_into(const Term& t, std::string& out) {
    const Node& n = t.node();
    auto list = [&](const char* head) {
        out += "(";
        out += head;
        for (const auto& a : n.args) {
            out += " ";
            render_into(a, out);
        }
        out += ")";
    };
    switch (n.kind) {
        case Kind::Const:
            if (n.value < 0) out += "(- " + std::to_string(-n.value) + ")";
            else out += std::to_string(n.value);
            return;
        case Kind::Var: out += symbol(n.name); return;
        case Kind::BoolConst: out += n.value ? "true" : "false"; return;
        case Kind::Add: list("+"); return;
        case Kind::Mul:
            out += "(* ";
            render_into(lit(n.value), out);
            out += " ";
            render_into(n.args[0], out);
            out += ")";
            return;
        case Kind::Cmp: {
            const char* h = "=";
            switch (n.rel) {
                case Rel::Eq: h = "="; break;
                case Rel::Ne: h = "distinct"; break;
                case Rel::Lt: h = "<"; break;
                case Rel::Le: h = "<="; break;
                case Rel::Gt: h = ">"; break;
                case Rel::Ge: h = ">="; break;
            }
            list(h);
            return;
        }
        case Kind::And: list("and"); return;
        case Kind::Or: list("or"); return;
        case Kind::Not: list("not"); return;
        case Kind::Implies: list("=>"); return;
        case Kind::Ite: list("ite"); return;
        case Kind::Exists:
            out += "(exists (";
            for (std::size_t i = 0; i < n.bound.size(); ++i) {
                if (i) out += " ";
                out += "(" + symbol(n.bound[i]) + " Int)";
            }
            out += ") ";
            render_into(n.args[0], out);
            out += ")";
            return;
    }
}

void free_into(const Term& t, std::set<std::string>& bound, std::set<std::string>& out) {
    const Node& n = t.node();
    if (n.kind == Kind::Var) {
        if (!bound.count(n.name)) out.insert(n.name);
        return;
    }
    if (n.kind == Kind::Exists) {
        std::set<std::string> inner = bound;
        inner.insert(n.bound.begin(), n.bound.end());
        free_into(n.args[0], inner, out);
        return;
    }
    for (const auto& a : n.args) free_into(a, bound, out);
}

}  // namespace

std::string render(const Term& t) {
    std::string s;
    render_into(t, s);
    return s;
}

std::set<std::string> free_vars(const Term& t) {
    std::set<std::string> b, out;
    free_into(t, b, out);
    return out;
}

bool has_quantifier(const Term& t) {
    if (t.node().kind == Kind::Exists) return true;
    for (const auto& a : t.node().args)
        if (has_quantifier(a)) return true;
    return false;
}

Term substitute(const Term& t, const std::map<std::string, Term>& m) {
    const Node& n = t.node();
    if (n.kind == Kind::Var) {
        auto it = m.find(n.name);
        return it == m.end() ? t : it->second;
    }
    if (n.args.empty()) return t;
    std::map<std::string, Term> inner;
    const auto* use = &m;
    if (n.kind == Kind::Exists) {
        inner = m;
        for (const auto& b : n.bound) inner.erase(b);
        use = &inner;
    }
    auto copy = std::make_shared<Node>(n);
    for (auto& a : copy->args) a = substitute(a, *use);
    return Term(std::move(copy));
}

Term rename(const Term& t, const std::map<std::string, std::string>& m) {
    std::map<std::string, Term> s;
    for (const auto& [a, b] : m) s.emplace(a, var(b));
    return substitute(t, s);
}

Int eval_int(const Term& t, const Valuation& v) {
    const Node& n = t.node();
    switch (n.kind) {
        case Kind::Const: return n.value;
        case Kind::Var: {
            auto it = v.find(n.name);
            if (it == v.end()) throw Error("smt", "no value for '" + n.name + "'");
            return it->second;
        }
        case Kind::Add: {
            Int s = 0;
            for (const auto& a : n.args) s += eval_int(a, v);
            return s;
        }
        case Kind::Mul: return n.value * eval_int(n.args[0], v);
        case Kind::Ite: return eval_bool(n.args[0], v) ? eval_int(n.args[1], v) : eval_int(n.args[2], v);
        default: throw Error("smt", "term is not Int-sorted");
    }
}

bool eval_bool(const Term& t, const Valuation& v) {
    const Node& n = t.node();
    switch (n.kind) {
        case Kind::BoolConst: return n.value != 0;
        case Kind::Cmp: return holds(eval_int(n.args[0], v), n.rel, eval_int(n.args[1], v));
        case Kind::And:
            for (const auto& a : n.args)
                if (!eval_bool(a, v)) return false;
            return true;
        case Kind::Or:
            for (const auto& a : n.args)
                if (eval_bool(a, v)) return true;
            return false;
        case Kind::Not: return !eval_bool(n.args[0], v);
        case Kind::Implies: return !eval_bool(n.args[0], v) || eval_bool(n.args[1], v);
        case Kind::Ite: return eval_bool(n.args[0], v) ? eval_bool(n.args[1], v) : eval_bool(n.args[2], v);
        case Kind::Exists: throw Error("smt", "cannot evaluate a quantifier natively");
        default: throw Error("smt", "term is not Bool-sorted");
    }
}

namespace {

std::set<std::string> query_vars(const Query& q) {
    std::set<std::string> vs;
    for (const auto& a : q.assertions) {
        auto f = free_vars(a.term);
        vs.insert(f.begin(), f.end());
    }
    return vs;
}

bool query_quantified(const Query& q) {
    for (const auto& a : q.assertions)
        if (has_quantifier(a.term)) return true;
    return false;
}

void body_into(const Query& q, std::string& s) {
    const auto vs = query_vars(q);
    for (const auto& v : vs) s += "(declare-fun " + symbol(v) + " () Int)\n";
    for (const auto& a : q.assertions) {
        if (q.want_core && !a.label.empty())
            s += "(assert (! " + render(a.term) + " :named " + symbol(a.label) + "))\n";
        else
            s += "(assert " + render(a.term) + ")\n";
    }
    s += "(check-sat)\n";
    if (q.want_model && !vs.empty()) {
        s += "(get-value (";
        bool first = true;
        for (const auto& v : vs) {
            if (!first) s += " ";
            s += symbol(v);
            first = false;
        }
        s += "))\n";
    }
    if (q.want_core) s += "(get-unsat-core)\n";
}

// Minimal s-expression reader for solver responses.
struct SExpr {
    bool atom = true;
    std::string text;
    std::vector<SExpr> items;
};

class Reader {
public:
    explicit Reader(const std::string& s) : s_(s) {}
    bool next(SExpr& out) {
        skip();
        if (pos_ >= s_.size()) return false;
        out = read();
        return true;
    }

private:
    void skip() {
        while (pos_ < s_.size()) {
            if (std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            else if (s_[pos_] == ';')
                while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
            else break;
        }
    }
    SExpr read() {
        skip();
        if (pos_ >= s_.size()) throw SolverError("truncated solver output");
        SExpr e;
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            e.atom = false;
            for (;;) {
                skip();
                if (pos_ >= s_.size()) throw SolverError("unbalanced solver output");
                if (s_[pos_] == ')') {
                    ++pos_;
                    break;
                }
                e.items.push_back(read());
            }
            return e;
        }
        if (c == ')') throw SolverError("unexpected ')' in solver output");
        if (c == '"') {
            ++pos_;
            while (pos_ < s_.size()) {
                if (s_[pos_] == '"') {
                    if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '"') {
                        e.text += '"';
                        pos_ += 2;
                        continue;
                    }
                    ++pos_;
                    break;
                }
                e.text += s_[pos_++];
            }
            e.text = "\"" + e.text;
            return e;
        }
        if (c == '|') {
            ++pos_;
            while (pos_ < s_.size() && s_[pos_] != '|') e.text += s_[pos_++];
            ++pos_;
            return e;
        }
        while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '(' &&
               s_[pos_] != ')')
            e.text += s_[pos_++];
        return e;
    }
    const std::string& s_;
    std::size_t pos_ = 0;
};

bool is_error(const SExpr& e) { return !e.atom && !e.items.empty() && e.items[0].atom && e.items[0].text == "error"; }

Int sexpr_int(const SExpr& e) {
    if (e.atom) return std::stoll(e.text);
    if (e.items.size() == 2 && e.items[0].atom && e.items[0].text == "-") return -sexpr_int(e.items[1]);
    throw SolverError("non-integer model value");
}

}  // namespace

std::string to_smtlib(const Query& q) {
    std::string s;
    if (q.want_model) s += "(set-option :produce-models true)\n";
    if (q.want_core) s += "(set-option :produce-unsat-cores true)\n";
    s += query_quantified(q) ? "(set-logic LIA)\n" : "(set-logic QF_LIA)\n";
    body_into(q, s);
    return s;
}

Solver::Solver(SolverConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.command.empty()) {
        const char* env = std::getenv("PIA_SOLVER");
        cfg_.command = env && *env ? env : "z3 -in -smt2";
    }
}

std::string Solver::run(const std::string& script, double timeout) {
    int in_pipe[2], out_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) throw SolverError("pipe failed");
    pid_t pid = fork();
    if (pid < 0) throw SolverError("fork failed");
    if (pid == 0) {
        dup2(in_pipe[0], 0);
        dup2(out_pipe[1], 1);
        int devnull = open("/dev/null", O_WRONLY);
        if (devnull >= 0) dup2(devnull, 2);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        execl("/bin/sh", "sh", "-c", ("exec " + cfg_.command).c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    ++stats_.processes;
    signal(SIGPIPE, SIG_IGN);
    fcntl(in_pipe[1], F_SETFL, O_NONBLOCK);

    const auto start = std::chrono::steady_clock::now();
    std::string out;
    std::size_t written = 0;
    int wfd = in_pipe[1];
    bool timed_out = false;
    if (script.empty()) {
        close(wfd);
        wfd = -1;
    }
    for (;;) {
        pollfd fds[2];
        int nf = 0;
        fds[nf++] = {out_pipe[0], POLLIN, 0};
        if (wfd >= 0) fds[nf++] = {wfd, POLLOUT, 0};
        double left = timeout - std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (left <= 0) {
            timed_out = true;
            break;
        }
        int r = poll(fds, nf, static_cast<int>(left * 1000) + 1);
        if (r < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (nf == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
            ssize_t w = write(wfd, script.data() + written, script.size() - written);
            if (w > 0) written += static_cast<std::size_t>(w);
            if (w < 0 && errno != EAGAIN) written = script.size();
            if (written >= script.size()) {
                close(wfd);
                wfd = -1;
            }
        }
        if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
            char buf[65536];
            ssize_t n = read(out_pipe[0], buf, sizeof buf);
            if (n > 0) out.append(buf, static_cast<std::size_t>(n));
            else if (n == 0) break;
        }
    }
    if (wfd >= 0) close(wfd);
    close(out_pipe[0]);
    if (timed_out) kill(pid, SIGKILL);
    int status = 0;
    waitpid(pid, &status, 0);
    stats_.seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (timed_out) throw SolverError("solver timed out");
    if (WIFEXITED(status) && WEXITSTATUS(status) == 127) throw SolverError("cannot run solver '" + cfg_.command + "'");
    if (WIFSIGNALED(status)) throw SolverError("solver crashed");
    return out;
}

std::vector<Verdict> Solver::check_all(const std::vector<Query>& qs) {
    std::vector<Verdict> res(qs.size());
    std::vector<std::size_t> todo;
    std::vector<std::string> keys(qs.size());
    for (std::size_t i = 0; i < qs.size(); ++i) {
        ++stats_.queries;
        keys[i] = to_smtlib(qs[i]);
        auto it = cache_.find(keys[i]);
        if (it != cache_.end()) {
            ++stats_.cache_hits;
            res[i] = it->second;
        } else {
            todo.push_back(i);
        }
    }
    if (todo.empty()) return res;

    bool quantified = false;
    for (auto i : todo) quantified = quantified || query_quantified(qs[i]);
    std::string script = "(set-option :produce-models true)\n(set-option :produce-unsat-cores true)\n";
    script += quantified ? "(set-logic LIA)\n" : "(set-logic QF_LIA)\n";
    if (todo.size() == 1) {
        script = keys[todo[0]];
    } else {
        for (auto i : todo) {
            script += "(push 1)\n";
            body_into(qs[i], script);
            script += "(pop 1)\n";
        }
    }
    std::string out = run(script, cfg_.timeout_seconds * static_cast<double>(todo.size()));
    Reader rd(out);
    for (auto i : todo) {
        const Query& q = qs[i];
        SExpr e;
        // Skip stray error lines before the check-sat answer.
        for (;;) {
            if (!rd.next(e)) throw SolverError("solver produced no answer");
            if (!is_error(e)) break;
        }
        if (!e.atom) throw SolverError("unparsable solver answer");
        Verdict v;
        if (e.text == "sat") v.result = Verdict::Result::Sat;
        else if (e.text == "unsat") v.result = Verdict::Result::Unsat;
        else if (e.text == "unknown") v.result = Verdict::Result::Unknown;
        else throw SolverError("unexpected solver answer '" + e.text + "'");
        if (q.want_model && !query_vars(q).empty()) {
            if (!rd.next(e)) throw SolverError("missing model");
            if (v.sat()) {
                if (is_error(e)) throw SolverError("solver refused model");
                for (const auto& pair : e.items) {
                    if (pair.atom || pair.items.size() != 2 || !pair.items[0].atom)
                        throw SolverError("unparsable model entry");
                    v.model[pair.items[0].text] = sexpr_int(pair.items[1]);
                }
            }
        }
        if (q.want_core) {
            if (!rd.next(e)) throw SolverError("missing core");
            if (v.unsat()) {
                if (is_error(e)) throw SolverError("solver refused core");
                for (const auto& c : e.items) v.core.insert(c.text);
            }
        }
        cache_[keys[i]] = v;
        res[i] = std::move(v);
    }
    return res;
}

Verdict Solver::check(const Query& q) { return check_all({q}).front(); }

Solver& default_solver() {
    static Solver s;
    return s;
}

Verdict check_formula(const std::vector<Assertion>& assertions, bool want_model, bool want_core) {
    Query q{assertions, want_model, want_core};
    return default_solver().check(q);
}

}  // namespace pia::smt
