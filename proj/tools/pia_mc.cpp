#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pia/cegar.hpp"
#include "pia/corpus.hpp"
#include "pia/report.hpp"
#include "pia/twocm.hpp"

using namespace pia;

namespace {

enum Exit { kVerified = 0, kFalsified = 1, kInconclusive = 2, kError = 3 };

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw Error("io", "cannot write " + path);
    out << text;
}

// Reads the argument as a file when one exists at that path.
std::string text_or_file(const std::string& arg) {
    std::error_code ec;
    return std::filesystem::is_regular_file(arg, ec) ? read_file(arg) : arg;
}

std::vector<std::string> split_list(const std::vector<std::string>& args) {
    std::vector<std::string> out;
    for (const auto& a : args) {
        std::stringstream ss(a);
        std::string x;
        while (std::getline(ss, x, ','))
            if (!x.empty()) out.push_back(x);
    }
    return out;
}

Valuation parse_params(const std::string& s, const ParamSpace& ps) {
    Valuation p;
    for (const auto& kv : split_list({s})) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error("cli", "bad parameter assignment '" + kv + "'");
        std::string name = kv.substr(0, eq);
        name.erase(0, name.find_first_not_of(' '));
        name.erase(name.find_last_not_of(' ') + 1);
        if (std::find(ps.params.begin(), ps.params.end(), name) == ps.params.end())
            throw Error("cli", "unknown parameter '" + name + "'");
        p[name] = std::stoll(kv.substr(eq + 1));
    }
    for (const auto& name : ps.params)
        if (!p.count(name)) throw Error("cli", "parameter '" + name + "' missing in '" + s + "'");
    return p;
}

struct Common {
    std::string model;
    std::string resilience;
    std::string solver_cmd;
    double solver_timeout = 10.0;
};

Model load_model(const Common& c) {
    Model m = is_builtin(c.model) ? builtin_model(c.model) : parse_model(read_file(c.model));
    if (!c.resilience.empty()) m.cfa.space.resilience = parse_linear_predicate(c.resilience, m.cfa.space.params);
    return m;
}

std::string model_label(const std::string& arg) {
    return is_builtin(arg) ? arg : std::filesystem::path(arg).stem().string();
}

smt::Solver make_solver(const Common& c) {
    smt::SolverConfig cfg;
    cfg.command = c.solver_cmd;
    cfg.timeout_seconds = c.solver_timeout;
    return smt::Solver(cfg);
}

Ltl resolve_spec(const Model& m, const std::string& arg, std::string& name) {
    if (const NamedSpec* s = m.spec(arg)) {
        name = s->name;
        return s->formula;
    }
    name = arg;
    return parse_ltl(text_or_file(arg), &m.cfa);
}

// Thresholds and the two abstractions of one ordered part.
struct Pipeline {
    ThresholdSet ts;
    std::unique_ptr<Abstractor> abs;
    AbstractCfa full, lonly;
};

Pipeline pipeline(const Model& m, smt::Solver& solver) {
    Pipeline p;
    OrderResult order = check_uniform_order(collect_thresholds(m.cfa), m.cfa.space, solver, false);
    if (order.kind != OrderResult::Kind::Ordered) throw OrderError(order);
    p.ts = order.ordered;
    p.abs = std::make_unique<Abstractor>(m.cfa.space, p.ts, solver);
    p.full = abstract_cfa(m.cfa, AbstractionMode::Full, *p.abs);
    p.lonly = abstract_cfa(m.cfa, AbstractionMode::LocalsOnly, *p.abs);
    return p;
}

std::string summary(const Report& r) {
    std::ostringstream os;
    os << r.model << " " << r.spec << ": " << r.verdict << "  #R=" << r.refinements << "  "
       << static_cast<long long>(r.seconds * 1000) << " ms  " << r.solver_queries << " queries\n";
    for (const auto& p : r.parts) {
        os << "  [" << p.resilience << "] " << p.verdict << "  states=" << p.states << " edges=" << p.edges
           << " product=" << p.product_states;
        if (!p.invariants.empty()) os << " invariants=" << p.invariants.size();
        os << "\n";
        if (!p.stuck.empty()) os << "  stuck: " << p.stuck << "\n";
        if (p.witness) {
            os << "  witness at";
            for (const auto& [k, v] : p.witness->params) os << " " << k << "=" << v;
            os << (p.witness->image_matched ? " (follows the abstract lasso)" : " (direct search)") << "\n";
            for (const auto& s : p.witness->prefix) os << "     " << s << "\n";
            for (std::size_t i = 0; i < p.witness->loop.size(); ++i)
                os << (i == 0 ? "   * " : "     ") << p.witness->loop[i] << "\n";
        } else if (p.counterexample) {
            os << "  abstract counterexample, no concrete witness found at the sampled parameters\n";
        }
    }
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"parameterized model checker for threshold-guarded process skeletons"};
    app.require_subcommand(1);

    Common c;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--model", c.model, "builtin name (byz, symm, omit, clean, rbc) or .pia file")->required();
        sub->add_option("--resilience", c.resilience, "override the resilience condition");
        sub->add_option("--solver-cmd", c.solver_cmd, "SMT-LIB 2 solver command (default PIA_SOLVER or z3 -in -smt2)");
        sub->add_option("--solver-timeout", c.solver_timeout, "seconds per solver process");
    };

    auto* verify_cmd = app.add_subcommand("verify", "check a spec with abstraction refinement");
    add_common(verify_cmd);
    std::string spec_arg, json_out, dot_out, order = "sui";
    std::vector<std::string> justice_args, invariant_args, oracle_args;
    std::size_t budget = 5'000'000, max_ref = 200, samples = 8, replay_budget = 300'000;
    bool no_model_inv = false, delta_accel = false, all_q = false, quiet = false;
    verify_cmd->add_option("--spec", spec_arg, "spec name in the model, LTL text or file")->required();
    verify_cmd->add_option("--justice", justice_args, "justice requirement names (repeatable or comma separated)");
    verify_cmd->add_option("--invariant", invariant_args, "invariant candidate text or file (repeatable)");
    verify_cmd->add_flag("--no-model-invariants", no_model_inv, "ignore invariant candidates shipped with the model");
    verify_cmd->add_option("--budget", budget, "counter system state budget");
    verify_cmd->add_option("--max-refinements", max_ref, "refinement limit");
    verify_cmd->add_option("--oracle-params", oracle_args, "replay point such as n=4,t=1,f=1 (repeatable)");
    verify_cmd->add_option("--replay-samples", samples, "smallest admissible points tried for replay");
    verify_cmd->add_option("--replay-budget", replay_budget, "concrete states per replay instance");
    verify_cmd->add_option("--order", order, "refinement order over s(purious), u(njust), i(nvariant)");
    verify_cmd->add_flag("--all-q", all_q, "one unjust set per fitting justice requirement");
    verify_cmd->add_flag("--delta-accel", delta_accel, "let one step move several processes");
    verify_cmd->add_option("--json", json_out, "write the JSON report ('-' for stdout)");
    verify_cmd->add_option("--dot", dot_out, "write the counter system as DOT");
    verify_cmd->add_flag("-q,--quiet", quiet, "no summary on stdout");
    std::string dump_abs, dump_cs, dump_vass;
    verify_cmd->add_option("--dump-abstraction", dump_abs, "write both abstract CFAs and their tuple tables");
    verify_cmd->add_option("--dump-counter-system", dump_cs, "write the reachable counter system as DOT");
    verify_cmd->add_option("--dump-vass", dump_vass, "write Init, Step and labels as SMT-LIB");

    auto* abstract_cmd = app.add_subcommand("abstract", "print thresholds and abstract CFAs");
    add_common(abstract_cmd);

    auto* dump_cmd = app.add_subcommand("dump", "print intermediate structures");
    add_common(dump_cmd);
    std::string what = "model", dump_out = "-";
    dump_cmd->add_option("--what", what, "model | counter-system | vass | dot")
        ->check(CLI::IsMember({"model", "counter-system", "vass", "dot"}));
    dump_cmd->add_option("-o,--output", dump_out, "output file ('-' for stdout)");

    auto* twocm_cmd = app.add_subcommand("twocm", "build the skeleton of a two-counter machine");
    std::string machine, twocm_out = "-";
    twocm_cmd->add_option("--machine", machine, "statements or file, e.g. '0: inc B goto 1; 1: halt'")->required();
    twocm_cmd->add_option("-o,--output", twocm_out, "output .pia file ('-' for stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (twocm_cmd->parsed()) {
            write_file(twocm_out, to_dsl(build_2cm_cfa(parse_2cm(text_or_file(machine)))));
            return kVerified;
        }

        Model m = load_model(c);
        for (const auto& d : validate_cfa(m.cfa))
            throw Error("cfa", std::string(kind_name(d.kind)) + ": " + d.message);
        smt::Solver solver = make_solver(c);
        if (!sizes_unbounded(m.cfa.space, solver))
            throw Error("cfa", "resilience condition and size admit only boundedly many system sizes");

        if (verify_cmd->parsed()) {
            std::string spec_name;
            Ltl spec = resolve_spec(m, spec_arg, spec_name);
            std::vector<std::string> justice = split_list(justice_args);
            std::vector<InvariantCandidate> invs;
            if (!no_model_inv)
                for (const auto& t : m.candidates)
                    for (auto& x : parse_invariants(t, m.cfa)) invs.push_back(std::move(x));
            for (const auto& a : invariant_args)
                for (auto& x : parse_invariants(text_or_file(a), m.cfa)) invs.push_back(std::move(x));
            VerifyOptions opts;
            opts.budget = budget;
            opts.max_refinements = max_ref;
            opts.replay_samples = samples;
            opts.replay_budget = replay_budget;
            opts.delta_accel = delta_accel;
            opts.refine.order = order;
            opts.refine.all_q = all_q;
            for (const auto& o : oracle_args) opts.oracle_params.push_back(parse_params(o, m.cfa.space));
            VerifyResult r = verify(m, spec, justice, invs, solver, opts);
            Report rep = make_report(model_label(c.model), spec_name, justice, m.cfa, r);
            if (!quiet) std::cout << summary(rep);
            if (!json_out.empty()) write_file(json_out, nlohmann::json(rep).dump(2) + "\n");
            if (!r.parts.empty()) {
                // Dumps describe the first threshold order.
                const PartResult& first = r.parts.front();
                if (first.system) {
                    if (!dot_out.empty()) write_file(dot_out, to_dot(*first.system));
                    if (!dump_cs.empty()) write_file(dump_cs, to_dot(*first.system));
                }
                if (!dump_abs.empty() || !dump_vass.empty()) {
                    Cfa cfa = m.cfa;
                    cfa.space = first.space;
                    Abstractor abs(first.space, first.ts, solver);
                    AbstractCfa lonly = abstract_cfa(cfa, AbstractionMode::LocalsOnly, abs);
                    if (!dump_abs.empty())
                        write_file(dump_abs, describe(abstract_cfa(cfa, AbstractionMode::Full, abs)) + "\n" +
                                                 describe(lonly));
                    if (!dump_vass.empty()) {
                        std::vector<Proposition> jprops;
                        for (const auto& j : justice)
                            if (const NamedProp* np = m.justice_prop(j)) jprops.push_back(np->prop);
                        write_file(dump_vass, encode_lvass(lonly, jprops, delta_accel).dump());
                    }
                }
            }
            switch (r.verdict) {
                case VerdictKind::Verified: return kVerified;
                case VerdictKind::Falsified: return kFalsified;
                case VerdictKind::Inconclusive: return kInconclusive;
            }
        }

        if (abstract_cmd->parsed()) {
            Pipeline p = pipeline(m, solver);
            std::cout << "thresholds " << p.ts.str() << "\n\n" << describe(p.full) << "\n"
                      << describe(p.lonly);
            return kVerified;
        }

        if (dump_cmd->parsed()) {
            if (what == "model") {
                write_file(dump_out, to_dsl(m));
                return kVerified;
            }
            Pipeline p = pipeline(m, solver);
            std::vector<Proposition> props;
            for (const auto& s : m.specs)
                for (const auto& q : propositions(s.formula))
                    if (std::find(props.begin(), props.end(), q) == props.end()) props.push_back(q);
            std::vector<Proposition> jprops;
            for (const auto& j : m.justice) {
                jprops.push_back(j.prop);
                if (std::find(props.begin(), props.end(), j.prop) == props.end()) props.push_back(j.prop);
            }
            if (what == "vass") {
                write_file(dump_out, encode_lvass(p.lonly, jprops).dump());
                return kVerified;
            }
            CounterSystem cs = build_counter_system(p.full, *p.abs, props);
            write_file(dump_out, what == "dot" ? to_dot(cs) : dump_counter_system(cs));
            return kVerified;
        }
    } catch (const Error& e) {
        std::cerr << "pia-mc: " << e.stage() << ": " << e.what() << "\n";
        return kError;
    } catch (const std::exception& e) {
        std::cerr << "pia-mc: " << e.what() << "\n";
        return kError;
    }
    return kError;
}
