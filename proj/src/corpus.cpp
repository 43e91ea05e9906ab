#include "pia/corpus.hpp"

#include <algorithm>
#include <map>

#include "pia/errors.hpp"

namespace pia {

namespace {

#include "corpus_data.inc"

const std::map<std::string, std::string>& sources() {
    static const std::map<std::string, std::string> m = {
        {"byz", kByz}, {"symm", kSymm}, {"omit", kOmit}, {"clean", kClean}, {"rbc", kRbc}};
    return m;
}

}  // namespace

const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names = {"byz", "symm", "omit", "clean", "rbc"};
    return names;
}

bool is_builtin(const std::string& name) { return sources().count(name) > 0; }

const std::string& builtin_source(const std::string& name) {
    auto it = sources().find(name);
    if (it == sources().end()) throw Error("corpus", "unknown model '" + name + "'");
    return it->second;
}

Model builtin_model(const std::string& name) { return parse_model(builtin_source(name)); }

const std::string& relay_invariant_source() {
    static const std::string s = kRelay;
    return s;
}

}  // namespace pia
