#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pia/ltl.hpp"

namespace pia {

using StateId = std::uint32_t;

// Explicit finite structure. labels[ap][s] is the truth of ap in state s.
struct Kripke {
    std::vector<StateId> initial;
    std::vector<std::vector<StateId>> succ;
    std::map<std::string, std::vector<bool>> labels;

    [[nodiscard]] std::size_t size() const { return succ.size(); }
    [[nodiscard]] bool label(const std::string& ap, StateId s) const;
};

// A set of states that a fair path must visit infinitely often.
struct FairSet {
    std::string name;
    std::vector<bool> members;
};

struct Lasso {
    std::vector<StateId> prefix;
    std::vector<StateId> loop;

    [[nodiscard]] std::size_t length() const { return prefix.size() + loop.size(); }
    [[nodiscard]] StateId at(std::size_t i) const { return i < prefix.size() ? prefix[i] : loop[i - prefix.size()]; }
    [[nodiscard]] std::size_t next(std::size_t i) const { return i + 1 < length() ? i + 1 : prefix.size(); }
    friend bool operator==(const Lasso&, const Lasso&) = default;
};

struct CheckOptions {
    std::size_t max_product_states = 20'000'000;
    // Treat states without successors as stuttering. When off, such states
    // end every path through them.
    bool stutter_deadlocks = true;
};

struct CheckResult {
    bool holds = true;
    std::optional<Lasso> counterexample;
    std::size_t product_states = 0;
    std::size_t product_edges = 0;
};

// Searches for a path of ks that satisfies !phi and visits every fair set
// infinitely often. Deadlock states are treated as having a self-loop.
[[nodiscard]] CheckResult check_fair(const Kripke& ks, const Ltl& phi, const std::vector<FairSet>& fairness,
                                     const CheckOptions& opts = {});

// Checks that a lasso is a path of ks (with deadlock stutter).
[[nodiscard]] bool lasso_is_path(const Kripke& ks, const Lasso& l);
[[nodiscard]] std::vector<std::set<std::string>> lasso_word(const Kripke& ks, const Lasso& l);

}  // namespace pia
