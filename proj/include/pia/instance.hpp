#pragma once

#include <optional>
#include <unordered_map>
#include <vector>

#include "pia/cfa.hpp"
#include "pia/checker.hpp"

namespace pia {

// N processes with identical parameters and one copy of the shared variables.
struct GlobalState {
    std::vector<int> sv;
    std::vector<std::vector<Int>> locals;
    std::vector<Int> shared;

    [[nodiscard]] std::size_t processes() const { return sv.size(); }
    [[nodiscard]] ProcessState process(std::size_t i) const { return {sv[i], locals[i], shared}; }
    friend auto operator<=>(const GlobalState&, const GlobalState&) = default;
};

struct VectorHash {
    std::size_t operator()(const std::vector<Int>& v) const noexcept;
};

struct ConcreteInstance {
    Cfa cfa;
    Valuation params;
    Int cap = 0;
    std::size_t n = 0;
    std::vector<std::vector<Int>> codes;  // flat encoding per state
    std::unordered_map<std::vector<Int>, StateId, VectorHash> index;
    Kripke ks;
    std::vector<Proposition> props;

    [[nodiscard]] GlobalState state(StateId s) const;
    [[nodiscard]] std::vector<Int> encode(const GlobalState& g) const;
    [[nodiscard]] std::optional<StateId> find(const GlobalState& g) const;
    [[nodiscard]] std::size_t size() const { return codes.size(); }
};

struct InstanceOptions {
    std::optional<Int> cap;  // default_cap when absent
    std::size_t budget = 2'000'000;
};

// Explicit Inst(p) with interleaving semantics, labeled with the given propositions.
[[nodiscard]] ConcreteInstance build_concrete_instance(const Cfa& cfa, const Valuation& p,
                                                       const std::vector<Proposition>& props,
                                                       const InstanceOptions& opts = {});

[[nodiscard]] bool label_concrete(const Proposition& prop, const Cfa& cfa, const Valuation& p, const GlobalState& g);

}  // namespace pia
