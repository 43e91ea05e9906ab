#pragma once

#include <compare>
#include <optional>
#include <string>
#include <vector>

#include "pia/cfa.hpp"
#include "pia/errors.hpp"
#include "pia/smt.hpp"

namespace pia {

struct AbstractValue {
    int index = 0;
    friend auto operator<=>(const AbstractValue&, const AbstractValue&) = default;
    [[nodiscard]] std::string str() const { return "I" + std::to_string(index); }
};

// Half-open integer interval [lo, hi); hi absent means unbounded.
struct Interval {
    Int lo = 0;
    std::optional<Int> hi;
    [[nodiscard]] bool contains(Int a) const { return a >= lo && (!hi || a < *hi); }
    friend bool operator==(const Interval&, const Interval&) = default;
};

class ThresholdSet {
public:
    ThresholdSet() : thresholds_{LinearExpr(0), LinearExpr(1)} {}
    explicit ThresholdSet(std::vector<LinearExpr> sorted);

    [[nodiscard]] const std::vector<LinearExpr>& thresholds() const { return thresholds_; }
    [[nodiscard]] int mu() const { return static_cast<int>(thresholds_.size()) - 1; }
    [[nodiscard]] int size() const { return static_cast<int>(thresholds_.size()); }
    [[nodiscard]] const LinearExpr& operator[](int j) const { return thresholds_.at(j); }
    // Index of a threshold expression or of an alias, or -1.
    [[nodiscard]] int find(const LinearExpr& e) const;
    // e denotes the same value as threshold j under the resilience condition.
    void alias(const LinearExpr& e, int j);
    [[nodiscard]] const std::vector<std::pair<LinearExpr, int>>& aliases() const { return aliases_; }
    [[nodiscard]] std::string str() const;
    friend bool operator==(const ThresholdSet&, const ThresholdSet&) = default;

private:
    std::vector<LinearExpr> thresholds_;
    std::vector<std::pair<LinearExpr, int>> aliases_;
};

// {0, 1} and the bounds of all threshold guards, syntactically deduplicated.
[[nodiscard]] std::vector<LinearExpr> collect_thresholds(const Cfa& cfa);

// RC together with non-negativity of every parameter.
[[nodiscard]] smt::Term resilience_term(const ParamSpace& ps);

struct OrderResult {
    enum class Kind { Ordered, CounterexampleParams, OrderSplit } kind = Kind::Ordered;
    ThresholdSet ordered;
    Valuation witness;  // parameters at which no single strict order holds
    struct Split {
        ParamSpace space;
        ThresholdSet thresholds;
    };
    std::vector<Split> splits;
};

// Decides whether the candidates are strictly ordered under RC. Expressions
// proven equal under RC are merged. Otherwise a witness and, if allowed, the
// consistent weak orders as refined parameter spaces.
[[nodiscard]] OrderResult check_uniform_order(const std::vector<LinearExpr>& candidates, const ParamSpace& ps,
                                              smt::Solver& solver, bool allow_split = true);

class OrderError : public Error {
public:
    explicit OrderError(OrderResult r);
    [[nodiscard]] const OrderResult& result() const { return result_; }

private:
    OrderResult result_;
};

// RC && N(p) > k satisfiable for every sampled k.
[[nodiscard]] bool sizes_unbounded(const ParamSpace& ps, smt::Solver& solver, const std::vector<Int>& ks = {10, 100, 1000});

[[nodiscard]] ThresholdSet extract_threshold_set(const Cfa& cfa, smt::Solver& solver);

[[nodiscard]] AbstractValue abstract_value(const ThresholdSet& ts, const Valuation& p, Int a);
[[nodiscard]] Interval concretize(const ThresholdSet& ts, const Valuation& p, AbstractValue v);
// in(y, I_a) with parameters free.
[[nodiscard]] smt::Term interval_term(const ThresholdSet& ts, const smt::Term& y, AbstractValue v);
[[nodiscard]] LinearPredicate interval_formula(const ThresholdSet& ts, const std::string& y, AbstractValue v);

}  // namespace pia
