#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "support.hpp"

using namespace pia;
using support::p3;

namespace {

std::vector<std::string> strs(const ThresholdSet& ts) {
    std::vector<std::string> out;
    for (const auto& t : ts.thresholds()) out.push_back(t.str());
    return out;
}

ParamSpace byz_space() { return builtin_model("byz").cfa.space; }

// Random admissible byz parameters.
Valuation sample_rc(std::mt19937& rng, const ParamSpace& ps) {
    std::uniform_int_distribution<Int> t_d(1, 40);
    for (;;) {
        Int t = t_d(rng);
        Int f = std::uniform_int_distribution<Int>(0, t)(rng);
        Int n = 3 * t + 1 + std::uniform_int_distribution<Int>(0, 60)(rng);
        Valuation p = p3(n, t, f);
        if (ps.admits(p)) return p;
    }
}

}  // namespace

TEST_SUITE("pia_domain") {

TEST_CASE("byz thresholds are 0, 1, t+1, n-t") {
    ThresholdSet ts = extract_threshold_set(builtin_model("byz").cfa, support::solver());
    CHECK(strs(ts) == std::vector<std::string>{"0", "1", "t + 1", "n - t"});
    CHECK(ts.mu() == 3);
}

TEST_CASE("no threshold guards gives 0, 1") {
    Model m = parse_model(R"(skeleton s { parameters n; resilience n >= 1; size n; sv {A} init {A};
        locations qI init, qF final; edge qI -> qF when sv == A; })");
    CHECK(strs(extract_threshold_set(m.cfa, support::solver())) == std::vector<std::string>{"0", "1"});
}

TEST_CASE("clean thresholds are 0, 1, n-t") {
    CHECK(strs(extract_threshold_set(builtin_model("clean").cfa, support::solver())) ==
          std::vector<std::string>{"0", "1", "n - t"});
}

TEST_CASE("uniform order of byz thresholds") {
    const auto cands = collect_thresholds(builtin_model("byz").cfa);
    ParamSpace ps = byz_space();
    OrderResult r = check_uniform_order(cands, ps, support::solver());
    CHECK(r.kind == OrderResult::Kind::Ordered);

    ps.resilience = parse_linear_predicate("n > t", ps.params);
    OrderResult weak = check_uniform_order(cands, ps, support::solver(), false);
    REQUIRE(weak.kind == OrderResult::Kind::CounterexampleParams);
    // At the witness some pair of thresholds is out of order or equal.
    const Valuation& w = weak.witness;
    CHECK(ps.admits(w));
    CHECK(LinearExpr::var("t").eval(w) + 1 >= (LinearExpr::var("n") - LinearExpr::var("t")).eval(w));

    OrderResult split = check_uniform_order(cands, ps, support::solver(), true);
    REQUIRE(split.kind == OrderResult::Kind::OrderSplit);
    CHECK(split.splits.size() >= 2);
    for (const auto& s : split.splits) {
        // Every split is strictly ordered under its refined condition.
        OrderResult again = check_uniform_order(s.thresholds.thresholds(), s.space, support::solver(), false);
        CHECK(again.kind == OrderResult::Kind::Ordered);
        // Merged thresholds stay addressable.
        for (const auto& c : cands) CHECK(s.thresholds.find(c) >= 0);
    }
}

TEST_CASE("0 and 1 alone are ordered") {
    OrderResult r = check_uniform_order({}, byz_space(), support::solver());
    CHECK(r.kind == OrderResult::Kind::Ordered);
    CHECK(r.ordered.size() == 2);
}

TEST_CASE("thresholds equal under RC are merged") {
    ParamSpace ps = byz_space();
    ps.resilience = parse_linear_predicate("n == 2t + 1 && t >= f && t >= 1", ps.params);
    const std::vector<LinearExpr> cands{LinearExpr::var("t") + LinearExpr(1), LinearExpr::var("n") - LinearExpr::var("t")};
    OrderResult r = check_uniform_order(cands, ps, support::solver());
    REQUIRE(r.kind == OrderResult::Kind::Ordered);
    CHECK(r.ordered.size() == 3);
    CHECK(r.ordered.find(cands[0]) == 2);
    CHECK(r.ordered.find(cands[1]) == 2);
}

TEST_CASE("alpha at (4,1,1)") {
    ThresholdSet ts = extract_threshold_set(builtin_model("byz").cfa, support::solver());
    const auto p = p3(4, 1, 1);
    CHECK(abstract_value(ts, p, 0).index == 0);
    CHECK(abstract_value(ts, p, 1).index == 1);
    CHECK(abstract_value(ts, p, 2).index == 2);
    CHECK(abstract_value(ts, p, 5).index == 3);
}

TEST_CASE("gamma at (4,1,1)") {
    ThresholdSet ts = extract_threshold_set(builtin_model("byz").cfa, support::solver());
    const auto p = p3(4, 1, 1);
    CHECK(concretize(ts, p, {2}) == Interval{2, 3});
    CHECK(concretize(ts, p, {3}) == Interval{3, std::nullopt});
    std::mt19937 rng(3);
    for (int k = 0; k < 50; ++k) CHECK(concretize(ts, sample_rc(rng, byz_space()), {0}) == Interval{0, 1});
}

TEST_CASE("interval formulas") {
    ThresholdSet ts = extract_threshold_set(builtin_model("byz").cfa, support::solver());
    CHECK(interval_formula(ts, "y", {1}).str() == "1 <= y && y < t + 1");
    CHECK(interval_formula(ts, "y", {3}).str() == "n - t <= y");
    CHECK(interval_formula(ts, "y", {0}).str() == "0 <= y && y < 1");
}

TEST_CASE("precision: theta_j(p) <= a iff I_j <= alpha_p(a)") {
    ThresholdSet ts = extract_threshold_set(builtin_model("byz").cfa, support::solver());
    std::mt19937 rng(11);
    int failures = 0;
    for (int k = 0; k < 1000; ++k) {
        Valuation p = sample_rc(rng, byz_space());
        const Int a = std::uniform_int_distribution<Int>(0, p.at("n") + 5)(rng);
        const int j = std::uniform_int_distribution<int>(0, ts.mu())(rng);
        const int av = abstract_value(ts, p, a).index;
        const Int th = ts[j].eval(p);
        if ((th <= a) != (j <= av)) ++failures;
        if ((th > a) != (j > av)) ++failures;
    }
    CHECK(failures == 0);
}

TEST_CASE("soundness: a lies in gamma_p(alpha_p(a))") {
    ThresholdSet ts = extract_threshold_set(builtin_model("byz").cfa, support::solver());
    std::mt19937 rng(12);
    for (int k = 0; k < 1000; ++k) {
        Valuation p = sample_rc(rng, byz_space());
        const Int a = std::uniform_int_distribution<Int>(0, 3 * p.at("n"))(rng);
        const AbstractValue v = abstract_value(ts, p, a);
        CHECK(concretize(ts, p, v).contains(a));
        CHECK(v.index == oracle::alpha(ts, p, a));
    }
}

TEST_CASE("intervals partition the naturals and alpha is monotone") {
    ThresholdSet ts = extract_threshold_set(builtin_model("byz").cfa, support::solver());
    std::mt19937 rng(13);
    for (int k = 0; k < 100; ++k) {
        Valuation p = sample_rc(rng, byz_space());
        Int expect_lo = 0;
        for (int j = 0; j <= ts.mu(); ++j) {
            Interval iv = concretize(ts, p, {j});
            CHECK(iv.lo == expect_lo);
            if (j < ts.mu()) {
                REQUIRE(iv.hi);
                CHECK(*iv.hi > iv.lo);
                expect_lo = *iv.hi;
            } else {
                CHECK_FALSE(iv.hi);
            }
        }
        int prev = 0;
        for (Int a = 0; a <= p.at("n") + 3; ++a) {
            int count = 0;
            for (int j = 0; j <= ts.mu(); ++j) count += concretize(ts, p, {j}).contains(a) ? 1 : 0;
            CHECK(count == 1);
            const int v = abstract_value(ts, p, a).index;
            CHECK(v >= prev);
            prev = v;
        }
    }
}

}
