#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pia {

using Int = std::int64_t;
using Valuation = std::map<std::string, Int>;

enum class Rel { Eq, Ne, Lt, Le, Gt, Ge };

[[nodiscard]] const char* rel_symbol(Rel r);
[[nodiscard]] Rel flip(Rel r);     // a r b  <=>  b flip(r) a
[[nodiscard]] Rel negate(Rel r);   // !(a r b) <=> a negate(r) b
[[nodiscard]] bool holds(Int lhs, Rel r, Int rhs);

// Integer linear expression sum(coeff * var) + constant.
class LinearExpr {
public:
    LinearExpr() = default;
    explicit LinearExpr(Int c) : constant_(c) {}
    static LinearExpr var(const std::string& name, Int coeff = 1);

    [[nodiscard]] const std::map<std::string, Int>& coeffs() const { return coeffs_; }
    [[nodiscard]] Int constant() const { return constant_; }
    [[nodiscard]] Int coeff(const std::string& name) const;
    [[nodiscard]] bool is_constant() const { return coeffs_.empty(); }
    [[nodiscard]] std::vector<std::string> vars() const;

    LinearExpr& operator+=(const LinearExpr& o);
    LinearExpr& operator-=(const LinearExpr& o);
    LinearExpr& operator*=(Int k);
    friend LinearExpr operator+(LinearExpr a, const LinearExpr& b) { return a += b; }
    friend LinearExpr operator-(LinearExpr a, const LinearExpr& b) { return a -= b; }
    friend LinearExpr operator*(LinearExpr a, Int k) { return a *= k; }
    friend LinearExpr operator-(LinearExpr a) { return a *= -1; }
    friend bool operator==(const LinearExpr&, const LinearExpr&) = default;
    friend auto operator<=>(const LinearExpr&, const LinearExpr&) = default;

    // Drops the variables for which keep() is false and returns the dropped part.
    template <class Pred>
    LinearExpr split_off(Pred keep) {
        LinearExpr out;
        for (auto it = coeffs_.begin(); it != coeffs_.end();) {
            if (!keep(it->first)) {
                out.coeffs_[it->first] = it->second;
                it = coeffs_.erase(it);
            } else {
                ++it;
            }
        }
        return out;
    }

    // Throws std::out_of_range when a variable is missing from v.
    [[nodiscard]] Int eval(const Valuation& v) const;
    [[nodiscard]] LinearExpr rename(const std::map<std::string, std::string>& m) const;
    [[nodiscard]] std::string str() const;

private:
    void normalize();
    std::map<std::string, Int> coeffs_;
    Int constant_ = 0;
};

struct LinearAtom {
    LinearExpr lhs;
    Rel rel = Rel::Le;
    LinearExpr rhs;

    [[nodiscard]] bool eval(const Valuation& v) const { return holds(lhs.eval(v), rel, rhs.eval(v)); }
    [[nodiscard]] std::string str() const;
    friend bool operator==(const LinearAtom&, const LinearAtom&) = default;
};

// Conjunction of linear atoms. The empty conjunction is true.
struct LinearPredicate {
    std::vector<LinearAtom> atoms;

    [[nodiscard]] bool eval(const Valuation& v) const;
    [[nodiscard]] std::vector<std::string> vars() const;
    [[nodiscard]] std::string str() const;
    friend bool operator==(const LinearPredicate&, const LinearPredicate&) = default;
};

}  // namespace pia
