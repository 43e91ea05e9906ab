#include "pia/linear.hpp"

#include <set>
#include <stdexcept>

namespace pia {

const char* rel_symbol(Rel r) {
    switch (r) {
        case Rel::Eq: return "==";
        case Rel::Ne: return "!=";
        case Rel::Lt: return "<";
        case Rel::Le: return "<=";
        case Rel::Gt: return ">";
        case Rel::Ge: return ">=";
    }
    return "?";
}

Rel flip(Rel r) {
    switch (r) {
        case Rel::Lt: return Rel::Gt;
        case Rel::Le: return Rel::Ge;
        case Rel::Gt: return Rel::Lt;
        case Rel::Ge: return Rel::Le;
        default: return r;
    }
}

Rel negate(Rel r) {
    switch (r) {
        case Rel::Eq: return Rel::Ne;
        case Rel::Ne: return Rel::Eq;
        case Rel::Lt: return Rel::Ge;
        case Rel::Le: return Rel::Gt;
        case Rel::Gt: return Rel::Le;
        case Rel::Ge: return Rel::Lt;
    }
    return r;
}

bool holds(Int a, Rel r, Int b) {
    switch (r) {
        case Rel::Eq: return a == b;
        case Rel::Ne: return a != b;
        case Rel::Lt: return a < b;
        case Rel::Le: return a <= b;
        case Rel::Gt: return a > b;
        case Rel::Ge: return a >= b;
    }
    return false;
}

LinearExpr LinearExpr::var(const std::string& name, Int coeff) {
    LinearExpr e;
    if (coeff != 0) e.coeffs_[name] = coeff;
    return e;
}

Int LinearExpr::coeff(const std::string& name) const {
    auto it = coeffs_.find(name);
    return it == coeffs_.end() ? 0 : it->second;
}

std::vector<std::string> LinearExpr::vars() const {
    std::vector<std::string> out;
    for (const auto& [k, c] : coeffs_) out.push_back(k);
    return out;
}

void LinearExpr::normalize() {
    for (auto it = coeffs_.begin(); it != coeffs_.end();) {
        if (it->second == 0) it = coeffs_.erase(it);
        else ++it;
    }
}

LinearExpr& LinearExpr::operator+=(const LinearExpr& o) {
    for (const auto& [k, c] : o.coeffs_) coeffs_[k] += c;
    constant_ += o.constant_;
    normalize();
    return *this;
}

LinearExpr& LinearExpr::operator-=(const LinearExpr& o) {
    for (const auto& [k, c] : o.coeffs_) coeffs_[k] -= c;
    constant_ -= o.constant_;
    normalize();
    return *this;
}

LinearExpr& LinearExpr::operator*=(Int k) {
    for (auto& [v, c] : coeffs_) c *= k;
    constant_ *= k;
    normalize();
    return *this;
}

Int LinearExpr::eval(const Valuation& v) const {
    Int s = constant_;
    for (const auto& [k, c] : coeffs_) {
        auto it = v.find(k);
        if (it == v.end()) throw std::out_of_range("no value for variable '" + k + "'");
        s += c * it->second;
    }
    return s;
}

LinearExpr LinearExpr::rename(const std::map<std::string, std::string>& m) const {
    LinearExpr out(constant_);
    for (const auto& [k, c] : coeffs_) {
        auto it = m.find(k);
        out += var(it == m.end() ? k : it->second, c);
    }
    return out;
}

std::string LinearExpr::str() const {
    std::string s;
    for (const auto& [k, c] : coeffs_) {
        if (s.empty()) {
            if (c == -1) s += "-";
            else if (c != 1) s += std::to_string(c) + "*";
        } else {
            s += c < 0 ? " - " : " + ";
            Int a = c < 0 ? -c : c;
            if (a != 1) s += std::to_string(a) + "*";
        }
        s += k;
    }
    if (s.empty()) return std::to_string(constant_);
    if (constant_ > 0) s += " + " + std::to_string(constant_);
    if (constant_ < 0) s += " - " + std::to_string(-constant_);
    return s;
}

std::string LinearAtom::str() const {
    return lhs.str() + " " + rel_symbol(rel) + " " + rhs.str();
}

bool LinearPredicate::eval(const Valuation& v) const {
    for (const auto& a : atoms)
        if (!a.eval(v)) return false;
    return true;
}

std::vector<std::string> LinearPredicate::vars() const {
    std::set<std::string> s;
    for (const auto& a : atoms) {
        for (const auto& [k, c] : a.lhs.coeffs()) s.insert(k);
        for (const auto& [k, c] : a.rhs.coeffs()) s.insert(k);
    }
    return {s.begin(), s.end()};
}

std::string LinearPredicate::str() const {
    if (atoms.empty()) return "true";
    std::string s;
    for (const auto& a : atoms) {
        if (!s.empty()) s += " && ";
        s += a.str();
    }
    return s;
}

}  // namespace pia
