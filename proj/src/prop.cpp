#include "pia/prop.hpp"

namespace pia {

std::string Proposition::name() const {
    std::string s = quant == Quant::All ? "<all> " : "<some> ";
    if (is_status) return s + "sv " + rel_symbol(rel) + " " + status;
    return s + data.str();
}

}  // namespace pia
