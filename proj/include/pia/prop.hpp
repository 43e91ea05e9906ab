#pragma once

#include <string>

#include "pia/linear.hpp"

namespace pia {

enum class Quant { All, Some };

// [forall i. phi] or [exists i. phi] over one process. phi is either a status
// test on sv or a linear comparison over unprimed data variables and parameters.
struct Proposition {
    Quant quant = Quant::All;
    bool is_status = true;
    Rel rel = Rel::Eq;       // Eq/Ne for status tests
    std::string status;      // status value, when is_status
    LinearAtom data;         // when !is_status

    [[nodiscard]] std::string name() const;
    friend bool operator==(const Proposition&, const Proposition&) = default;
};

}  // namespace pia
