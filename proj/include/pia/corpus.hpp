#pragma once

#include <string>
#include <vector>

#include "pia/dsl.hpp"

namespace pia {

[[nodiscard]] const std::vector<std::string>& builtin_names();
[[nodiscard]] bool is_builtin(const std::string& name);
// DSL source of a case study; throws Error for unknown names.
[[nodiscard]] const std::string& builtin_source(const std::string& name);
[[nodiscard]] Model builtin_model(const std::string& name);
// Relay invariant candidate shipped with the corpus.
[[nodiscard]] const std::string& relay_invariant_source();

}  // namespace pia
