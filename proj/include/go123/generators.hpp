#pragma once

// Model text generators for families whose size parameter is the number of
// modules, which the modeling language cannot express directly.

#include <cstdint>
#include <string>

#include "go123/model.hpp"

namespace go123 {

// Dining philosophers in a ring with randomized first-fork choice. Goal: some
// philosopher eats. Module i owns variable p<i> and labels phil_<i>_line_<j>.
std::string philosophers_model(std::int64_t n);

// Text of generator `name` (e.g. "philosophers") at the given valuation.
std::string builtin_model(const std::string& name, const ParamValuation& v);

}  // namespace go123
