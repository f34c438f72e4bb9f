#pragma once

#include <string>

#include "tsvc/model.hpp"

namespace tsvc {

// Graphviz rendering of one coefficient tree: interior nodes show the
// modifier, edges carry "modifier <= c" / "modifier > c", and each leaf shows
// its coefficient to three decimals.
std::string tree_to_dot(const TsvcModel& model, int predictor);

}  // namespace tsvc
