#pragma once

#include <string>

#include "tsvc/model.hpp"

namespace tsvc {

// JSON serialization of a fitted model, format "tsvc-model/1".  The document
// carries everything fit_tsvc produced: family, schema, trees with leaf
// coefficients, linear terms, exclusions, the split/screen history and the
// configuration echo, so save -> load -> save is byte identical.
std::string model_to_json(const TsvcModel& model);
TsvcModel model_from_json(const std::string& text);

void save_model(const TsvcModel& model, const std::string& path);
TsvcModel load_model(const std::string& path);

}  // namespace tsvc
