#pragma once

#include "cmdp/model.hpp"

namespace cmdp {

/// Load a model specification (JSON): {"family": <id>, "params": {...}}.
/// Round-trips are bit-exact: load -> save -> load yields identical models.
ContinuousCMDP load_model(const std::string& path);
ContinuousCMDP load_model_json(const std::string& json_text);

std::string save_model_json(const ContinuousCMDP& model);
void save_model(const ContinuousCMDP& model, const std::string& path);

std::vector<std::string> builtin_families();

}  // namespace cmdp
