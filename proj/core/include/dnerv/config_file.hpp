#pragma once

#include <string>

#include "dnerv/model.hpp"
#include "dnerv/train.hpp"

namespace dnerv {

// Flat key=value run configuration. Keys mirror ModelConfig and TrainConfig
// field names; '#' starts a comment; a 'preset = <name>' line seeds the model
// config before the remaining keys override it. Unknown keys are hard errors.
struct RunConfig {
    ModelConfig model;
    TrainConfig train;
};

RunConfig parse_config_text(const std::string& text, const std::string& origin);
RunConfig parse_config_file(const std::string& path);

// Model-only parser for embedded canonical config blocks (checkpoints).
ModelConfig parse_model_config_text(const std::string& text, const std::string& origin);

}  // namespace dnerv
