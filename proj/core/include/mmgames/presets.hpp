#pragma once

#include <string>
#include <vector>

#include "mmgames/config.hpp"

namespace mmg {

// Shipped experiment presets, embedded so the CLI works without any data
// files. The same texts live under configs/ for editing; a test keeps the
// two copies identical.
std::vector<std::string> PresetNames();

// raw config text; throws ConfigError for an unknown name
const std::string& PresetText(const std::string& name);

// parsed and validated preset
ExperimentConfig PresetConfig(const std::string& name);

}  // namespace mmg
