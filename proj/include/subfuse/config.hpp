#pragma once

#include <string>

#include "subfuse/simulation.hpp"

namespace subfuse {

struct LoadedConfig {
    ExperimentConfig experiment;
    std::string output = "results.csv";
};

/// Parses the flat JSON experiment description. Every key is optional and
/// defaults to the standard study design; unknown keys are rejected with a
/// ConfigParseError naming the key, domain violations with ValidationError.
LoadedConfig load_experiment_config(const std::string& path);

/// Same, from an already-read JSON document (used by tests).
LoadedConfig parse_experiment_config(const std::string& text);

}  // namespace subfuse
