#pragma once

// Experiment configuration files: INI-style key/value text with sections
// [layout], [intra], [noise], [scenarios], [methods] and [run]. The full
// schema is documented in docs/config.md; configs/study.ini reproduces
// default_experiment().

#include <filesystem>
#include <string>

#include "aggcorr/harness.hpp"

namespace aggcorr {

/// Missing keys keep their default_experiment() values. Throws
/// std::invalid_argument naming the offending key.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace aggcorr
