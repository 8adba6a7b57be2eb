#pragma once

#include <filesystem>

#include "dsg/pipeline/pipeline.hpp"

namespace dsg::pipeline {

/// Serialize a fitted predictor as predictor.json plus side-car tensor files
/// in the same directory. All numeric parameters travel through the binary
/// tensor format, so a reloaded predictor reproduces predictions bit-exactly.
void save_predictor(const std::filesystem::path& json_path, const AccuracyPredictor& p);

AccuracyPredictor load_predictor(const std::filesystem::path& json_path);

} // namespace dsg::pipeline
