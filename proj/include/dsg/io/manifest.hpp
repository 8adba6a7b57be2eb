#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dsg/core/dataset.hpp"

namespace dsg::io {

/// One manifest entry: where a dataset's tensors live and how it is grouped.
struct ManifestEntry {
    std::string name;
    std::string group;
    std::optional<std::string> features_path;
    std::string probabilities_path;
    std::optional<std::string> labels_path;
    std::vector<ClassId> class_ids;
};

struct LoadedDataset {
    Dataset dataset;
    std::string group;
};

/// Parse a manifest without touching the referenced tensors.
std::vector<ManifestEntry> parse_manifest(const std::filesystem::path& path);

/// Load every dataset in a manifest. Relative tensor paths resolve against
/// the manifest's directory; all Dataset invariants are validated.
std::vector<LoadedDataset> load_manifest(const std::filesystem::path& path);

/// Serialize entries to manifest JSON (stable key order, trailing newline).
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

} // namespace dsg::io
