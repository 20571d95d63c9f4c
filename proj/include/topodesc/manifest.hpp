#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "topodesc/features.hpp"

namespace topodesc {

/// One line of a dataset manifest CSV: id,depth_path,mask_path,split.
/// Relative paths resolve against the manifest's directory; mask_path may be empty.
struct ManifestEntry {
  std::string id;
  std::filesystem::path depth_path;
  std::optional<std::filesystem::path> mask_path;
  std::string split = "train";  // "train" or "eval"
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path);

std::vector<LabeledMap> load_maps(const std::vector<ManifestEntry>& entries);
std::vector<std::string> ids_with_split(const std::vector<ManifestEntry>& entries, const std::string& split);

}  // namespace topodesc
