#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gazeattn {

inline constexpr const char* kManifestVersion = "gazeattn-manifest/1";

struct ManifestSettings {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t channels = 0;  // image channels; 0 when the manifest has no images
  std::size_t classes = 0;
  std::uint64_t seed = 0;
  double beta_sq = 0.3;
  double ig_epsilon = 1e-9;

  bool operator==(const ManifestSettings&) const = default;
};

/// One image's files. Paths are stored as written (relative paths resolve
/// against the manifest's directory).
struct ManifestEntry {
  std::string id;
  std::optional<std::string> image_path;
  std::optional<std::string> saliency_map_path;
  std::map<std::string, std::string> attention_map_paths;  // baseline name -> path
  std::optional<std::string> fixation_path;
  std::optional<std::string> density_path;
  std::optional<std::string> gt_mask_path;
  std::optional<int> label;
  std::optional<std::string> split;             // "train" or "test"
  std::map<std::string, double> task_scores;    // baseline name -> task performance
  std::map<std::string, bool> correct;          // baseline name -> classified correctly

  bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
  std::string version = kManifestVersion;
  ManifestSettings settings;
  std::vector<ManifestEntry> entries;
  std::filesystem::path base_dir;  // not serialised

  std::filesystem::path resolve(const std::string& path) const;
  const ManifestEntry* find(const std::string& id) const;

  /// Unique ids, scorable entries, grid dims set. With `check_files`, every
  /// referenced file must exist. Throws ValidationError naming the entry.
  void validate(bool check_files) const;

  bool operator==(const Manifest& o) const {
    return version == o.version && settings == o.settings && entries == o.entries;
  }
};

Manifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir,
                        const std::string& source = "manifest", bool check_files = true);
Manifest load_manifest(const std::filesystem::path& path, bool check_files = true);

/// Canonical JSON; parse(serialize(m)) == m.
std::string serialize_manifest(const Manifest& manifest);
void save_manifest(const std::filesystem::path& path, const Manifest& manifest);

}  // namespace gazeattn
