#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wmatch/image.hpp"
#include "wmatch/preprocess.hpp"

namespace wmatch {

enum class Domain { drawing, synthetic, photograph };
enum class Split { train, val, test };
enum class Role { reference, query };

const char* to_string(Domain d);
const char* to_string(Split s);
const char* to_string(Role r);
Domain parse_domain(std::string_view s);
Split parse_split(std::string_view s);
Role parse_role(std::string_view s);

struct ManifestRecord {
  std::string image_path;  // relative paths resolve against the manifest dir
  std::string class_id;
  Domain domain = Domain::drawing;
  Split split = Split::test;
  Role role = Role::reference;
  std::optional<Rect> guide_rect;

  friend bool operator==(const ManifestRecord& a, const ManifestRecord& b);
};

/// JSON Lines, one object per record:
/// {"image_path", "class_id", "domain", "split", "role", "guide_rect": [x, y, w, h]}
/// guide_rect is optional; blank lines are ignored.
struct DatasetManifest {
  std::vector<ManifestRecord> records;
  std::filesystem::path base_dir;

  static DatasetManifest load(const std::filesystem::path& path);
  static DatasetManifest parse(std::string_view text, std::filesystem::path base_dir = {});
  std::string to_jsonl() const;
  void save(const std::filesystem::path& path) const;

  /// Throws Error(format) on duplicate paths or empty fields.
  void validate() const;
  std::filesystem::path resolve(const ManifestRecord& r) const;
  /// Records with the given role, in file order.
  std::vector<ManifestRecord> with_role(Role role) const;
};

/// Decodes the record's image and brings it to the canonical square.
Image load_canonical(const DatasetManifest& manifest, const ManifestRecord& record, const PreprocessConfig& cfg = {});

}  // namespace wmatch
