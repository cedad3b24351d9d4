#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "wmatch/adapter.hpp"
#include "wmatch/extractor.hpp"
#include "wmatch/manifest.hpp"
#include "wmatch/match.hpp"

namespace wmatch {

struct IndexConfig {
  ScaleSet scales;
  double sigma_cells = kDefaultSigmaCells;
  PreprocessConfig preprocess;
  std::uint32_t baseline_resize = 256;
  std::uint32_t baseline_crop = 224;
  /// Only reference records of this domain are indexed when set.
  std::optional<Domain> domain;

  void validate() const;
};

struct ReferenceEntry {
  std::string class_id;
  std::string image_path;
  Domain domain = Domain::drawing;
  std::vector<FeaturePyramid> pyramids;  // indexed by orientation id
  std::vector<FeatureMap> baseline;      // indexed by orientation id
};

struct BuildReport {
  std::size_t indexed = 0;
  std::vector<std::string> skipped;  // "path: reason"
};

/// Adapted reference features for every reference record of a manifest.
/// Immutable once built; safe to share between concurrent queries.
class ReferenceIndex {
 public:
  std::string fingerprint;
  std::string adapter_id = "none";
  IndexConfig config;
  std::vector<ReferenceEntry> entries;

  /// Extracts 8 oriented pyramids and 8 oriented baseline maps per reference
  /// record, applying `adapter` when given. Unreadable images are skipped and
  /// listed in `report`; extractor shape errors abort.
  static ReferenceIndex build(const DatasetManifest& manifest, const Extractor& ex, const AdapterParams* adapter,
                              const IndexConfig& cfg, BuildReport* report = nullptr);

  /// Classes in order of first appearance; the tie-break order of rankings.
  const std::vector<std::string>& classes() const { return classes_; }
  std::optional<std::uint32_t> class_index(const std::string& class_id) const;
  /// Entry indices per class index.
  const std::vector<std::vector<std::uint32_t>>& class_entries() const { return class_entries_; }

  /// RIDX layout: "RIDX", u32 version, length-prefixed JSON header (config,
  /// fingerprint, adapter id, entry metadata), then per entry the 8 pyramids
  /// (u32 map count + FMAP records each) and the 8 baseline FMAP records.
  void write(std::ostream& out) const;
  static ReferenceIndex read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static ReferenceIndex load(const std::filesystem::path& path);

  /// Recomputes the class tables after entries change.
  void finalize();

 private:
  std::vector<std::string> classes_;
  std::vector<std::vector<std::uint32_t>> class_entries_;
  std::unordered_map<std::string, std::uint32_t> class_lookup_;
};

inline constexpr std::uint32_t kRidxVersion = 1;

}  // namespace wmatch
