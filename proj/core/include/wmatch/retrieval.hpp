#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wmatch/adapter.hpp"
#include "wmatch/baselines.hpp"
#include "wmatch/extractor.hpp"
#include "wmatch/index.hpp"

namespace wmatch {

struct RankedEntry {
  std::string class_id;
  std::uint32_t class_index = 0;
  double score = 0.0;
  int stage = 1;
  OrientationId orientation{};
  std::uint32_t entry = 0;  // winning reference entry of the class
};

struct RankedResult {
  std::vector<RankedEntry> ranking;
  std::string query_ref;
  double stage1_seconds = 0.0;
  double stage2_seconds = 0.0;
  std::size_t reranked = 0;  // length of the stage-2 prefix
};

/// Query-side features: the canonical-orientation baseline map and the
/// query-grid map, both adapted like the index.
struct QueryFeatures {
  FeatureMap baseline;
  FeatureMap query_map;
  std::string ref;
};

/// Checks that `ex` and `adapter` match what the index was built with
/// (Error(fingerprint_mismatch) otherwise) and extracts the query features.
QueryFeatures prepare_query(const Image& canonical, const Extractor& ex, const AdapterParams* adapter,
                            const ReferenceIndex& index);

/// Per class: max over its references and the 8 orientations of the global
/// similarity to the query baseline map. Sorted by descending score, ties by
/// class order.
std::vector<RankedEntry> stage1_rank(const FeatureMap& query_baseline, const ReferenceIndex& index,
                                     GlobalSimilarity sim = GlobalSimilarity::localsim);

/// Per class: max over its references of score_oriented. Candidates are
/// scored in parallel; the result is independent of scheduling.
RankedEntry score_class(const FeatureMap& query_map, const ReferenceIndex& index, std::uint32_t class_index,
                        double sigma_cells);

/// Rescores the first N stage-1 candidates (all when N is nullopt) with the
/// matching score, sorts them (ties by class order) and appends the untouched
/// stage-1 tail. Error(invalid_argument) when N == 0.
RankedResult rerank(const FeatureMap& query_map, const ReferenceIndex& index, const std::vector<RankedEntry>& stage1,
                    std::optional<std::size_t> n, double sigma_cells);

/// Matching score for every class, sorted, ties by class order.
std::vector<RankedEntry> rank_exhaustive(const FeatureMap& query_map, const ReferenceIndex& index, double sigma_cells);

struct QueryOptions {
  /// nullopt: rerank every class; 0 is rejected.
  std::optional<std::size_t> rerank_n;
  bool stage1_only = false;
  std::optional<double> sigma_cells;  // index default when unset
  GlobalSimilarity stage1 = GlobalSimilarity::localsim;
};

/// Stage 1 followed by the rerank, with wall-clock timings per stage.
RankedResult run_query(const QueryFeatures& q, const ReferenceIndex& index, const QueryOptions& opts);

nlohmann::json ranked_entry_json(const RankedEntry& e, std::size_t rank);

}  // namespace wmatch
