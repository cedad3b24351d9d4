#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wmatch/retrieval.hpp"

namespace wmatch {

struct EvalConfig {
  QueryOptions query;
  std::vector<std::size_t> ks{1, 5, 10};
};

struct QueryOutcome {
  std::string image_path;
  std::string class_id;
  /// 1-based position of the true class in the final ranking; 0 when the
  /// class is missing from the index.
  std::size_t rank = 0;
  double stage1_seconds = 0.0;
  double stage2_seconds = 0.0;
};

struct TimingSummary {
  double mean = 0.0;
  double p95 = 0.0;
};

struct EvalReport {
  std::size_t queries = 0;        // scored queries (class present in the index)
  std::size_t missing_class = 0;  // queries whose class is not indexed
  std::vector<std::pair<std::size_t, double>> accuracy;  // (K, accuracy@K)
  std::vector<double> curve;                             // accuracy@K for K = 1..#classes
  TimingSummary stage1, stage2;
  std::vector<QueryOutcome> outcomes;

  double accuracy_at(std::size_t k) const;
  nlohmann::json to_json() const;
};

/// Summary of per-query ranks. Missing-class queries are reported separately
/// and excluded from the accuracy denominators.
EvalReport summarize(std::vector<QueryOutcome> outcomes, std::size_t n_classes, const std::vector<std::size_t>& ks);

/// Runs every query-role record of `queries` through run_query and
/// summarizes. Queries are processed one at a time so stage timings are not
/// distorted; each query is internally parallel.
EvalReport evaluate(const DatasetManifest& queries, const ReferenceIndex& index, const Extractor& ex,
                    const AdapterParams* adapter, const EvalConfig& cfg);

/// Mean and 95th percentile (nearest rank).
TimingSummary summarize_timings(std::vector<double> seconds);

}  // namespace wmatch
