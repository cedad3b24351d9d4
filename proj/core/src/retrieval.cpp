#include "wmatch/retrieval.hpp"

#include <tbb/parallel_for.h>

#include <algorithm>
#include <chrono>

#include "wmatch/errors.hpp"

namespace wmatch {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Descending score, then class order.
void sort_ranking(std::vector<RankedEntry>& v) {
  std::sort(v.begin(), v.end(), [](const RankedEntry& a, const RankedEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.class_index < b.class_index;
  });
}

}  // namespace

QueryFeatures prepare_query(const Image& canonical, const Extractor& ex, const AdapterParams* adapter,
                            const ReferenceIndex& index) {
  require(ex.fingerprint() == index.fingerprint, ErrorCode::fingerprint_mismatch,
          "extractor '" + ex.fingerprint() + "' does not match index extractor '" + index.fingerprint + "'");
  const std::string adapter_id = adapter ? adapter->id() : "none";
  require(adapter_id == index.adapter_id, ErrorCode::fingerprint_mismatch,
          "adapter '" + adapter_id + "' does not match index adapter '" + index.adapter_id + "'");
  const IndexConfig& cfg = index.config;
  QueryFeatures q;
  q.ref = canonical.provenance;
  q.baseline = extract_baseline_map(canonical, ex, OrientationId{}, cfg.baseline_resize, cfg.baseline_crop);
  q.query_map = extract_query_map(canonical, ex, cfg.scales);
  if (adapter) {
    q.baseline = apply_adapter(q.baseline, *adapter);
    q.query_map = apply_adapter(q.query_map, *adapter);
  }
  return q;
}

std::vector<RankedEntry> stage1_rank(const FeatureMap& query_baseline, const ReferenceIndex& index,
                                     GlobalSimilarity sim) {
  const auto& classes = index.classes();
  std::vector<RankedEntry> out(classes.size());
  tbb::parallel_for(std::size_t{0}, classes.size(), [&](std::size_t c) {
    RankedEntry best;
    best.class_id = classes[c];
    best.class_index = static_cast<std::uint32_t>(c);
    bool have = false;
    for (std::uint32_t e : index.class_entries()[c]) {
      for (std::uint32_t o = 0; o < OrientationId::kCount; ++o) {
        const double s = global_similarity(sim, query_baseline, index.entries[e].baseline[o]);
        if (!have || s > best.score) {
          best.score = s;
          best.orientation = OrientationId(o);
          best.entry = e;
          have = true;
        }
      }
    }
    out[c] = best;
  });
  sort_ranking(out);
  return out;
}

RankedEntry score_class(const FeatureMap& query_map, const ReferenceIndex& index, std::uint32_t class_index,
                        double sigma_cells) {
  RankedEntry best;
  best.class_id = index.classes().at(class_index);
  best.class_index = class_index;
  best.stage = 2;
  bool have = false;
  for (std::uint32_t e : index.class_entries()[class_index]) {
    const ScoreBreakdown s = score_oriented(query_map, index.entries[e].pyramids, sigma_cells);
    if (!have || s.total > best.score) {
      best.score = s.total;
      best.orientation = s.orientation;
      best.entry = e;
      have = true;
    }
  }
  return best;
}

RankedResult rerank(const FeatureMap& query_map, const ReferenceIndex& index, const std::vector<RankedEntry>& stage1,
                    std::optional<std::size_t> n, double sigma_cells) {
  require(!n || *n > 0, ErrorCode::invalid_argument, "rerank N must be positive");
  const std::size_t top = std::min(n.value_or(stage1.size()), stage1.size());
  RankedResult result;
  std::vector<RankedEntry> head(top);
  tbb::parallel_for(std::size_t{0}, top, [&](std::size_t i) {
    head[i] = score_class(query_map, index, stage1[i].class_index, sigma_cells);
  });
  sort_ranking(head);
  result.ranking = std::move(head);
  result.ranking.insert(result.ranking.end(), stage1.begin() + static_cast<std::ptrdiff_t>(top), stage1.end());
  result.reranked = top;
  return result;
}

std::vector<RankedEntry> rank_exhaustive(const FeatureMap& query_map, const ReferenceIndex& index,
                                         double sigma_cells) {
  const std::size_t n = index.classes().size();
  std::vector<RankedEntry> out(n);
  tbb::parallel_for(std::size_t{0}, n, [&](std::size_t c) {
    out[c] = score_class(query_map, index, static_cast<std::uint32_t>(c), sigma_cells);
  });
  sort_ranking(out);
  return out;
}

RankedResult run_query(const QueryFeatures& q, const ReferenceIndex& index, const QueryOptions& opts) {
  require(!opts.rerank_n || *opts.rerank_n > 0, ErrorCode::invalid_argument, "rerank N must be positive");
  require(!index.classes().empty(), ErrorCode::precondition, "index has no reference classes");
  const auto t0 = Clock::now();
  auto stage1 = stage1_rank(q.baseline, index, opts.stage1);
  const double t1 = seconds_since(t0);
  RankedResult result;
  if (opts.stage1_only) {
    result.ranking = std::move(stage1);
  } else {
    const auto t2 = Clock::now();
    result = rerank(q.query_map, index, stage1, opts.rerank_n, opts.sigma_cells.value_or(index.config.sigma_cells));
    result.stage2_seconds = seconds_since(t2);
  }
  result.stage1_seconds = t1;
  result.query_ref = q.ref;
  return result;
}

nlohmann::json ranked_entry_json(const RankedEntry& e, std::size_t rank) {
  return {{"rank", rank},
          {"class_id", e.class_id},
          {"score", e.score},
          {"stage", e.stage},
          {"orientation", e.orientation.id()}};
}

}  // namespace wmatch
