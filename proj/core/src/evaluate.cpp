#include "wmatch/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include "wmatch/errors.hpp"

namespace wmatch {

TimingSummary summarize_timings(std::vector<double> seconds) {
  TimingSummary t;
  if (seconds.empty()) return t;
  double sum = 0.0;
  for (double s : seconds) sum += s;
  t.mean = sum / static_cast<double>(seconds.size());
  std::sort(seconds.begin(), seconds.end());
  const auto idx = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(seconds.size()))) - 1;
  t.p95 = seconds[std::min(idx, seconds.size() - 1)];
  return t;
}

double EvalReport::accuracy_at(std::size_t k) const {
  for (const auto& [kk, acc] : accuracy) {
    if (kk == k) return acc;
  }
  require(k >= 1 && k <= curve.size(), ErrorCode::invalid_argument, "accuracy@" + std::to_string(k) + " unavailable");
  return curve[k - 1];
}

EvalReport summarize(std::vector<QueryOutcome> outcomes, std::size_t n_classes, const std::vector<std::size_t>& ks) {
  for (auto k : ks) require(k >= 1, ErrorCode::invalid_argument, "K must be >= 1");
  EvalReport r;
  std::vector<std::size_t> hits_at(n_classes + 1, 0);  // hits_at[k]: rank == k
  std::vector<double> t1, t2;
  for (const auto& o : outcomes) {
    if (o.rank == 0) {
      ++r.missing_class;
      continue;
    }
    ++r.queries;
    if (o.rank <= n_classes) ++hits_at[o.rank];
    t1.push_back(o.stage1_seconds);
    t2.push_back(o.stage2_seconds);
  }
  const double denom = r.queries == 0 ? 1.0 : static_cast<double>(r.queries);
  std::size_t cum = 0;
  for (std::size_t k = 1; k <= n_classes; ++k) {
    cum += hits_at[k];
    r.curve.push_back(static_cast<double>(cum) / denom);
  }
  for (auto k : ks) {
    const double acc = r.curve.empty() ? 0.0 : r.curve[std::min(k, r.curve.size()) - 1];
    r.accuracy.emplace_back(k, acc);
  }
  r.stage1 = summarize_timings(std::move(t1));
  r.stage2 = summarize_timings(std::move(t2));
  r.outcomes = std::move(outcomes);
  return r;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json acc = nlohmann::json::object();
  for (const auto& [k, a] : accuracy) acc[std::to_string(k)] = a;
  nlohmann::json per_query = nlohmann::json::array();
  for (const auto& o : outcomes) {
    per_query.push_back({{"image_path", o.image_path},
                         {"class_id", o.class_id},
                         {"rank", o.rank == 0 ? nlohmann::json(nullptr) : nlohmann::json(o.rank)},
                         {"stage1_seconds", o.stage1_seconds},
                         {"stage2_seconds", o.stage2_seconds}});
  }
  return {{"queries", queries},
          {"missing_class_errors", missing_class},
          {"accuracy_at_k", std::move(acc)},
          {"curve", curve},
          {"timing",
           {{"stage1", {{"mean_seconds", stage1.mean}, {"p95_seconds", stage1.p95}}},
            {"stage2", {{"mean_seconds", stage2.mean}, {"p95_seconds", stage2.p95}}}}},
          {"per_query", std::move(per_query)}};
}

EvalReport evaluate(const DatasetManifest& queries, const ReferenceIndex& index, const Extractor& ex,
                    const AdapterParams* adapter, const EvalConfig& cfg) {
  std::vector<QueryOutcome> outcomes;
  for (const auto& rec : queries.records) {
    if (rec.role != Role::query) continue;
    QueryOutcome o;
    o.image_path = rec.image_path;
    o.class_id = rec.class_id;
    if (!index.class_index(rec.class_id)) {
      outcomes.push_back(std::move(o));
      continue;
    }
    Image canonical = load_canonical(queries, rec, index.config.preprocess);
    canonical.provenance = rec.image_path;
    const QueryFeatures q = prepare_query(canonical, ex, adapter, index);
    const RankedResult res = run_query(q, index, cfg.query);
    for (std::size_t i = 0; i < res.ranking.size(); ++i) {
      if (res.ranking[i].class_id == rec.class_id) {
        o.rank = i + 1;
        break;
      }
    }
    o.stage1_seconds = res.stage1_seconds;
    o.stage2_seconds = res.stage2_seconds;
    outcomes.push_back(std::move(o));
  }
  return summarize(std::move(outcomes), index.classes().size(), cfg.ks);
}

}  // namespace wmatch
