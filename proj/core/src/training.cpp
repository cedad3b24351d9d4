#include "wmatch/training.hpp"

#include <tbb/parallel_for.h>

#include <cmath>
#include <limits>
#include <map>

#include "wmatch/errors.hpp"
#include "wmatch/rng.hpp"

namespace wmatch {
namespace {

FeaturePyramid adapt(const FeaturePyramid& p, const AdapterParams& params) {
  FeaturePyramid out;
  out.orientation = p.orientation;
  out.image_ref = p.image_ref;
  out.maps.reserve(p.maps.size());
  for (const auto& m : p.maps) out.maps.push_back(apply_adapter(m, params));
  return out;
}

}  // namespace

TrainingCorpus build_training_corpus(const DatasetManifest& manifest, const Extractor& ex, const ScaleSet& scales,
                                     Domain anchor_domain) {
  scales.validate();
  require(anchor_domain != Domain::photograph, ErrorCode::invalid_argument,
          "anchors must come from a non-photograph domain");
  TrainingCorpus corpus;
  std::map<std::string, std::uint32_t> class_index;
  std::vector<const ManifestRecord*> anchor_recs, photo_recs;
  for (const auto& r : manifest.records) {
    if (r.domain != anchor_domain && r.domain != Domain::photograph) continue;
    auto [it, inserted] = class_index.try_emplace(r.class_id, static_cast<std::uint32_t>(corpus.class_ids.size()));
    if (inserted) corpus.class_ids.push_back(r.class_id);
    if (r.domain == anchor_domain) {
      anchor_recs.push_back(&r);
      corpus.anchor_class.push_back(it->second);
      corpus.anchor_refs.push_back(r.image_path);
    } else {
      photo_recs.push_back(&r);
      corpus.photo_class.push_back(it->second);
    }
  }
  corpus.anchors.resize(anchor_recs.size());
  corpus.photos.resize(photo_recs.size());
  tbb::parallel_for(std::size_t{0}, anchor_recs.size(), [&](std::size_t i) {
    corpus.anchors[i] = extract_query_map(load_canonical(manifest, *anchor_recs[i]), ex, scales);
  });
  tbb::parallel_for(std::size_t{0}, photo_recs.size(), [&](std::size_t i) {
    corpus.photos[i] = extract_pyramid(load_canonical(manifest, *photo_recs[i]), ex, scales, OrientationId{});
    corpus.photos[i].image_ref = photo_recs[i]->image_path;
  });
  return corpus;
}

TripletBatch mine_triplets(const TrainingCorpus& corpus, const AdapterParams& params, const MiningConfig& cfg) {
  cfg.validate();
  require(!corpus.anchors.empty() && !corpus.photos.empty(), ErrorCode::precondition,
          "training corpus needs anchors and photographs");
  {
    std::vector<bool> has_class(corpus.class_ids.size(), false);
    std::uint32_t classes = 0;
    for (auto c : corpus.photo_class) {
      if (!has_class[c]) ++classes;
      has_class[c] = true;
    }
    require(classes >= 2, ErrorCode::precondition, "no negatives available: photographs of a single class only");
  }
  const std::uint32_t dim = corpus.dim();

  std::vector<FeatureMap> anchors(corpus.anchors.size());
  std::vector<FeaturePyramid> photos(corpus.photos.size());
  tbb::parallel_for(std::size_t{0}, anchors.size(), [&](std::size_t i) {
    anchors[i] = apply_adapter(corpus.anchors[i], params);
  });
  tbb::parallel_for(std::size_t{0}, photos.size(), [&](std::size_t i) { photos[i] = adapt(corpus.photos[i], params); });
  const NegativePool pool(photos, corpus.photo_class);

  struct Job {
    std::uint32_t anchor, photo;
  };
  std::vector<Job> jobs;
  for (std::uint32_t a = 0; a < anchors.size(); ++a) {
    for (std::uint32_t p = 0; p < photos.size(); ++p) {
      if (corpus.photo_class[p] == corpus.anchor_class[a]) jobs.push_back({a, p});
    }
  }

  // Each job yields its triplets independently; concatenated in job order.
  std::vector<TripletBatch> parts(jobs.size());
  tbb::parallel_for(std::size_t{0}, jobs.size(), [&](std::size_t j) {
    const auto [a, p] = jobs[j];
    TripletBatch& part = parts[j];
    part.dim = dim;
    const auto pairs = mine_positives(anchors[a], photos[p], cfg);
    const auto photo_image = static_cast<std::uint32_t>(corpus.anchors.size() + p);
    for (const auto& pair : pairs) {
      const auto adapted_anchor = anchors[a].cell(pair.anchor_cell.row, pair.anchor_cell.col);
      const HardNegative neg = pool.mine(adapted_anchor, corpus.anchor_class[a]);
      const TripletProvenance prov{
          {a, anchors[a].scale_id(), pair.anchor_cell.row, pair.anchor_cell.col},
          {photo_image, pair.matched_scale, pair.matched_cell.row, pair.matched_cell.col},
          {static_cast<std::uint32_t>(corpus.anchors.size() + neg.image), neg.scale_id, neg.cell.row, neg.cell.col}};
      part.push(corpus.anchors[a].cell(pair.anchor_cell.row, pair.anchor_cell.col),
                corpus.photos[p].maps[pair.matched_scale].cell(pair.matched_cell.row, pair.matched_cell.col),
                corpus.photos[neg.image].maps[neg.scale_id].cell(neg.cell.row, neg.cell.col), prov);
    }
  });

  TripletBatch batch;
  batch.dim = dim;
  batch.images = corpus.anchor_refs;
  for (const auto& p : corpus.photos) batch.images.push_back(p.image_ref);
  for (auto& part : parts) {
    batch.anchors.insert(batch.anchors.end(), part.anchors.begin(), part.anchors.end());
    batch.positives.insert(batch.positives.end(), part.positives.begin(), part.positives.end());
    batch.negatives.insert(batch.negatives.end(), part.negatives.begin(), part.negatives.end());
    batch.provenance.insert(batch.provenance.end(), part.provenance.begin(), part.provenance.end());
  }
  return batch;
}

void TrainConfig::validate() const {
  require(epochs >= 1, ErrorCode::invalid_argument, "epochs must be >= 1");
  require(batch_size >= 1, ErrorCode::invalid_argument, "batch size must be >= 1");
  adam.validate();
}

TrainResult train_adapter(const TrainingCorpus& corpus, const MiningConfig& cfg, const TrainConfig& tcfg,
                          std::optional<AdapterParams> init) {
  cfg.validate();
  tcfg.validate();
  require(corpus.dim() > 0, ErrorCode::precondition, "training corpus has no anchors");
  TrainResult result;
  result.params = init ? std::move(*init) : AdapterParams::identity(corpus.dim());
  require(result.params.dim == corpus.dim(), ErrorCode::shape_mismatch, "initial adapter dim differs from features");

  Rng rng(tcfg.seed);
  TripletBatch batch;
  bool any_trained = false;
  for (std::uint32_t epoch = 0; epoch < tcfg.epochs; ++epoch) {
    if (epoch % cfg.remine_every == 0) batch = mine_triplets(corpus, result.params, cfg);
    EpochStats stats;
    stats.epoch = epoch;
    stats.triplets = batch.size();
    if (batch.empty()) {
      stats.skipped = true;
      stats.loss = std::numeric_limits<double>::quiet_NaN();
      result.warnings.push_back("epoch " + std::to_string(epoch) + ": no positives mined, skipped");
      result.curve.push_back(stats);
      continue;
    }
    stats.loss = adapter_triplet_loss(batch, AdapterParamsD::from(result.params), cfg.lambda).loss /
                 static_cast<double>(batch.size());

    std::vector<std::uint32_t> order(batch.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle(order, rng);
    for (std::size_t start = 0; start < order.size(); start += tcfg.batch_size) {
      const std::size_t len = std::min<std::size_t>(tcfg.batch_size, order.size() - start);
      const std::span<const std::uint32_t> subset(order.data() + start, len);
      AdapterLoss l = adapter_triplet_loss(batch, AdapterParamsD::from(result.params), cfg.lambda, subset);
      const double inv = 1.0 / static_cast<double>(len);
      for (double& g : l.grad.weight) g *= inv;
      for (double& g : l.grad.bias) g *= inv;
      result.params = adam_step(result.params, l.grad, tcfg.adam);
    }
    any_trained = true;
    result.curve.push_back(stats);
  }
  require(any_trained, ErrorCode::precondition, "no positives mined in any epoch");
  return result;
}

TrainResult train_adapter(const DatasetManifest& manifest, const Extractor& ex, const MiningConfig& cfg,
                          const TrainConfig& tcfg, Domain anchor_domain) {
  const TrainingCorpus corpus = build_training_corpus(manifest, ex, cfg.scales, anchor_domain);
  return train_adapter(corpus, cfg, tcfg);
}

nlohmann::json loss_curve_json(const TrainResult& result) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : result.curve) {
    nlohmann::json row{{"epoch", e.epoch}, {"skipped", e.skipped}, {"triplets", e.triplets}};
    row["loss"] = e.skipped ? nlohmann::json(nullptr) : nlohmann::json(e.loss);
    epochs.push_back(std::move(row));
  }
  return {{"epochs", std::move(epochs)},
          {"warnings", result.warnings},
          {"adapter_id", result.params.id()},
          {"adam_step", result.params.adam.step}};
}

}  // namespace wmatch
