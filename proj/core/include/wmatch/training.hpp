#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wmatch/adam.hpp"
#include "wmatch/adapter.hpp"
#include "wmatch/extractor.hpp"
#include "wmatch/manifest.hpp"
#include "wmatch/mining.hpp"
#include "wmatch/triplet.hpp"

namespace wmatch {

/// Frozen (unadapted, normalized) features of a training manifest. Anchors
/// are query-grid maps of the reference-side domain; photos are canonical
/// orientation pyramids.
struct TrainingCorpus {
  std::vector<FeatureMap> anchors;
  std::vector<std::uint32_t> anchor_class;
  std::vector<std::string> anchor_refs;
  std::vector<FeaturePyramid> photos;
  std::vector<std::uint32_t> photo_class;
  std::vector<std::string> class_ids;  // class index -> manifest class_id

  std::uint32_t dim() const { return anchors.empty() ? 0 : anchors.front().dim(); }
};

/// Anchors come from records of `anchor_domain`, photos from the photograph
/// domain; roles and splits are ignored.
TrainingCorpus build_training_corpus(const DatasetManifest& manifest, const Extractor& ex, const ScaleSet& scales,
                                     Domain anchor_domain = Domain::drawing);

/// Mines spatially verified positives for every (anchor, same-class photo)
/// pair and one hard negative per positive, all on adapted features. The
/// triplets hold the raw features so gradients can flow through the adapter.
/// Image indices in the provenance address anchors first, then photos.
/// Throws Error(precondition) with fewer than two classes.
TripletBatch mine_triplets(const TrainingCorpus& corpus, const AdapterParams& params, const MiningConfig& cfg);

struct TrainConfig {
  std::uint32_t epochs = 5;
  std::uint64_t seed = 0;
  std::uint32_t batch_size = 256;
  AdamConfig adam{};  // lr 1e-3, betas (0.9, 0.99), eps 1e-8

  void validate() const;
};

struct EpochStats {
  std::uint32_t epoch = 0;
  bool skipped = false;
  std::size_t triplets = 0;
  /// Mean triplet loss over the epoch's triplets at the parameters the epoch
  /// started from. NaN for skipped epochs.
  double loss = 0.0;
};

struct TrainResult {
  AdapterParams params;
  std::vector<EpochStats> curve;
  std::vector<std::string> warnings;
};

/// Re-mines every cfg.remine_every epochs, shuffles the triplets with `seed`,
/// and takes one Adam step per mini-batch with the summed gradient divided by
/// the mini-batch size. Deterministic for a given seed. Epochs without
/// positives are skipped with a warning; Error(precondition) when every epoch
/// was skipped.
TrainResult train_adapter(const TrainingCorpus& corpus, const MiningConfig& cfg, const TrainConfig& tcfg,
                          std::optional<AdapterParams> init = std::nullopt);

TrainResult train_adapter(const DatasetManifest& manifest, const Extractor& ex, const MiningConfig& cfg,
                          const TrainConfig& tcfg, Domain anchor_domain = Domain::drawing);

nlohmann::json loss_curve_json(const TrainResult& result);

}  // namespace wmatch
