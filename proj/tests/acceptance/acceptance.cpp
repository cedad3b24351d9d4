// Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero when a
// criterion fails unless it was named with --allow-fail (documented known
// failures; the line still reads FAIL).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "wmatch/adapter.hpp"
#include "wmatch/benchmark_gen.hpp"
#include "wmatch/errors.hpp"
#include "wmatch/evaluate.hpp"
#include "wmatch/fmap_io.hpp"
#include "wmatch/handcrafted.hpp"
#include "wmatch/index.hpp"
#include "wmatch/match.hpp"
#include "wmatch/mining.hpp"
#include "wmatch/preprocess.hpp"
#include "wmatch/retrieval.hpp"
#include "wmatch/synth.hpp"
#include "wmatch/training.hpp"
#include "wmatch/triplet.hpp"

using namespace wmatch;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Pinned protocol constants.
constexpr std::uint64_t kCorpusSeed = 7;
constexpr std::uint64_t kTrainSeed = 8;
constexpr std::uint32_t kClasses = 50;
constexpr std::uint32_t kPhotos = 2;
constexpr std::size_t kRerankN = 10;

// Shared 50-class corpus: synthetic references are indexed, photographs are
// the queries. Built once, on first use.
class Corpus {
 public:
  explicit Corpus(fs::path dir) : dir_(std::move(dir)) {}

  void ensure() {
    if (ready_) return;
    BenchmarkConfig cfg;
    cfg.n_classes = kClasses;
    cfg.photos_per_class = kPhotos;
    cfg.seed = kCorpusSeed;
    fs::remove_all(dir_ / "test");
    manifest = gen_benchmark(cfg, dir_ / "test").manifest;
    index_cfg.domain = Domain::synthetic;
    index = ReferenceIndex::build(manifest, ex, nullptr, index_cfg);
    queries = prepare(index, nullptr);
    ready_ = true;
  }

  std::vector<QueryFeatures> prepare(const ReferenceIndex& idx, const AdapterParams* adapter) const {
    std::vector<QueryFeatures> out;
    query_class.clear();
    for (const auto& r : manifest.records) {
      if (r.role != Role::query) continue;
      out.push_back(prepare_query(load_canonical(manifest, r, idx.config.preprocess), ex, adapter, idx));
      query_class.push_back(r.class_id);
    }
    return out;
  }

  std::size_t rank_of(const std::vector<RankedEntry>& ranking, const ReferenceIndex& idx,
                      const std::string& class_id) const {
    const auto want = idx.class_index(class_id);
    for (std::size_t i = 0; i < ranking.size(); ++i) {
      if (want && ranking[i].class_index == *want) return i + 1;
    }
    return 0;
  }

  EvalReport report(const std::vector<QueryFeatures>& qs, const ReferenceIndex& idx, const QueryOptions& opts) const {
    std::vector<QueryOutcome> outcomes;
    for (std::size_t i = 0; i < qs.size(); ++i) {
      const auto res = run_query(qs[i], idx, opts);
      QueryOutcome o;
      o.class_id = query_class[i];
      o.rank = rank_of(res.ranking, idx, o.class_id);
      outcomes.push_back(o);
    }
    return summarize(std::move(outcomes), idx.classes().size(), {1, 5, 10});
  }

  const fs::path& dir() const { return dir_; }

  HandcraftedExtractor ex;
  IndexConfig index_cfg;
  DatasetManifest manifest;
  ReferenceIndex index;
  std::vector<QueryFeatures> queries;
  mutable std::vector<std::string> query_class;

 private:
  fs::path dir_;
  bool ready_ = false;
};

std::vector<float> gaussian_vec(Rng& rng, std::size_t n) {
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(oracle::gaussian(rng));
  return v;
}

// --- 1 ---------------------------------------------------------------------
Outcome oracle_equivalence() {
  Rng rng(1001);
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::uint32_t qh = 1 + uniform_int(rng, 0, 7), qw = 1 + uniform_int(rng, 0, 7);
    const std::uint32_t dim = 1 + uniform_int(rng, 0, 15);
    std::vector<std::uint32_t> sides;
    const int scales = 1 + uniform_int(rng, 0, 2);
    for (int s = 0; s < scales; ++s) sides.push_back(1 + uniform_int(rng, 0, 7));
    const auto q = oracle::random_unit_map(rng, qh, qw, dim, 0.1);
    const auto p = oracle::random_pyramid(rng, sides, dim, 0.1);
    const double sigma = 0.25 + 4.0 * uniform01(rng);
    const double got = score_pair(q, p, sigma).total;
    const double want = oracle::score_pair(q, p, sigma);
    worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-5 && secs < 10.0, fmt("200 instances, max rel err %.2e (tol 1e-5), %.2f s (limit 10 s)", worst, secs)};
}

// --- 2 ---------------------------------------------------------------------
Outcome identity_score() {
  Rng rng(1002);
  std::size_t cases = 0, exact = 0;
  auto check = [&](const FeatureMap& q, FeaturePyramid p) {
    ++cases;
    exact += score_pair(q, p, kDefaultSigmaCells).total == static_cast<double>(q.cell_count());
  };
  const auto big = oracle::random_unit_map(rng, 22, 22, 32);
  FeaturePyramid own;
  own.maps.push_back(big);
  check(big, own);
  const double total22 = score_pair(big, own, kDefaultSigmaCells).total;
  // The map inside a full pyramid among other random scales.
  for (int t = 0; t < 20; ++t) {
    const std::uint32_t h = 1 + uniform_int(rng, 0, 23), w = 1 + uniform_int(rng, 0, 23);
    const auto q = oracle::random_unit_map(rng, h, w, 4 + uniform_int(rng, 0, 28));
    auto p = oracle::random_pyramid(rng, {16, 19, 25}, q.dim());
    p.maps.insert(p.maps.begin() + t % 4, q.with_labels(static_cast<std::uint32_t>(t % 4), {}));
    for (std::uint32_t s = 0; s < p.maps.size(); ++s) p.maps[s] = p.maps[s].with_labels(s, {});
    check(q, p);
  }
  return {exact == cases && total22 == 484.0,
          fmt("%zu/%zu exact, 22x22 -> %.1f (want 484.0)", exact, cases, total22)};
}

// --- 3 ---------------------------------------------------------------------
Image blocky(Rng& rng, std::uint32_t side) {
  Image img(side, side, 1);
  std::vector<float> blocks((side / 8) * (side / 8));
  for (auto& b : blocks) b = static_cast<float>(uniform01(rng));
  for (std::uint32_t y = 0; y < side; ++y)
    for (std::uint32_t x = 0; x < side; ++x) img.at(x, y) = blocks[(y / 8) * (side / 8) + x / 8];
  return img;
}

Outcome orientation_recovery() {
  Rng rng(1003);
  const HandcraftedExtractor ex;
  const ScaleSet scales;
  int correct = 0;
  std::string misses;
  for (int t = 0; t < 50; ++t) {
    // Alternate blocky textures and randomized synthetic watermarks.
    Image ref;
    if (t % 2 == 0) {
      ref = blocky(rng, 256);
    } else {
      ref = randomized_synthetic(random_pattern(256, rng), SynthConfig{}, 5000 + t);
    }
    const auto o = static_cast<std::uint32_t>(1 + t % 7);
    const auto qmap = extract_query_map(orient_image(ref, OrientationId(o)), ex, scales);
    std::vector<FeaturePyramid> all;
    for (std::uint32_t k = 0; k < 8; ++k) all.push_back(extract_pyramid(ref, ex, scales, OrientationId(k)));
    const auto got = score_oriented(qmap, all, kDefaultSigmaCells).orientation.id();
    if (got == o) {
      ++correct;
    } else {
      misses += fmt(" case%d:%u->%u", t, o, got);
    }
  }
  return {correct >= 49, fmt("%d/50 recovered (need 49)%s", correct, misses.c_str())};
}

// --- 4 ---------------------------------------------------------------------
Outcome gradient_check() {
  Rng rng(1004);
  int ok = 0;
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const std::uint32_t dim = 2 + uniform_int(rng, 0, 14);
    TripletBatch b;
    b.dim = dim;
    const int n = 1 + uniform_int(rng, 0, 7);
    for (int k = 0; k < n; ++k) b.push(gaussian_vec(rng, dim), gaussian_vec(rng, dim), gaussian_vec(rng, dim));
    auto p = AdapterParams::identity(dim);
    for (auto& w : p.weight) w += static_cast<float>(0.3 * oracle::gaussian(rng));
    for (auto& v : p.bias) v = static_cast<float>(0.3 * oracle::gaussian(rng));
    const auto pd = AdapterParamsD::from(p);
    const double lambda = 0.2 + 0.8 * uniform01(rng);
    const auto got = adapter_triplet_loss(b, pd, lambda);
    auto loss_at = [&](const AdapterParamsD& q) {
      return oracle::adapter_loss(b.anchors, b.positives, b.negatives, dim, q.weight, q.bias, lambda);
    };
    constexpr double h = 1e-4;
    double max_fd = 0, max_err = 0;
    auto probe = [&](std::vector<double> AdapterParamsD::*field, const std::vector<double>& analytic) {
      for (std::size_t i = 0; i < analytic.size(); ++i) {
        auto plus = pd, minus = pd;
        (plus.*field)[i] += h;
        (minus.*field)[i] -= h;
        const double fd = (loss_at(plus) - loss_at(minus)) / (2 * h);
        max_fd = std::max(max_fd, std::abs(fd));
        max_err = std::max(max_err, std::abs(fd - analytic[i]));
      }
    };
    probe(&AdapterParamsD::weight, got.grad.weight);
    probe(&AdapterParamsD::bias, got.grad.bias);
    const double rel = max_fd > 0 ? max_err / max_fd : max_err;
    worst = std::max(worst, rel);
    ok += rel <= 1e-3;
  }
  return {ok == 50, fmt("%d/50 cases within 1e-3 (worst rel err %.2e, step 1e-4)", ok, worst)};
}

// --- 5 ---------------------------------------------------------------------
std::set<std::pair<std::uint32_t, std::uint32_t>> anchors_of(const std::vector<PositivePair>& pairs) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> s;
  for (const auto& p : pairs) s.insert({p.anchor_cell.row, p.anchor_cell.col});
  return s;
}

Outcome mining_correctness(Corpus& corpus) {
  corpus.ensure();
  Rng rng(1005);
  MiningConfig cfg;
  std::size_t nest_cases = 0, nest_ok = 0;
  std::size_t n0 = 0, n3 = 0, ninf = 0;
  auto nest = [&](const FeatureMap& d, const FeaturePyramid& p) {
    cfg.tau_cells = 0;
    const auto a0 = anchors_of(mine_positives(d, p, cfg));
    cfg.tau_cells = 3;
    const auto a3 = anchors_of(mine_positives(d, p, cfg));
    cfg.tau_cells = std::numeric_limits<double>::infinity();
    const auto ai = anchors_of(mine_positives(d, p, cfg));
    ++nest_cases;
    nest_ok += std::includes(a3.begin(), a3.end(), a0.begin(), a0.end()) &&
               std::includes(ai.begin(), ai.end(), a3.begin(), a3.end());
    n0 += a0.size();
    n3 += a3.size();
    ninf += ai.size();
  };
  // Random maps, some with an exactly embedded copy.
  for (int t = 0; t < 30; ++t) {
    const auto d = oracle::random_unit_map(rng, 8, 8, 3, 0.1);
    auto p = oracle::random_pyramid(rng, {6, 8, 10}, 3);
    if (t % 2 == 0) p.maps[1] = d.with_labels(1, {});
    nest(d, p);
  }
  // Real pairs: synthetic reference of each class against its photographs.
  std::vector<FeaturePyramid> photos;
  std::vector<std::uint32_t> photo_class;
  std::vector<FeatureMap> anchors;
  std::vector<std::uint32_t> anchor_class;
  for (const auto& r : corpus.manifest.records) {
    const auto c = corpus.index.class_index(r.class_id);
    if (!c || *c >= 10) continue;
    const Image img = load_canonical(corpus.manifest, r);
    if (r.domain == Domain::synthetic) {
      anchors.push_back(extract_query_map(img, corpus.ex, cfg.scales));
      anchor_class.push_back(*c);
    } else if (r.domain == Domain::photograph) {
      photos.push_back(extract_pyramid(img, corpus.ex, cfg.scales, OrientationId(0)));
      photo_class.push_back(*c);
    }
  }
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    for (std::size_t p = 0; p < photos.size(); ++p) {
      if (photo_class[p] == anchor_class[a]) nest(anchors[a], photos[p]);
    }
  }

  // Hard negatives against the exhaustive scan oracle.
  std::size_t hn_cases = 0, hn_ok = 0;
  auto check_hn = [&](std::span<const float> anchor, std::span<const FeaturePyramid> set) {
    const auto got = mine_hard_negative(anchor, set);
    const auto want = oracle::hard_negative(anchor, set);
    ++hn_cases;
    hn_ok += got.image == want.image && got.scale_id == want.scale && got.cell == CellIndex{want.row, want.col} &&
             std::abs(got.fs - want.fs) <= 1e-12;
  };
  std::vector<FeaturePyramid> randoms;
  for (int i = 0; i < 6; ++i) randoms.push_back(oracle::random_pyramid(rng, {4, 5, 6}, 5, 0.1));
  for (int t = 0; t < 100; ++t) check_hn(gaussian_vec(rng, 5), randoms);
  const NegativePool pool(photos, photo_class);
  std::size_t pool_cases = 0, pool_ok = 0;
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    std::vector<FeaturePyramid> others;
    std::vector<std::uint32_t> where;
    for (std::uint32_t p = 0; p < photos.size(); ++p) {
      if (photo_class[p] != anchor_class[a]) {
        others.push_back(photos[p]);
        where.push_back(p);
      }
    }
    for (std::uint32_t k = 0; k < 5; ++k) {
      const auto cell = anchors[a].cell((k * 97 + 31) % anchors[a].cell_count());
      check_hn(cell, others);
      const auto pooled = pool.mine(cell, anchor_class[a]);
      const auto want = oracle::hard_negative(cell, others);
      ++pool_cases;
      pool_ok += pooled.image == where[want.image] && pooled.cell == CellIndex{want.row, want.col};
    }
  }
  const bool pass = nest_ok == nest_cases && hn_ok == hn_cases && pool_ok == pool_cases;
  return {pass, fmt("nesting %zu/%zu (anchors kept: tau0 %zu <= tau3 %zu <= inf %zu); hard negatives %zu/%zu, "
                    "pooled %zu/%zu",
                    nest_ok, nest_cases, n0, n3, ninf, hn_ok, hn_cases, pool_ok, pool_cases)};
}

// --- 6 ---------------------------------------------------------------------
Outcome two_stage_consistency(Corpus& corpus) {
  corpus.ensure();
  const double sigma = corpus.index.config.sigma_cells;
  std::size_t same = 0;
  std::string first_diff;
  for (std::size_t i = 0; i < corpus.queries.size(); ++i) {
    const auto& q = corpus.queries[i];
    const auto exhaustive = rank_exhaustive(q.query_map, corpus.index, sigma);
    const auto stage1 = stage1_rank(q.baseline, corpus.index);
    const auto reranked = rerank(q.query_map, corpus.index, stage1, std::nullopt, sigma).ranking;
    bool eq = exhaustive.size() == reranked.size();
    for (std::size_t k = 0; eq && k < exhaustive.size(); ++k) {
      eq = exhaustive[k].class_index == reranked[k].class_index && exhaustive[k].score == reranked[k].score &&
           exhaustive[k].orientation.id() == reranked[k].orientation.id();
    }
    same += eq;
    if (!eq && first_diff.empty()) first_diff = fmt(" first mismatch at query %zu", i);
  }
  return {same == corpus.queries.size(),
          fmt("%zu/%zu queries identical over %zu classes%s", same, corpus.queries.size(),
              corpus.index.classes().size(), first_diff.c_str())};
}

// --- 7 ---------------------------------------------------------------------
struct RecognitionNumbers {
  double avgpool = 0, concat = 0, localsim = 0, matching = 0, adapted = 0;
  std::vector<EvalReport> curves;
};
std::optional<RecognitionNumbers> recognition_numbers;

Outcome recognition_ordering(Corpus& corpus, AdapterParams* trained_out) {
  const auto t0 = Clock::now();
  corpus.ensure();
  RecognitionNumbers n;
  QueryOptions stage1;
  stage1.stage1_only = true;
  for (auto [sim, slot] : {std::pair{GlobalSimilarity::avgpool, &n.avgpool},
                           std::pair{GlobalSimilarity::concat, &n.concat},
                           std::pair{GlobalSimilarity::localsim, &n.localsim}}) {
    stage1.stage1 = sim;
    *slot = corpus.report(corpus.queries, corpus.index, stage1).accuracy_at(1);
  }
  QueryOptions two_stage;
  two_stage.rerank_n = kRerankN;
  const auto base = corpus.report(corpus.queries, corpus.index, two_stage);
  n.matching = base.accuracy_at(1);
  n.curves.push_back(base);

  // Adapter trained on a disjoint generated corpus (synthetic anchors,
  // photograph positives/negatives), then index and queries are re-extracted.
  BenchmarkConfig tcfg;
  tcfg.n_classes = kClasses;
  tcfg.photos_per_class = kPhotos;
  tcfg.seed = kTrainSeed;
  tcfg.split = Split::train;
  fs::remove_all(corpus.dir() / "train");
  const auto train_manifest = gen_benchmark(tcfg, corpus.dir() / "train").manifest;
  const auto trained = train_adapter(train_manifest, corpus.ex, MiningConfig{}, TrainConfig{}, Domain::synthetic);
  const auto adapted_index = ReferenceIndex::build(corpus.manifest, corpus.ex, &trained.params, corpus.index_cfg);
  const auto adapted_queries = corpus.prepare(adapted_index, &trained.params);
  const auto adapted = corpus.report(adapted_queries, adapted_index, two_stage);
  n.adapted = adapted.accuracy_at(1);
  n.curves.push_back(adapted);
  if (trained_out) *trained_out = trained.params;

  std::string losses;
  for (const auto& e : trained.curve) losses += fmt("%s%.4f", losses.empty() ? "" : ",", e.loss);
  const double secs = seconds_since(t0);
  const bool ordering = n.matching >= n.avgpool && n.matching >= n.concat;
  const bool adapter_ok = n.adapted >= n.matching;
  recognition_numbers = n;
  return {ordering && adapter_ok && secs < 300.0,
          fmt("acc@1 matching %.2f vs avgpool %.2f, concat %.2f (localsim %.2f) -> %s; adapter 5 epochs %.2f -> %.2f "
              "-> %s (loss %s); %.0f s (limit 300 s)",
              n.matching, n.avgpool, n.concat, n.localsim, ordering ? "ok" : "ordering violated", n.matching,
              n.adapted, adapter_ok ? "ok" : "decreased", losses.c_str(), secs)};
}

// --- 8 ---------------------------------------------------------------------
Outcome synthesis_formula() {
  Rng rng(1008);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    BinaryPattern pattern(16, 16);
    const double density = 0.1 + 0.5 * uniform01(rng);
    for (auto& m : pattern.mask) m = uniform01(rng) < density ? 1 : 0;
    Image bg(16, 16, 1);
    for (auto& p : bg.pixels) p = static_cast<float>(uniform(rng, 0.2, 0.9));
    SynthConfig cfg;
    cfg.blur_sigma = 0.3 + 2.5 * uniform01(rng);
    const std::uint64_t seed = 9000 + t;
    const auto out = randomized_synthetic(pattern, cfg, seed, &bg);
    const auto r = noise_field(16, 16, cfg.noise_low, cfg.noise_high, derive_seed(seed, 1));
    const std::vector<double> b(bg.pixels.begin(), bg.pixels.end());
    const auto want = oracle::synth(pattern.mask, 16, 16, cfg.blur_sigma, r, b);
    for (std::size_t i = 0; i < want.size(); ++i) worst = std::max(worst, std::abs(out.pixels[i] - want[i]));
  }
  // Zero noise: the output is the background, bit for bit.
  bool zero_ok = true;
  for (int t = 0; t < 10; ++t) {
    BinaryPattern pattern(16, 16);
    for (auto& m : pattern.mask) m = uniform01(rng) < 0.4 ? 1 : 0;
    SynthConfig cfg;
    cfg.noise_low = cfg.noise_high = 0.0;
    Image bg(16, 16, 1);
    for (auto& p : bg.pixels) p = static_cast<float>(uniform01(rng));
    zero_ok = zero_ok && randomized_synthetic(pattern, cfg, t, &bg).pixels == bg.pixels;
    zero_ok = zero_ok && randomized_synthetic(pattern, cfg, t).pixels ==
                             paper_background(16, 16, derive_seed(static_cast<std::uint64_t>(t), 2)).pixels;
  }
  return {worst <= 1e-6 && zero_ok,
          fmt("50 cases max abs err %.2e (tol 1e-6); zero noise returns B exactly: %s", worst, zero_ok ? "yes" : "no")};
}

// --- 9 ---------------------------------------------------------------------
template <class W>
std::string bytes_of(W&& write) {
  std::ostringstream s;
  write(s);
  return s.str();
}

Outcome persistence(Corpus& corpus, const AdapterParams* trained) {
  corpus.ensure();
  const auto path = corpus.dir() / "index.ridx";
  corpus.index.save(path);
  const auto loaded = ReferenceIndex::load(path);
  const bool index_bytes = bytes_of([&](std::ostream& o) { corpus.index.write(o); }) ==
                           bytes_of([&](std::ostream& o) { loaded.write(o); });
  std::size_t same = 0, n = 0;
  QueryOptions opts;
  opts.rerank_n = kRerankN;
  for (std::size_t i = 0; i < corpus.queries.size(); i += 5) {
    const auto a = run_query(corpus.queries[i], corpus.index, opts).ranking;
    const auto b = run_query(corpus.queries[i], loaded, opts).ranking;
    bool eq = a.size() == b.size();
    for (std::size_t k = 0; eq && k < a.size(); ++k) {
      eq = a[k].class_index == b[k].class_index && a[k].score == b[k].score && a[k].stage == b[k].stage &&
           a[k].orientation.id() == b[k].orientation.id() && a[k].entry == b[k].entry;
    }
    ++n;
    same += eq;
  }

  // FMAP: write -> read -> write, for real and random maps.
  std::size_t fmaps = 0, fmap_ok = 0;
  auto fmap_cycle = [&](const FeatureMap& m) {
    const auto first = bytes_of([&](std::ostream& o) { write_fmap(o, m); });
    std::istringstream in(first);
    const auto back = read_fmap(in);
    ++fmaps;
    fmap_ok += bytes_of([&](std::ostream& o) { write_fmap(o, back); }) == first &&
               std::equal(back.data().begin(), back.data().end(), m.data().begin(), m.data().end());
  };
  for (const auto& q : corpus.queries) fmap_cycle(q.query_map);
  for (const auto& p : corpus.index.entries.front().pyramids)
    for (const auto& m : p.maps) fmap_cycle(m);
  Rng rng(1009);
  for (int t = 0; t < 10; ++t) fmap_cycle(oracle::random_raw_map(rng, 1 + t, 3 + t, 1 + t * 3, 0.2));

  // ADPT: the trained adapter (with Adam state) and random ones.
  std::size_t adpts = 0, adpt_ok = 0;
  auto adpt_cycle = [&](const AdapterParams& p) {
    const auto path_a = corpus.dir() / "adapter.adpt";
    save_adapter(path_a, p);
    const auto back = load_adapter(path_a);
    ++adpts;
    adpt_ok += back == p && bytes_of([&](std::ostream& o) { write_adapter(o, back); }) ==
                                bytes_of([&](std::ostream& o) { write_adapter(o, p); });
  };
  if (trained) adpt_cycle(*trained);
  for (int t = 0; t < 5; ++t) {
    auto p = AdapterParams::identity(3 + t);
    for (auto& w : p.weight) w += static_cast<float>(0.1 * oracle::gaussian(rng));
    p.adam.m_weight = gaussian_vec(rng, p.weight.size());
    p.adam.v_weight = gaussian_vec(rng, p.weight.size());
    p.adam.m_bias = gaussian_vec(rng, p.bias.size());
    p.adam.v_bias = gaussian_vec(rng, p.bias.size());
    p.adam.step = 1000 + t;
    adpt_cycle(p);
  }
  const bool pass = index_bytes && same == n && fmap_ok == fmaps && adpt_ok == adpts;
  return {pass, fmt("index bytes %s, rankings identical %zu/%zu; FMAP %zu/%zu, ADPT %zu/%zu byte-exact",
                    index_bytes ? "identical" : "differ", same, n, fmap_ok, fmaps, adpt_ok, adpts)};
}

// --- 10 --------------------------------------------------------------------
Outcome accuracy_curves(Corpus& corpus) {
  corpus.ensure();
  std::vector<EvalReport> reports;
  if (recognition_numbers) reports = recognition_numbers->curves;
  QueryOptions opts;
  opts.rerank_n = kRerankN;
  reports.push_back(corpus.report(corpus.queries, corpus.index, opts));
  opts.stage1_only = true;
  reports.push_back(corpus.report(corpus.queries, corpus.index, opts));
  bool monotone = true;
  for (const auto& r : reports) {
    for (std::size_t k = 1; k < r.curve.size(); ++k) monotone = monotone && r.curve[k] >= r.curve[k - 1];
    monotone = monotone && !r.curve.empty() && r.curve.back() == 1.0;
    for (const auto& [k, acc] : r.accuracy) monotone = monotone && acc == r.curve[std::min(k, r.curve.size()) - 1];
  }

  // Queries that duplicate the indexed references, through the same pipeline.
  std::vector<QueryFeatures> self;
  std::vector<std::string> self_class;
  for (const auto& r : corpus.manifest.records) {
    if (r.role != Role::reference || r.domain != Domain::synthetic) continue;
    self.push_back(prepare_query(load_canonical(corpus.manifest, r, corpus.index.config.preprocess), corpus.ex,
                                 nullptr, corpus.index));
    self_class.push_back(r.class_id);
  }
  std::vector<QueryOutcome> outcomes;
  opts.stage1_only = false;
  for (std::size_t i = 0; i < self.size(); ++i) {
    QueryOutcome o;
    o.class_id = self_class[i];
    o.rank = corpus.rank_of(run_query(self[i], corpus.index, opts).ranking, corpus.index, o.class_id);
    outcomes.push_back(o);
  }
  const auto self_report = summarize(std::move(outcomes), corpus.index.classes().size(), {1});
  const double self_acc = self_report.accuracy_at(1);
  return {monotone && self_acc == 1.0,
          fmt("%zu curves monotone and reaching 1.0: %s; self-retrieval acc@1 %.3f over %zu queries", reports.size(),
              monotone ? "yes" : "no", self_acc, self.size())};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path workdir = fs::temp_directory_path() / "wmatch_acceptance";
  std::set<int> allowed;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--workdir" && i + 1 < argc) {
      workdir = argv[++i];
    } else if (a == "--allow-fail" && i + 1 < argc) {
      allowed.insert(std::stoi(argv[++i]));
    } else if (a == "--only" && i + 1 < argc) {
      only.insert(std::stoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--workdir DIR] [--allow-fail N]... [--only N]...\n", argv[0]);
      return 2;
    }
  }
  fs::create_directories(workdir);
  Corpus corpus(workdir);
  AdapterParams trained;
  bool have_trained = false;

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "score matches brute-force oracle", oracle_equivalence},
      {2, "identity score equals cell count", identity_score},
      {3, "orientation recovery", orientation_recovery},
      {4, "adapter gradient vs finite differences", gradient_check},
      {5, "mining threshold nesting and hard negatives", [&] { return mining_correctness(corpus); }},
      {6, "unlimited rerank equals exhaustive ranking", [&] { return two_stage_consistency(corpus); }},
      {7, "synthetic-corpus recognition ordering",
       [&] {
         auto o = recognition_ordering(corpus, &trained);
         have_trained = true;
         return o;
       }},
      {8, "synthesis formula", synthesis_formula},
      {9, "persistence round trip", [&] { return persistence(corpus, have_trained ? &trained : nullptr); }},
      {10, "accuracy@K monotone and self-retrieval", [&] { return accuracy_curves(corpus); }},
  };

  int unexpected = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.contains(c.id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const bool known = !o.pass && allowed.contains(c.id);
    std::printf("%s [%d] %s: %s (%.1f s)%s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                seconds_since(t0), known ? " [known failure, allowed]" : "");
    std::fflush(stdout);
    if (!o.pass && !known) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
