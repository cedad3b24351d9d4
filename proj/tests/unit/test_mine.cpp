#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "wmatch/adam.hpp"
#include "wmatch/adapter.hpp"
#include "wmatch/benchmark_gen.hpp"
#include "wmatch/errors.hpp"
#include "wmatch/handcrafted.hpp"
#include "wmatch/mining.hpp"
#include "wmatch/training.hpp"
#include "wmatch/triplet.hpp"
#include "wmatch/triplet_io.hpp"

using namespace wmatch;
namespace fs = std::filesystem;

namespace {

FeaturePyramid single(FeatureMap m) {
  FeaturePyramid p;
  p.maps.push_back(std::move(m));
  return p;
}

std::vector<float> gaussian_vec(Rng& rng, std::size_t n) {
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(oracle::gaussian(rng));
  return v;
}

AdapterParams random_adapter(Rng& rng, std::uint32_t dim, double spread) {
  auto p = AdapterParams::identity(dim);
  for (auto& w : p.weight) w += static_cast<float>(spread * oracle::gaussian(rng));
  for (auto& b : p.bias) b = static_cast<float>(spread * oracle::gaussian(rng));
  return p;
}

std::set<std::pair<std::uint32_t, std::uint32_t>> anchors_of(const std::vector<PositivePair>& pairs) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> s;
  for (const auto& p : pairs) s.insert({p.anchor_cell.row, p.anchor_cell.col});
  return s;
}

}  // namespace

TEST(Adapter, IdentityAndScaleInvariance) {
  Rng rng(51);
  const auto m = oracle::random_unit_map(rng, 4, 4, 6, 0.2);
  EXPECT_EQ(apply_adapter(m, AdapterParams::identity(6)), m);
  auto twice = AdapterParams::identity(6);
  for (auto& w : twice.weight) w *= 2.0f;
  EXPECT_FALSE(twice.is_identity());
  const auto out = apply_adapter(m, twice);
  for (std::size_t i = 0; i < m.data().size(); ++i) EXPECT_NEAR(out.data()[i], m.data()[i], 1e-7);
  EXPECT_EQ(out.zero_cell_count(), m.zero_cell_count());
  EXPECT_EQ(AdapterParams::identity(6).id(), "none");
  EXPECT_NE(twice.id(), "none");
}

TEST(Adapter, RandomMatchesDirectProduct) {
  Rng rng(52);
  const auto m = oracle::random_unit_map(rng, 3, 3, 5, 0.2);
  const auto p = random_adapter(rng, 5, 0.3);
  const auto out = apply_adapter(m, p);
  for (std::size_t c = 0; c < m.cell_count(); ++c) {
    if (m.is_zero_cell(c)) {
      EXPECT_TRUE(out.is_zero_cell(c));
      continue;
    }
    std::vector<double> y(5);
    double n2 = 0;
    for (int i = 0; i < 5; ++i) {
      y[i] = p.bias[i];
      for (int j = 0; j < 5; ++j) y[i] += static_cast<double>(p.weight[i * 5 + j]) * m.cell(c)[j];
      n2 += y[i] * y[i];
    }
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(out.cell(c)[i], y[i] / std::sqrt(n2), 1e-6);
  }
}

TEST(Adapter, RejectsBadParams) {
  Rng rng(53);
  const auto m = oracle::random_unit_map(rng, 2, 2, 3);
  auto p = AdapterParams::identity(3);
  p.weight[4] = std::numeric_limits<float>::quiet_NaN();
  try {
    apply_adapter(m, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_finite);
  }
  EXPECT_THROW(apply_adapter(m, AdapterParams::identity(4)), Error);
}

TEST(Adapter, AdptRoundTripByteExact) {
  Rng rng(54);
  auto p = random_adapter(rng, 7, 0.1);
  p.adam.m_weight = gaussian_vec(rng, 49);
  p.adam.v_weight = gaussian_vec(rng, 49);
  p.adam.m_bias = gaussian_vec(rng, 7);
  p.adam.v_bias = gaussian_vec(rng, 7);
  p.adam.step = 123456789012ull;
  std::stringstream a;
  write_adapter(a, p);
  const std::string bytes = a.str();
  EXPECT_EQ(bytes.substr(0, 4), "ADPT");
  EXPECT_EQ(bytes.size(), 4u + 4 + 4 + (49 + 7) * 4 + 8 + 2 * (49 + 7) * 4);
  std::stringstream in(bytes);
  const auto back = read_adapter(in);
  EXPECT_EQ(back, p);
  std::stringstream b;
  write_adapter(b, back);
  EXPECT_EQ(b.str(), bytes);
  std::stringstream bad(bytes.substr(0, 20));
  EXPECT_THROW(read_adapter(bad), Error);
}

TEST(Triplet, ClosedFormExamples) {
  EXPECT_DOUBLE_EQ(triplet_term(0.9, 0.2, 1.0), -0.7);
  EXPECT_DOUBLE_EQ(triplet_term(1.0, -0.3, 1.0), -1.0);
  EXPECT_DOUBLE_EQ(triplet_term(0.9, 0.5, 0.8), 0.5 - 0.8);

  // s_pos = 1, s_neg = -0.3: the negative term is clipped.
  TripletBatch b;
  b.dim = 2;
  const std::vector<float> a{1, 0}, p{2, 0}, n{-0.3f, std::sqrt(1 - 0.09f)};
  b.push(a, p, n);
  const auto l = triplet_loss(b, 1.0);
  EXPECT_NEAR(l.loss, -1.0, 1e-12);
  for (double g : l.grad_negatives) EXPECT_EQ(g, 0.0);
  EXPECT_THROW(triplet_loss(TripletBatch{}, 1.0), Error);
  EXPECT_THROW(triplet_loss(b, 0.0), Error);
  EXPECT_THROW(triplet_loss(b, 1.5), Error);
}

TEST(Triplet, FeatureGradientMatchesFiniteDifferences) {
  Rng rng(55);
  for (int t = 0; t < 10; ++t) {
    TripletBatch b;
    b.dim = 6;
    for (int k = 0; k < 3; ++k) b.push(gaussian_vec(rng, 6), gaussian_vec(rng, 6), gaussian_vec(rng, 6));
    const double lambda = 0.6;
    const auto l = triplet_loss(b, lambda);
    const double h = 1e-4;
    auto check = [&](std::vector<float> TripletBatch::*field, const std::vector<double>& grad) {
      double max_fd = 0, max_err = 0;
      for (std::size_t i = 0; i < (b.*field).size(); ++i) {
        TripletBatch plus = b, minus = b;
        (plus.*field)[i] += static_cast<float>(h);
        (minus.*field)[i] -= static_cast<float>(h);
        const double step = static_cast<double>((plus.*field)[i]) - (minus.*field)[i];
        const double fd = (triplet_loss(plus, lambda).loss - triplet_loss(minus, lambda).loss) / step;
        max_fd = std::max(max_fd, std::abs(fd));
        max_err = std::max(max_err, std::abs(fd - grad[i]));
      }
      EXPECT_LE(max_err, 1e-4 * std::max(max_fd, 1e-3)) << "case " << t;
    };
    check(&TripletBatch::anchors, l.grad_anchors);
    check(&TripletBatch::positives, l.grad_positives);
    check(&TripletBatch::negatives, l.grad_negatives);
  }
}

TEST(Triplet, AdapterLossMatchesOracleAndGradient) {
  Rng rng(56);
  for (int t = 0; t < 10; ++t) {
    const std::uint32_t dim = 2 + t % 5;
    TripletBatch b;
    b.dim = dim;
    for (int k = 0; k < 4; ++k) b.push(gaussian_vec(rng, dim), gaussian_vec(rng, dim), gaussian_vec(rng, dim));
    auto p = AdapterParamsD::from(random_adapter(rng, dim, 0.3));
    const double lambda = 0.7;
    const auto got = adapter_triplet_loss(b, p, lambda);
    auto loss_at = [&](const AdapterParamsD& q) {
      return oracle::adapter_loss(b.anchors, b.positives, b.negatives, dim, q.weight, q.bias, lambda);
    };
    EXPECT_NEAR(got.loss, loss_at(p), 1e-9);
    const double h = 1e-4;
    auto fd_of = [&](std::vector<double> AdapterParamsD::*field, std::size_t i) {
      auto plus = p, minus = p;
      (plus.*field)[i] += h;
      (minus.*field)[i] -= h;
      return (loss_at(plus) - loss_at(minus)) / (2 * h);
    };
    double max_fd = 0, max_err = 0;
    for (std::size_t i = 0; i < p.weight.size(); ++i) {
      const double fd = fd_of(&AdapterParamsD::weight, i);
      max_fd = std::max(max_fd, std::abs(fd));
      max_err = std::max(max_err, std::abs(fd - got.grad.weight[i]));
    }
    for (std::size_t i = 0; i < p.bias.size(); ++i) {
      const double fd = fd_of(&AdapterParamsD::bias, i);
      max_fd = std::max(max_fd, std::abs(fd));
      max_err = std::max(max_err, std::abs(fd - got.grad.bias[i]));
    }
    EXPECT_LE(max_err, 1e-3 * max_fd) << "case " << t;
    // A subset sums only the selected triplets.
    const std::vector<std::uint32_t> subset{2, 0};
    TripletBatch picked;
    picked.dim = dim;
    for (auto s : subset) picked.push(b.anchor(s), b.positive(s), b.negative(s));
    EXPECT_NEAR(adapter_triplet_loss(b, p, lambda, subset).loss, adapter_triplet_loss(picked, p, lambda).loss, 1e-12);
  }
}

TEST(Adam, ZeroGradientOnlyCounts) {
  auto p = AdapterParams::identity(3);
  AdapterGradient g{std::vector<double>(9, 0.0), std::vector<double>(3, 0.0)};
  const auto next = adam_step(p, g, AdamConfig{});
  EXPECT_EQ(next.weight, p.weight);
  EXPECT_EQ(next.bias, p.bias);
  EXPECT_EQ(next.adam.step, 1u);
}

TEST(Adam, FirstStepClosedForm) {
  auto p = AdapterParams::identity(2);
  AdapterGradient g{{0.5, -2.0, 0.0, 3.0}, {1e-3, -1e-3}};
  AdamConfig cfg;
  const auto next = adam_step(p, g, cfg);
  // Bias-corrected moments after one step are g and g^2.
  for (std::size_t i = 0; i < 4; ++i) {
    const double want = p.weight[i] - cfg.lr * g.weight[i] / (std::abs(g.weight[i]) + cfg.eps);
    EXPECT_NEAR(next.weight[i], want, 1e-7);
  }
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(next.bias[i], -cfg.lr * g.bias[i] / (std::abs(g.bias[i]) + cfg.eps), 1e-9);
}

TEST(Adam, ScalarQuadraticMatchesIndependentRecursion) {
  AdamConfig cfg;
  cfg.lr = 0.1;
  std::vector<double> w{1.0}, m{0.0}, v{0.0};
  double rw = 1.0, rm = 0.0, rv = 0.0;
  // Adam overshoots zero and oscillates, so |w| is monotone only while
  // descending towards 0.5; afterwards it must stay below 0.5.
  double prev = 1.0;
  bool crossed = false;
  for (std::uint64_t t = 1; t <= 100; ++t) {
    const std::vector<double> g{2.0 * w[0]};
    adam_update(w, m, v, g, t, cfg);
    // Textbook recursion written out independently.
    const double rg = 2.0 * rw;
    rm = 0.9 * rm + 0.1 * rg;
    rv = 0.99 * rv + 0.01 * rg * rg;
    rw -= 0.1 * (rm / (1 - std::pow(0.9, t))) / (std::sqrt(rv / (1 - std::pow(0.99, t))) + 1e-8);
    EXPECT_NEAR(w[0], rw, 1e-12);
    if (!crossed) EXPECT_LT(std::abs(w[0]), prev) << "step " << t;
    crossed = crossed || std::abs(w[0]) < 0.5;
    if (crossed) EXPECT_LT(std::abs(w[0]), 0.5) << "step " << t;
    prev = std::abs(w[0]);
  }
  EXPECT_LT(std::abs(w[0]), 0.5);
}

TEST(Adam, RefusesNonFiniteAndMismatch) {
  auto p = AdapterParams::identity(2);
  AdapterGradient g{{0, std::numeric_limits<double>::infinity(), 0, 0}, {0, 0}};
  try {
    adam_step(p, g, AdamConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_finite);
  }
  EXPECT_EQ(p, AdapterParams::identity(2));
  EXPECT_THROW(adam_step(p, AdapterGradient{{0, 0}, {0, 0}}, AdamConfig{}), Error);
}

TEST(Mining, SelfPairsUnderIdentity) {
  Rng rng(57);
  const auto d = oracle::random_unit_map(rng, 6, 6, 8, 0.2);
  MiningConfig cfg;
  cfg.tau_cells = 0.5;
  const auto pairs = mine_positives(d, single(d), cfg);
  EXPECT_EQ(pairs.size(), d.cell_count() - d.zero_cell_count());
  for (const auto& p : pairs) {
    EXPECT_EQ(p.anchor_cell, p.matched_cell);
    EXPECT_EQ(p.distance, 0.0);
  }
}

TEST(Mining, TranslatedCopy) {
  // Photo = drawing shifted right by one cell; the vacated column holds
  // unrelated vectors.
  const std::uint32_t n = 8, dim = n * n + n;
  std::vector<float> draw(n * n * dim, 0.0f), photo(n * n * dim, 0.0f);
  for (std::uint32_t r = 0; r < n; ++r) {
    for (std::uint32_t c = 0; c < n; ++c) draw[(r * n + c) * dim + r * n + c] = 1.0f;
    for (std::uint32_t c = 1; c < n; ++c) photo[(r * n + c) * dim + r * n + c - 1] = 1.0f;
    photo[(r * n) * dim + n * n + r] = 1.0f;
  }
  const FeatureMap d(n, n, dim, draw), p(n, n, dim, photo);
  MiningConfig cfg;
  auto interior = [&](const std::vector<PositivePair>& pairs) {
    std::size_t count = 0;
    for (const auto& pp : pairs) count += pp.anchor_cell.col + 1 < n;
    return count;
  };
  cfg.tau_cells = 1.5;
  EXPECT_EQ(interior(mine_positives(d, single(p), cfg)), n * (n - 1));
  cfg.tau_cells = 0.5;
  EXPECT_EQ(interior(mine_positives(d, single(p), cfg)), 0u);
}

TEST(Mining, ThresholdsNest) {
  Rng rng(58);
  for (int t = 0; t < 20; ++t) {
    const auto d = oracle::random_unit_map(rng, 8, 8, 3, 0.1);
    auto p = oracle::random_pyramid(rng, {6, 8, 10}, 3);
    p.maps[1] = d.with_labels(1, {});  // some exact-position matches
    MiningConfig cfg;
    cfg.tau_cells = 0;
    const auto at0 = mine_positives(d, p, cfg);
    cfg.tau_cells = 3;
    const auto at3 = mine_positives(d, p, cfg);
    cfg.tau_cells = std::numeric_limits<double>::infinity();
    const auto inf = mine_positives(d, p, cfg);
    const auto a0 = anchors_of(at0), a3 = anchors_of(at3), ai = anchors_of(inf);
    EXPECT_TRUE(std::includes(a3.begin(), a3.end(), a0.begin(), a0.end()));
    EXPECT_TRUE(std::includes(ai.begin(), ai.end(), a3.begin(), a3.end()));
    EXPECT_EQ(ai.size(), d.cell_count() - d.zero_cell_count());
    for (const auto& pp : at0) EXPECT_EQ(pp.distance, 0.0);
    for (const auto& pp : at3) EXPECT_LT(pp.distance, 3.0 / 8);
  }
}

TEST(Mining, HardNegativeExamples) {
  const std::vector<float> anchor{0, 1, 0};
  FeaturePyramid a = single(FeatureMap(1, 2, 3, {1, 0, 0, 0, 0, 1}));
  FeaturePyramid b = single(FeatureMap(2, 1, 3, {0, 0, 1, 0, 2, 0}));
  const std::vector<FeaturePyramid> set{a, b};
  const auto hn = mine_hard_negative(anchor, set);
  EXPECT_EQ(hn.image, 1u);
  EXPECT_EQ(hn.cell, (CellIndex{1, 0}));
  EXPECT_EQ(hn.fs, 1.0);
  const std::vector<FeaturePyramid> orth{a, single(FeatureMap(1, 1, 3, {1, 0, 1}))};
  const auto first = mine_hard_negative(anchor, orth);
  EXPECT_EQ(first.image, 0u);
  EXPECT_EQ(first.cell, (CellIndex{0, 0}));
  EXPECT_THROW(mine_hard_negative(anchor, std::span<const FeaturePyramid>{}), Error);
}

TEST(Mining, HardNegativeMatchesScanOracle) {
  Rng rng(59);
  std::vector<FeaturePyramid> set;
  std::vector<std::uint32_t> cls;
  for (int i = 0; i < 6; ++i) {
    set.push_back(oracle::random_pyramid(rng, {4, 5, 6}, 5, 0.1));
    cls.push_back(i % 3);
  }
  const NegativePool pool(set, cls);
  for (int t = 0; t < 100; ++t) {
    const auto anchor = gaussian_vec(rng, 5);
    const auto got = mine_hard_negative(anchor, set);
    const auto want = oracle::hard_negative(anchor, set);
    EXPECT_EQ(got.image, want.image);
    EXPECT_EQ(got.scale_id, want.scale);
    EXPECT_EQ(got.cell, (CellIndex{want.row, want.col}));
    EXPECT_NEAR(got.fs, want.fs, 1e-12);

    const std::uint32_t own = t % 3;
    std::vector<FeaturePyramid> others;
    std::vector<std::uint32_t> index;
    for (std::uint32_t i = 0; i < set.size(); ++i) {
      if (cls[i] != own) {
        others.push_back(set[i]);
        index.push_back(i);
      }
    }
    const auto pooled = pool.mine(anchor, own);
    const auto expect = oracle::hard_negative(anchor, others);
    EXPECT_EQ(pooled.image, index[expect.image]);
    EXPECT_EQ(pooled.cell, (CellIndex{expect.row, expect.col}));
    const auto f = pool.feature(pooled);
    EXPECT_TRUE(std::equal(f.begin(), f.end(), set[pooled.image].maps[pooled.scale_id].cell(pooled.cell.row, pooled.cell.col).begin()));
  }
  const std::vector<std::uint32_t> same(6, 0);
  const NegativePool lonely(set, same);
  EXPECT_THROW(lonely.mine(gaussian_vec(rng, 5), 0), Error);
}

TEST(TripletIo, RoundTripByteExact) {
  Rng rng(60);
  TripletBatch b;
  b.dim = 4;
  b.images = {"drawings/a.png", "photos/b_0.png"};
  for (std::uint32_t k = 0; k < 5; ++k) {
    b.push(gaussian_vec(rng, 4), gaussian_vec(rng, 4), gaussian_vec(rng, 4),
           TripletProvenance{{0, 2, k, 1}, {1, 3, 2, k}, {1, 0, 0, 0}});
  }
  std::stringstream s;
  write_triplets(s, b);
  std::stringstream in(s.str());
  const auto back = read_triplets(in);
  EXPECT_EQ(back, b);
  std::stringstream again;
  write_triplets(again, back);
  EXPECT_EQ(again.str(), s.str());
  EXPECT_EQ(s.str().substr(0, 4), "TRIP");

  TripletBatch plain;
  plain.dim = 3;
  plain.push(gaussian_vec(rng, 3), gaussian_vec(rng, 3), gaussian_vec(rng, 3));
  std::stringstream p;
  write_triplets(p, plain);
  std::stringstream pin(p.str());
  EXPECT_EQ(read_triplets(pin), plain);
}

class Training : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "wmatch_training_corpus";
    fs::remove_all(dir_);
    BenchmarkConfig cfg;
    cfg.n_classes = 10;
    cfg.photos_per_class = 2;
    cfg.seed = 5;
    cfg.split = Split::train;
    manifest_ = new DatasetManifest(gen_benchmark(cfg, dir_).manifest);
    corpus_ = new TrainingCorpus(build_training_corpus(*manifest_, HandcraftedExtractor{}, ScaleSet{}));
  }
  static void TearDownTestSuite() {
    delete corpus_;
    delete manifest_;
    fs::remove_all(dir_);
  }
  static inline fs::path dir_;
  static inline DatasetManifest* manifest_ = nullptr;
  static inline TrainingCorpus* corpus_ = nullptr;
};

TEST_F(Training, CorpusShape) {
  EXPECT_EQ(corpus_->anchors.size(), 10u);
  EXPECT_EQ(corpus_->photos.size(), 20u);
  EXPECT_EQ(corpus_->class_ids.size(), 10u);
  EXPECT_EQ(corpus_->anchors.front().height(), 22u);
  EXPECT_EQ(corpus_->photos.front().maps.size(), 5u);
}

TEST_F(Training, MinedTripletsAreConsistent) {
  MiningConfig cfg;
  const auto batch = mine_triplets(*corpus_, AdapterParams::identity(corpus_->dim()), cfg);
  ASSERT_FALSE(batch.empty());
  ASSERT_EQ(batch.provenance.size(), batch.size());
  const std::size_t n_anchor = corpus_->anchors.size();
  for (std::size_t i = 0; i < batch.size(); i += 7) {
    const auto& pr = batch.provenance[i];
    ASSERT_LT(pr.anchor.image, n_anchor);
    ASSERT_GE(pr.positive.image, n_anchor);
    ASSERT_GE(pr.negative.image, n_anchor);
    const auto anchor_cls = corpus_->anchor_class[pr.anchor.image];
    EXPECT_EQ(corpus_->photo_class[pr.positive.image - n_anchor], anchor_cls);
    EXPECT_NE(corpus_->photo_class[pr.negative.image - n_anchor], anchor_cls);
    const auto a = corpus_->anchors[pr.anchor.image].cell(pr.anchor.row, pr.anchor.col);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), batch.anchor(i).begin()));
    const auto& neg_map = corpus_->photos[pr.negative.image - n_anchor].maps[pr.negative.scale];
    const auto n = neg_map.cell(pr.negative.row, pr.negative.col);
    EXPECT_TRUE(std::equal(n.begin(), n.end(), batch.negative(i).begin()));
  }
}

TEST_F(Training, DeterministicPerSeed) {
  TrainConfig t;
  t.epochs = 2;
  t.seed = 9;
  const auto a = train_adapter(*corpus_, MiningConfig{}, t);
  const auto b = train_adapter(*corpus_, MiningConfig{}, t);
  EXPECT_EQ(a.params, b.params);
  ASSERT_EQ(a.curve.size(), 2u);
  EXPECT_EQ(a.curve[1].loss, b.curve[1].loss);
  EXPECT_FALSE(a.params.is_identity());
}

TEST_F(Training, ZeroLearningRateFreezesParams) {
  TrainConfig t;
  t.epochs = 3;
  t.adam.lr = 0.0;
  const auto r = train_adapter(*corpus_, MiningConfig{}, t);
  EXPECT_EQ(r.params.weight, AdapterParams::identity(corpus_->dim()).weight);
  EXPECT_EQ(r.params.bias, AdapterParams::identity(corpus_->dim()).bias);
  ASSERT_EQ(r.curve.size(), 3u);
  EXPECT_EQ(r.curve[0].loss, r.curve[1].loss);
  EXPECT_EQ(r.curve[0].loss, r.curve[2].loss);
  EXPECT_EQ(loss_curve_json(r)["epochs"].size(), 3u);
}

TEST_F(Training, LossDecreasesOverFiveEpochs) {
  TrainConfig t;
  t.epochs = 5;
  t.seed = 1;
  const auto r = train_adapter(*corpus_, MiningConfig{}, t);
  ASSERT_EQ(r.curve.size(), 5u);
  EXPECT_LT(r.curve.back().loss, r.curve.front().loss);
}

TEST_F(Training, SingleClassFails) {
  DatasetManifest one = *manifest_;
  const auto keep = one.records.front().class_id;
  std::erase_if(one.records, [&](const ManifestRecord& r) { return r.class_id != keep; });
  try {
    train_adapter(one, HandcraftedExtractor{}, MiningConfig{}, TrainConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::precondition);
  }
}
