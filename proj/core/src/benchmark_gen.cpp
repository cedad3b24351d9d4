#include "wmatch/benchmark_gen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "wmatch/errors.hpp"
#include "wmatch/image_io.hpp"

namespace wmatch {
namespace {

struct Pt {
  double x, y;
};

void draw_segment(BinaryPattern& p, Pt a, Pt b, double thickness) {
  const double r = thickness / 2.0;
  const auto x0 = static_cast<std::int64_t>(std::floor(std::min(a.x, b.x) - r));
  const auto x1 = static_cast<std::int64_t>(std::ceil(std::max(a.x, b.x) + r));
  const auto y0 = static_cast<std::int64_t>(std::floor(std::min(a.y, b.y) - r));
  const auto y1 = static_cast<std::int64_t>(std::ceil(std::max(a.y, b.y) + r));
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  for (std::int64_t y = std::max<std::int64_t>(y0, 0); y <= std::min<std::int64_t>(y1, p.height - 1); ++y) {
    for (std::int64_t x = std::max<std::int64_t>(x0, 0); x <= std::min<std::int64_t>(x1, p.width - 1); ++x) {
      const double px = x + 0.5, py = y + 0.5;
      double t = len2 > 0.0 ? ((px - a.x) * vx + (py - a.y) * vy) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const double dx = px - (a.x + t * vx), dy = py - (a.y + t * vy);
      if (dx * dx + dy * dy <= r * r) p.at(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)) = 1;
    }
  }
}

void draw_arc(BinaryPattern& p, Pt c, double radius, double start, double sweep, double thickness) {
  const int steps = std::max(8, static_cast<int>(std::ceil(std::abs(sweep) * radius / 4.0)));
  Pt prev{c.x + radius * std::cos(start), c.y + radius * std::sin(start)};
  for (int i = 1; i <= steps; ++i) {
    const double a = start + sweep * i / steps;
    const Pt cur{c.x + radius * std::cos(a), c.y + radius * std::sin(a)};
    draw_segment(p, prev, cur, thickness);
    prev = cur;
  }
}

std::string class_name(std::uint32_t c) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "c%04u", c);
  return buf;
}

}  // namespace

void BenchmarkConfig::validate() const {
  require(n_classes >= 2, ErrorCode::invalid_argument, "benchmark needs at least 2 classes");
  require(image_side >= 64, ErrorCode::invalid_argument, "benchmark image side must be >= 64");
  require(max_iou > 0.0 && max_iou <= 1.0, ErrorCode::invalid_argument, "max_iou must lie in (0, 1]");
  synth.validate();
}

BinaryPattern random_pattern(std::uint32_t side, Rng& rng) {
  BinaryPattern p(side, side);
  const double guide = side * 7.0 / 8.0;
  const double lo = (side - guide) / 2.0 + 12.0;
  const double hi = side - lo;
  const double thickness = uniform(rng, 2.5, 4.0);
  const auto strokes = uniform_int(rng, 3, 8);
  auto point = [&] { return Pt{uniform(rng, lo, hi), uniform(rng, lo, hi)}; };
  for (std::int64_t s = 0; s < strokes; ++s) {
    switch (uniform_int(rng, 0, 2)) {
      case 0: {  // circle
        const Pt c = point();
        const double r = uniform(rng, 10.0, 0.25 * guide);
        draw_arc(p, c, r, 0.0, 2.0 * std::numbers::pi, thickness);
        break;
      }
      case 1: {  // polyline
        const auto n = uniform_int(rng, 2, 5);
        Pt prev = point();
        for (std::int64_t i = 1; i < n; ++i) {
          const Pt cur = point();
          draw_segment(p, prev, cur, thickness);
          prev = cur;
        }
        break;
      }
      default: {  // letter-like arc
        const Pt c = point();
        const double r = uniform(rng, 15.0, 0.3 * guide);
        const double start = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        const double sweep = uniform(rng, std::numbers::pi / 3.0, 1.5 * std::numbers::pi);
        draw_arc(p, c, r, start, sweep, thickness);
        break;
      }
    }
  }
  return p;
}

double pattern_iou(const BinaryPattern& a, const BinaryPattern& b) {
  require(a.width == b.width && a.height == b.height, ErrorCode::shape_mismatch, "IoU of differently sized patterns");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.mask.size(); ++i) {
    inter += a.mask[i] & b.mask[i];
    uni += a.mask[i] | b.mask[i];
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

BinaryPattern transform_pattern(const BinaryPattern& p, double degrees, double dx, double dy) {
  BinaryPattern out(p.width, p.height);
  out.provenance = p.provenance;
  const double a = degrees * std::numbers::pi / 180.0;
  const double ca = std::cos(a), sa = std::sin(a);
  const double cx = p.width / 2.0, cy = p.height / 2.0;
  for (std::uint32_t y = 0; y < p.height; ++y) {
    for (std::uint32_t x = 0; x < p.width; ++x) {
      // Inverse map of the output pixel center.
      const double ox = x + 0.5 - cx - dx, oy = y + 0.5 - cy - dy;
      const double sx = ca * ox + sa * oy + cx, sy = -sa * ox + ca * oy + cy;
      const auto ix = static_cast<std::int64_t>(std::floor(sx));
      const auto iy = static_cast<std::int64_t>(std::floor(sy));
      if (ix < 0 || iy < 0 || ix >= p.width || iy >= p.height) continue;
      out.at(x, y) = p.at(static_cast<std::uint32_t>(ix), static_cast<std::uint32_t>(iy));
    }
  }
  return out;
}

void add_clutter(BinaryPattern& p, std::uint32_t max_count, Rng& rng) {
  const auto n = uniform_int(rng, 0, max_count);
  for (std::int64_t i = 0; i < n; ++i) {
    const Pt a{uniform(rng, 0.0, p.width), uniform(rng, 0.0, p.height)};
    const double len = uniform(rng, 20.0, 80.0);
    const double ang = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    draw_segment(p, a, {a.x + len * std::cos(ang), a.y + len * std::sin(ang)}, 1.5);
  }
}

BenchmarkCorpus gen_benchmark(const BenchmarkConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "drawings");
  fs::create_directories(out_dir / "plain");
  fs::create_directories(out_dir / "photos");

  const std::uint32_t side = cfg.image_side;
  const double guide = side * 7.0 / 8.0;
  const Rect guide_rect{(side - guide) / 2.0, (side - guide) / 2.0, guide, guide};

  BenchmarkCorpus corpus;
  corpus.manifest.base_dir = out_dir;
  for (std::uint32_t c = 0; c < cfg.n_classes; ++c) {
    const std::string name = class_name(c);
    BinaryPattern pattern;
    for (std::uint64_t attempt = 0;; ++attempt) {
      require(attempt < 1000, ErrorCode::precondition, "could not draw a pattern distinct from earlier classes");
      Rng rng(derive_seed(cfg.seed, (static_cast<std::uint64_t>(c) << 20) | attempt));
      pattern = random_pattern(side, rng);
      if (pattern.foreground() == 0) continue;
      bool distinct = true;
      for (const auto& prev : corpus.patterns) distinct = distinct && pattern_iou(pattern, prev) < cfg.max_iou;
      if (distinct) break;
    }
    pattern.provenance = "benchmark class " + name;

    std::vector<Image> photos;
    for (std::uint32_t k = 0; k < cfg.photos_per_class; ++k) {
      const std::uint64_t photo_seed = derive_seed(cfg.seed, (1ull << 40) | (static_cast<std::uint64_t>(c) << 16) | k);
      Rng rng(photo_seed);
      const double rot = uniform(rng, -cfg.max_rotation_deg, cfg.max_rotation_deg);
      const double dx = uniform(rng, -cfg.max_shift_px, cfg.max_shift_px);
      const double dy = uniform(rng, -cfg.max_shift_px, cfg.max_shift_px);
      BinaryPattern moved = transform_pattern(pattern, rot, dx, dy);
      add_clutter(moved, cfg.max_clutter, rng);
      photos.push_back(randomized_synthetic(moved, cfg.synth, photo_seed));
    }

    const std::string drawing_path = "drawings/" + name + ".png";
    const std::string plain_path = "plain/" + name + ".png";
    save_png(out_dir / drawing_path, render_drawing(pattern));
    const auto bg = photos.empty() ? std::optional<double>{} : std::optional<double>{mean_intensity(photos)};
    save_png(out_dir / plain_path, plain_synthetic(pattern, bg));
    corpus.manifest.records.push_back({drawing_path, name, Domain::drawing, cfg.split, Role::reference, guide_rect});
    corpus.manifest.records.push_back({plain_path, name, Domain::synthetic, cfg.split, Role::reference, guide_rect});
    for (std::uint32_t k = 0; k < photos.size(); ++k) {
      const std::string photo_path = "photos/" + name + "_" + std::to_string(k) + ".png";
      save_png(out_dir / photo_path, photos[k]);
      corpus.manifest.records.push_back({photo_path, name, Domain::photograph, cfg.split, Role::query, guide_rect});
    }
    corpus.patterns.push_back(std::move(pattern));
  }
  corpus.manifest.validate();
  corpus.manifest.save(out_dir / "manifest.jsonl");
  return corpus;
}

}  // namespace wmatch
