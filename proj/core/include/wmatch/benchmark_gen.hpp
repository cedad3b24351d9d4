#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "wmatch/manifest.hpp"
#include "wmatch/rng.hpp"
#include "wmatch/synth.hpp"

namespace wmatch {

struct BenchmarkConfig {
  std::uint32_t n_classes = 10;
  std::uint32_t photos_per_class = 2;
  std::uint32_t image_side = 256;
  std::uint64_t seed = 0;
  Split split = Split::test;
  SynthConfig synth{};
  double max_iou = 0.9;
  double max_shift_px = 3.0;
  double max_rotation_deg = 5.0;
  std::uint32_t max_clutter = 3;

  void validate() const;
};

/// Watermark-like pattern of 3-8 strokes (circles, polylines, arcs) inside
/// the guide square of a side x side canvas.
BinaryPattern random_pattern(std::uint32_t side, Rng& rng);

/// Foreground intersection over union; 0 when both are empty.
double pattern_iou(const BinaryPattern& a, const BinaryPattern& b);

/// Rotates by `degrees` about the center and shifts by (dx, dy), nearest
/// neighbour.
BinaryPattern transform_pattern(const BinaryPattern& p, double degrees, double dx, double dy);

/// Thin random segments, 0..max_count of them.
void add_clutter(BinaryPattern& p, std::uint32_t max_count, Rng& rng);

struct BenchmarkCorpus {
  DatasetManifest manifest;
  std::vector<BinaryPattern> patterns;  // one per class
};

/// Writes, per class c: drawings/c.png (drawing, reference), plain/c.png
/// (synthetic, reference) and photos/c_k.png (photograph, query), plus
/// manifest.jsonl with relative paths. Every record carries the guide
/// rectangle of the centered 224 square. Same seed -> byte-identical files.
BenchmarkCorpus gen_benchmark(const BenchmarkConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace wmatch
