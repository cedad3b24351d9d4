#include "wmatch/baselines.hpp"

#include <string>
#include <vector>

#include "wmatch/errors.hpp"

namespace wmatch {
namespace {

void require_same_shape(const FeatureMap& a, const FeatureMap& b, const char* what) {
  if (a.height() != b.height() || a.width() != b.width() || a.dim() != b.dim()) {
    fail(ErrorCode::shape_mismatch, std::string(what) + ": shapes differ (" + std::to_string(a.height()) + "x" +
                                        std::to_string(a.width()) + "x" + std::to_string(a.dim()) + " vs " +
                                        std::to_string(b.height()) + "x" + std::to_string(b.width()) + "x" +
                                        std::to_string(b.dim()) + ")");
  }
}

std::vector<float> channel_mean(const FeatureMap& m) {
  std::vector<double> acc(m.dim(), 0.0);
  for (std::size_t i = 0; i < m.cell_count(); ++i) {
    const auto c = m.cell(i);
    for (std::uint32_t k = 0; k < m.dim(); ++k) acc[k] += c[k];
  }
  std::vector<float> out(m.dim());
  for (std::uint32_t k = 0; k < m.dim(); ++k) out[k] = static_cast<float>(acc[k] / m.cell_count());
  return out;
}

}  // namespace

double avgpool_sim(const FeatureMap& a, const FeatureMap& b) {
  require(a.dim() == b.dim(), ErrorCode::shape_mismatch, "avgpool_sim: dims differ");
  return cosine(channel_mean(a), channel_mean(b));
}

double concat_sim(const FeatureMap& a, const FeatureMap& b) {
  require_same_shape(a, b, "concat_sim");
  return cosine(a.data(), b.data());
}

double localsim(const FeatureMap& a, const FeatureMap& b) {
  require_same_shape(a, b, "localsim");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.cell_count(); ++i) sum += cosine(a.cell(i), b.cell(i));
  return sum / static_cast<double>(a.cell_count());
}

double global_similarity(GlobalSimilarity kind, const FeatureMap& a, const FeatureMap& b) {
  switch (kind) {
    case GlobalSimilarity::localsim: return localsim(a, b);
    case GlobalSimilarity::avgpool: return avgpool_sim(a, b);
    case GlobalSimilarity::concat: return concat_sim(a, b);
  }
  fail(ErrorCode::invalid_argument, "unknown global similarity");
}

const char* to_string(GlobalSimilarity kind) {
  switch (kind) {
    case GlobalSimilarity::localsim: return "localsim";
    case GlobalSimilarity::avgpool: return "avgpool";
    case GlobalSimilarity::concat: return "concat";
  }
  return "?";
}

GlobalSimilarity parse_global_similarity(std::string_view name) {
  if (name == "localsim") return GlobalSimilarity::localsim;
  if (name == "avgpool") return GlobalSimilarity::avgpool;
  if (name == "concat") return GlobalSimilarity::concat;
  fail(ErrorCode::invalid_argument, "unknown similarity '" + std::string(name) + "'");
}

}  // namespace wmatch
