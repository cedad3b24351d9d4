#pragma once

#include <string_view>

#include "wmatch/feature_map.hpp"

namespace wmatch {

// Global similarities between two maps of the baseline (14 x 14) setting.

/// Cosine of the per-channel spatial means. Only dims must agree.
double avgpool_sim(const FeatureMap& a, const FeatureMap& b);

/// Cosine of the flattened row-major maps. Shapes must agree.
double concat_sim(const FeatureMap& a, const FeatureMap& b);

/// Mean over cells of the per-cell cosine. Shapes must agree.
double localsim(const FeatureMap& a, const FeatureMap& b);

enum class GlobalSimilarity { localsim, avgpool, concat };

double global_similarity(GlobalSimilarity kind, const FeatureMap& a, const FeatureMap& b);
const char* to_string(GlobalSimilarity kind);
/// Accepts "localsim", "avgpool", "concat".
GlobalSimilarity parse_global_similarity(std::string_view name);

}  // namespace wmatch
