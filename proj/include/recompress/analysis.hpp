#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "recompress/block_codec.hpp"
#include "recompress/localization.hpp"

namespace recompress {

/// Full single-image pipeline output: trace statistics plus the aggregated
/// localization heatmap.
struct AnalysisResult {
    std::vector<std::int64_t> per_step_change_counts;
    Heatmap instability;
    Heatmap residual;
    Heatmap aggregated;
    double image_score = 0.0;   // GMP over the aggregated heatmap
    double change_fraction = 0.0; // first-step changed coefficients / total
};

/// Trace the plane k times, build the instability and residual heatmaps, and
/// soft-select them into the final map.
AnalysisResult analyze_plane(const CoefficientPlane& plane, int k,
                             RoundTruncateMode mode = RoundTruncateMode::ClampToByte);

} // namespace recompress
