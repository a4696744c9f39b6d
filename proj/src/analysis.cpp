#include "recompress/analysis.hpp"

namespace recompress {

AnalysisResult analyze_plane(const CoefficientPlane& plane, int k, RoundTruncateMode mode) {
    AnalysisResult result;
    const RecompressionTrace trace = recompression_trace(plane, k, mode);
    result.per_step_change_counts = per_step_change_counts(trace);
    result.instability = instability_heatmap(trace);
    result.residual = residual_heatmap(residual_map(trace));
    result.aggregated = adaptive_aggregate(result.instability, result.residual);
    result.image_score = image_level_score(result.aggregated);
    result.change_fraction = static_cast<double>(result.per_step_change_counts.front()) /
                             static_cast<double>(plane.coeffs.size());
    return result;
}

} // namespace recompress
