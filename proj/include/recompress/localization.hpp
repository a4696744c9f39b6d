#pragma once

#include "recompress/block_codec.hpp"
#include "recompress/grid.hpp"

namespace recompress {

enum class HeatmapOrigin { Instability, Residual, External };

/// Per-pixel localization response in [0, 1].
struct Heatmap {
    RealGrid values;
    HeatmapOrigin origin = HeatmapOrigin::External;
};

/// Per-pixel tamper mask, true = tampered.
struct BinaryMask {
    ByteGrid pixels; // 1 = tampered
};

/// Block instability across a trace: per block, the fraction of coefficient
/// changes over all steps, min-max normalized over the image and replicated
/// x8 to pixel resolution. A trace with uniform block scores maps to zero.
Heatmap instability_heatmap(const RecompressionTrace& trace);

/// Residual-energy companion map: per block, mean |R|, min-max normalized and
/// replicated x8.
Heatmap residual_heatmap(const ResidualPlane& residual);

/// Soft selection of two heatmaps: the one with the higher global max becomes
/// the main map m (ties pick the first argument), and the result is
/// GMP(m) * m + (1 - GMP(m)) * s, clamped to [0, 1].
Heatmap adaptive_aggregate(const Heatmap& a, const Heatmap& b);

/// Pixel true iff heatmap value >= threshold.
BinaryMask binarize(const Heatmap& h, double threshold);

/// Global max pooling over the heatmap.
double image_level_score(const Heatmap& h);

/// Restrict a heatmap to the top-left rows x cols window (drops the block
/// padding introduced by non-multiple-of-8 sources).
Heatmap crop_heatmap(const Heatmap& h, int rows, int cols);

} // namespace recompress
