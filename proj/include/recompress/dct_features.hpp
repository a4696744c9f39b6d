#pragma once

#include <cstdint>
#include <vector>

#include "recompress/block_codec.hpp"
#include "recompress/grid.hpp"

namespace recompress {

/// One-hot volume over clipped coefficient magnitude: channel t at (i, j) is
/// 1 iff |clip(plane(i, j))| == t, t in [0, T].
struct BinaryVolume {
    int threshold = 0; // T
    int rows = 0, cols = 0;
    std::vector<ByteGrid> channels; // T+1 planes

    int channel_count() const { return threshold + 1; }
};

/// Signed histogram of one block position across all blocks of a plane.
struct CoefficientHistogram {
    int pos_row = 0, pos_col = 0;
    int threshold = 0;                 // bins cover [-T, T]
    std::vector<std::int64_t> bins;    // 2T+1 entries, index 0 = value -T
    std::int64_t out_of_range = 0;
    std::int64_t total_blocks = 0;

    std::int64_t count(int value) const { return bins[static_cast<std::size_t>(value + threshold)]; }
    /// Signed bins with zero count, endpoints excluded.
    int zero_interior_bins() const;
};

/// The three guided feature volumes: the raw one-hot volume, the volume scaled
/// by the tiled quantization matrix, and the volume scaled by the residual map.
struct FeatureVolumeSet {
    int threshold = 0;
    std::vector<RealGrid> quantized;
    std::vector<RealGrid> dequantized;
    std::vector<RealGrid> residual_guided;
};

/// Element-wise clamp to [-T, T].
IntGrid clip_coeffs(const IntGrid& plane, int threshold);

BinaryVolume binary_volume(const IntGrid& plane, int threshold = 20);

CoefficientHistogram coefficient_histogram(const IntGrid& plane, int pos_row, int pos_col,
                                           int threshold = 20);

/// How the residual scales the guided volume.
enum class ResidualGuide { Magnitude, Signed };

FeatureVolumeSet feature_volume_set(const BinaryVolume& volume, const QMatrix& q,
                                    const ResidualPlane& residual,
                                    ResidualGuide guide = ResidualGuide::Magnitude);

/// H x W plane -> (H/8) x (W/8) x 64 tensor, channel = 8*row_in_block + col.
/// Stored as 64 grids of block-resolution values.
std::vector<RealGrid> block_to_channel_reshape(const RealGrid& plane);

/// Inverse of block_to_channel_reshape.
RealGrid channel_to_block_reshape(const std::vector<RealGrid>& channels);

} // namespace recompress
