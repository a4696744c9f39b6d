#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "recompress/grid.hpp"

namespace recompress {

/// 8x8 quantization matrix in natural (de-zigzagged) order, entries in [1, 255].
struct QMatrix {
    std::array<int, 64> entries{};

    int at(int r, int c) const { return entries[r * 8 + c]; }
    int& at(int r, int c) { return entries[r * 8 + c]; }

    void validate() const;

    friend bool operator==(const QMatrix&, const QMatrix&) = default;
};

/// The standard luminance table (natural order).
const QMatrix& standard_luminance_qmatrix();

/// IJG scaling of the standard luminance table for a quality factor in [1, 100].
QMatrix quality_to_qmatrix(int quality);

/// Quality factor whose scaled standard table is nearest (L1) to `q`.
/// Ties resolve to the lowest quality factor.
int estimate_quality(const QMatrix& q);

using Block = std::array<double, 64>;
using CoeffBlock = std::array<std::int32_t, 64>;

/// Quantized DCT coefficients laid out at pixel resolution: each 8x8 tile of
/// the grid is one block in natural order. Dimensions are multiples of 8.
struct CoefficientPlane {
    IntGrid coeffs;
    QMatrix q;

    int block_rows() const { return coeffs.rows() / 8; }
    int block_cols() const { return coeffs.cols() / 8; }

    friend bool operator==(const CoefficientPlane&, const CoefficientPlane&) = default;
};

/// Pixel samples in [0, 255].
struct PixelPlane {
    IntGrid samples;
};

/// Planes [Q_0 .. Q_k] produced by repeated recompression under the same q.
struct RecompressionTrace {
    std::vector<CoefficientPlane> planes;
    int k = 0;
    QMatrix q;
};

/// Per-coefficient mean of successive plane differences, (Q_k - Q_0) / k.
struct ResidualPlane {
    RealGrid values;
};

/// Pixel rounding behaviour at the end of a decompression pass.
enum class RoundTruncateMode {
    ClampToByte, // round then clamp to [0, 255]
    RoundOnly,   // round without clamping (sensitivity experiments)
};

// --- 8x8 block transforms ---------------------------------------------------

/// Forward 2-D DCT with the JPEG scaling convention: a constant block of
/// value c transforms to DC = 8c. Input is level-shifted pixels (sample - 128).
Block fdct_block(const Block& pixels);

/// Inverse of fdct_block.
Block idct_block(const Block& coeffs);

/// Element-wise divide by q and round to nearest, ties away from zero.
CoeffBlock quantize(const Block& coeffs, const QMatrix& q);

/// Element-wise multiply by q.
Block dequantize(const CoeffBlock& quantized, const QMatrix& q);

/// Map IDCT output back to pixel samples: round(b + 128), clamped to [0, 255]
/// under ClampToByte.
std::array<int, 64> round_truncate(const Block& block,
                                   RoundTruncateMode mode = RoundTruncateMode::ClampToByte);

// --- plane-level operations --------------------------------------------------

/// Decode a plane to pixels: dequantize, inverse DCT, round/truncate.
PixelPlane decompress_plane(const CoefficientPlane& plane,
                            RoundTruncateMode mode = RoundTruncateMode::ClampToByte);

/// Encode pixels: level shift, forward DCT, quantize with `q`.
/// Dimensions must be multiples of 8.
CoefficientPlane compress_pixels(const PixelPlane& pixels, const QMatrix& q);

/// One full recompression pass at the plane's own q.
CoefficientPlane recompress_once(const CoefficientPlane& plane,
                                 RoundTruncateMode mode = RoundTruncateMode::ClampToByte);

/// Decompress then recompress with a different quantization matrix.
CoefficientPlane requantize_plane(const CoefficientPlane& plane, const QMatrix& q_new,
                                  RoundTruncateMode mode = RoundTruncateMode::ClampToByte);

/// Chain of k recompressions; planes[0] is the input. k must be >= 1.
RecompressionTrace recompression_trace(const CoefficientPlane& q0, int k,
                                       RoundTruncateMode mode = RoundTruncateMode::ClampToByte);

/// Mean successive difference over the trace; telescopes to (Q_k - Q_0) / k.
ResidualPlane residual_map(const RecompressionTrace& trace);

/// 1 where coefficients differ between the two planes, else 0.
ByteGrid change_mask(const CoefficientPlane& a, const CoefficientPlane& b);

/// Number of coefficient positions that differ between consecutive planes.
std::vector<std::int64_t> per_step_change_counts(const RecompressionTrace& trace);

} // namespace recompress
