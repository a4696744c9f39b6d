#include "recompress/block_codec.hpp"

#include <cmath>
#include <cstdlib>

#include "recompress/errors.hpp"

namespace recompress {

namespace {

// Annex K luminance table, natural order.
constexpr std::array<int, 64> kStandardLuminance = {
    16, 11, 10, 16, 24,  40,  51,  61,  //
    12, 12, 14, 19, 26,  58,  60,  55,  //
    14, 13, 16, 24, 40,  57,  69,  56,  //
    14, 17, 22, 29, 51,  87,  80,  62,  //
    18, 22, 37, 56, 68,  109, 103, 77,  //
    24, 35, 55, 64, 81,  104, 113, 92,  //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
};

// Orthonormal 1-D DCT-II basis: basis[k][n] = s(k) cos((2n+1) k pi / 16).
// Separable application row- then column-wise yields the JPEG 2-D scaling
// (constant block c -> DC = 8c).
struct DctBasis {
    double m[8][8];
    DctBasis() {
        const double pi = std::acos(-1.0);
        for (int k = 0; k < 8; ++k) {
            const double s = (k == 0) ? std::sqrt(1.0 / 8.0) : 0.5;
            for (int n = 0; n < 8; ++n)
                m[k][n] = s * std::cos((2 * n + 1) * k * pi / 16.0);
        }
    }
};

const DctBasis& basis() {
    static const DctBasis b;
    return b;
}

/// Round to nearest, ties away from zero.
inline double round_half_away(double x) {
    return (x >= 0.0) ? std::floor(x + 0.5) : std::ceil(x - 0.5);
}

} // namespace

void QMatrix::validate() const {
    for (int v : entries)
        if (v < 1 || v > 255)
            throw InvalidArgument("quantization entries must lie in [1, 255]");
}

const QMatrix& standard_luminance_qmatrix() {
    static const QMatrix q = [] {
        QMatrix t;
        t.entries = kStandardLuminance;
        return t;
    }();
    return q;
}

QMatrix quality_to_qmatrix(int quality) {
    if (quality < 1 || quality > 100)
        throw QFOutOfRange("quality factor must lie in [1, 100], got " + std::to_string(quality));
    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    QMatrix out;
    for (int i = 0; i < 64; ++i) {
        int v = (kStandardLuminance[i] * scale + 50) / 100;
        if (v < 1) v = 1;
        if (v > 255) v = 255;
        out.entries[i] = v;
    }
    return out;
}

int estimate_quality(const QMatrix& q) {
    int best_qf = 1;
    long best_dist = -1;
    for (int qf = 1; qf <= 100; ++qf) {
        const QMatrix cand = quality_to_qmatrix(qf);
        long dist = 0;
        for (int i = 0; i < 64; ++i)
            dist += std::labs(static_cast<long>(cand.entries[i]) - q.entries[i]);
        if (best_dist < 0 || dist < best_dist) {
            best_dist = dist;
            best_qf = qf;
        }
    }
    return best_qf;
}

Block fdct_block(const Block& pixels) {
    const auto& b = basis().m;
    double tmp[64];
    // rows: tmp = pixels * B^T
    for (int r = 0; r < 8; ++r)
        for (int k = 0; k < 8; ++k) {
            double acc = 0.0;
            for (int n = 0; n < 8; ++n) acc += pixels[r * 8 + n] * b[k][n];
            tmp[r * 8 + k] = acc;
        }
    // columns: out = B * tmp
    Block out;
    for (int k = 0; k < 8; ++k)
        for (int c = 0; c < 8; ++c) {
            double acc = 0.0;
            for (int n = 0; n < 8; ++n) acc += b[k][n] * tmp[n * 8 + c];
            out[k * 8 + c] = acc;
        }
    return out;
}

Block idct_block(const Block& coeffs) {
    const auto& b = basis().m;
    double tmp[64];
    // rows: tmp = coeffs * B
    for (int r = 0; r < 8; ++r)
        for (int n = 0; n < 8; ++n) {
            double acc = 0.0;
            for (int k = 0; k < 8; ++k) acc += coeffs[r * 8 + k] * b[k][n];
            tmp[r * 8 + n] = acc;
        }
    // columns: out = B^T * tmp
    Block out;
    for (int n = 0; n < 8; ++n)
        for (int c = 0; c < 8; ++c) {
            double acc = 0.0;
            for (int k = 0; k < 8; ++k) acc += b[k][n] * tmp[k * 8 + c];
            out[n * 8 + c] = acc;
        }
    return out;
}

CoeffBlock quantize(const Block& coeffs, const QMatrix& q) {
    CoeffBlock out;
    for (int i = 0; i < 64; ++i)
        out[i] = static_cast<std::int32_t>(round_half_away(coeffs[i] / q.entries[i]));
    return out;
}

Block dequantize(const CoeffBlock& quantized, const QMatrix& q) {
    Block out;
    for (int i = 0; i < 64; ++i)
        out[i] = static_cast<double>(quantized[i]) * q.entries[i];
    return out;
}

std::array<int, 64> round_truncate(const Block& block, RoundTruncateMode mode) {
    std::array<int, 64> out;
    for (int i = 0; i < 64; ++i) {
        int v = static_cast<int>(round_half_away(block[i] + 128.0));
        if (mode == RoundTruncateMode::ClampToByte) {
            if (v < 0) v = 0;
            if (v > 255) v = 255;
        }
        out[i] = v;
    }
    return out;
}

namespace {

void require_block_aligned(int rows, int cols) {
    if (rows <= 0 || cols <= 0 || rows % 8 != 0 || cols % 8 != 0)
        throw NotBlockAligned("plane dimensions must be positive multiples of 8, got " +
                              std::to_string(rows) + "x" + std::to_string(cols));
}

template <typename Src, typename Dst>
void load_block(const Grid<Src>& grid, int br, int bc, std::array<Dst, 64>& out) {
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c)
            out[r * 8 + c] = static_cast<Dst>(grid.at(br * 8 + r, bc * 8 + c));
}

template <typename Src, typename Dst>
void store_block(const std::array<Src, 64>& block, int br, int bc, Grid<Dst>& grid) {
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c)
            grid.at(br * 8 + r, bc * 8 + c) = static_cast<Dst>(block[r * 8 + c]);
}

} // namespace

PixelPlane decompress_plane(const CoefficientPlane& plane, RoundTruncateMode mode) {
    require_block_aligned(plane.coeffs.rows(), plane.coeffs.cols());
    PixelPlane out;
    out.samples = IntGrid(plane.coeffs.rows(), plane.coeffs.cols());
    for (int br = 0; br < plane.block_rows(); ++br)
        for (int bc = 0; bc < plane.block_cols(); ++bc) {
            CoeffBlock qb;
            load_block(plane.coeffs, br, bc, qb);
            const Block pixels = idct_block(dequantize(qb, plane.q));
            store_block(round_truncate(pixels, mode), br, bc, out.samples);
        }
    return out;
}

CoefficientPlane compress_pixels(const PixelPlane& pixels, const QMatrix& q) {
    require_block_aligned(pixels.samples.rows(), pixels.samples.cols());
    CoefficientPlane out;
    out.q = q;
    out.coeffs = IntGrid(pixels.samples.rows(), pixels.samples.cols());
    for (int br = 0; br * 8 < pixels.samples.rows(); ++br)
        for (int bc = 0; bc * 8 < pixels.samples.cols(); ++bc) {
            Block shifted;
            for (int r = 0; r < 8; ++r)
                for (int c = 0; c < 8; ++c)
                    shifted[r * 8 + c] = pixels.samples.at(br * 8 + r, bc * 8 + c) - 128.0;
            store_block(quantize(fdct_block(shifted), q), br, bc, out.coeffs);
        }
    return out;
}

CoefficientPlane recompress_once(const CoefficientPlane& plane, RoundTruncateMode mode) {
    return requantize_plane(plane, plane.q, mode);
}

CoefficientPlane requantize_plane(const CoefficientPlane& plane, const QMatrix& q_new,
                                  RoundTruncateMode mode) {
    return compress_pixels(decompress_plane(plane, mode), q_new);
}

RecompressionTrace recompression_trace(const CoefficientPlane& q0, int k,
                                       RoundTruncateMode mode) {
    if (k < 1)
        throw InvalidK("recompression count must be >= 1, got " + std::to_string(k));
    RecompressionTrace trace;
    trace.k = k;
    trace.q = q0.q;
    trace.planes.reserve(static_cast<std::size_t>(k) + 1);
    trace.planes.push_back(q0);
    for (int i = 0; i < k; ++i)
        trace.planes.push_back(recompress_once(trace.planes.back(), mode));
    return trace;
}

ResidualPlane residual_map(const RecompressionTrace& trace) {
    if (trace.k < 1 || trace.planes.size() != static_cast<std::size_t>(trace.k) + 1)
        throw InvalidK("trace must contain k+1 planes with k >= 1");
    const IntGrid& first = trace.planes.front().coeffs;
    ResidualPlane out;
    out.values = RealGrid(first.rows(), first.cols());
    // Accumulate the successive differences in integer arithmetic and divide
    // once, so the telescoping identity (Q_k - Q_0)/k holds exactly.
    std::vector<std::int64_t> sums(first.size(), 0);
    for (int step = 1; step <= trace.k; ++step) {
        const auto& cur = trace.planes[step].coeffs.data();
        const auto& prev = trace.planes[step - 1].coeffs.data();
        for (std::size_t i = 0; i < sums.size(); ++i)
            sums[i] += static_cast<std::int64_t>(cur[i]) - prev[i];
    }
    for (std::size_t i = 0; i < sums.size(); ++i)
        out.values.data()[i] = static_cast<double>(sums[i]) / trace.k;
    return out;
}

ByteGrid change_mask(const CoefficientPlane& a, const CoefficientPlane& b) {
    if (!a.coeffs.same_shape(b.coeffs))
        throw ShapeMismatch("change_mask requires planes of identical shape");
    ByteGrid out(a.coeffs.rows(), a.coeffs.cols());
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data()[i] = a.coeffs.data()[i] != b.coeffs.data()[i] ? 1 : 0;
    return out;
}

std::vector<std::int64_t> per_step_change_counts(const RecompressionTrace& trace) {
    std::vector<std::int64_t> counts;
    counts.reserve(trace.k);
    for (int step = 1; step <= trace.k; ++step) {
        const auto& cur = trace.planes[step].coeffs.data();
        const auto& prev = trace.planes[step - 1].coeffs.data();
        std::int64_t n = 0;
        for (std::size_t i = 0; i < cur.size(); ++i)
            if (cur[i] != prev[i]) ++n;
        counts.push_back(n);
    }
    return counts;
}

} // namespace recompress
