#include "recompress/localization.hpp"

#include <algorithm>
#include <cmath>

#include "recompress/errors.hpp"

namespace recompress {

namespace {

/// Min-max normalize block scores and replicate each block x8 to pixels.
/// All-equal scores collapse to zero.
RealGrid normalize_and_replicate(const RealGrid& block_scores) {
    double lo = block_scores.data().front();
    double hi = lo;
    for (double v : block_scores.data()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    RealGrid out(block_scores.rows() * 8, block_scores.cols() * 8);
    if (hi > lo) {
        for (int r = 0; r < out.rows(); ++r)
            for (int c = 0; c < out.cols(); ++c)
                out.at(r, c) = (block_scores.at(r / 8, c / 8) - lo) / (hi - lo);
    }
    return out;
}

} // namespace

Heatmap instability_heatmap(const RecompressionTrace& trace) {
    if (trace.k < 1 || trace.planes.size() != static_cast<std::size_t>(trace.k) + 1)
        throw InvalidK("trace must contain k+1 planes with k >= 1");
    const int block_rows = trace.planes.front().block_rows();
    const int block_cols = trace.planes.front().block_cols();
    RealGrid raw(block_rows, block_cols);
    for (int step = 1; step <= trace.k; ++step) {
        const auto& cur = trace.planes[step].coeffs;
        const auto& prev = trace.planes[step - 1].coeffs;
        for (int r = 0; r < cur.rows(); ++r)
            for (int c = 0; c < cur.cols(); ++c)
                if (cur.at(r, c) != prev.at(r, c)) raw.at(r / 8, c / 8) += 1.0;
    }
    for (double& v : raw.data()) v /= 64.0 * trace.k;
    return Heatmap{normalize_and_replicate(raw), HeatmapOrigin::Instability};
}

Heatmap residual_heatmap(const ResidualPlane& residual) {
    if (residual.values.rows() % 8 != 0 || residual.values.cols() % 8 != 0 ||
        residual.values.empty())
        throw ShapeMismatch("residual plane must be block aligned");
    RealGrid raw(residual.values.rows() / 8, residual.values.cols() / 8);
    for (int r = 0; r < residual.values.rows(); ++r)
        for (int c = 0; c < residual.values.cols(); ++c)
            raw.at(r / 8, c / 8) += std::fabs(residual.values.at(r, c)) / 64.0;
    return Heatmap{normalize_and_replicate(raw), HeatmapOrigin::Residual};
}

Heatmap adaptive_aggregate(const Heatmap& a, const Heatmap& b) {
    if (!a.values.same_shape(b.values))
        throw ShapeMismatch("heatmaps must share one geometry");
    const double max_a = image_level_score(a);
    const double max_b = image_level_score(b);
    const Heatmap& main = (max_b > max_a) ? b : a;
    const Heatmap& secondary = (max_b > max_a) ? a : b;
    const double weight = std::max(max_a, max_b);
    Heatmap out;
    out.origin = main.origin;
    out.values = RealGrid(a.values.rows(), a.values.cols());
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        double v = weight * main.values.data()[i] + (1.0 - weight) * secondary.values.data()[i];
        out.values.data()[i] = std::clamp(v, 0.0, 1.0);
    }
    return out;
}

BinaryMask binarize(const Heatmap& h, double threshold) {
    if (threshold < 0.0 || threshold > 1.0)
        throw InvalidArgument("binarize threshold must lie in [0, 1]");
    BinaryMask mask;
    mask.pixels = ByteGrid(h.values.rows(), h.values.cols());
    for (std::size_t i = 0; i < h.values.size(); ++i)
        mask.pixels.data()[i] = h.values.data()[i] >= threshold ? 1 : 0;
    return mask;
}

double image_level_score(const Heatmap& h) {
    double best = 0.0;
    for (double v : h.values.data()) best = std::max(best, v);
    return best;
}

Heatmap crop_heatmap(const Heatmap& h, int rows, int cols) {
    if (rows > h.values.rows() || cols > h.values.cols() || rows < 1 || cols < 1)
        throw ShapeMismatch("crop window exceeds heatmap bounds");
    Heatmap out;
    out.origin = h.origin;
    out.values = RealGrid(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            out.values.at(r, c) = h.values.at(r, c);
    return out;
}

} // namespace recompress
