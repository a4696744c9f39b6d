#include "recompress/dct_features.hpp"

#include <cmath>
#include <cstdlib>

#include "recompress/errors.hpp"

namespace recompress {

int CoefficientHistogram::zero_interior_bins() const {
    int n = 0;
    for (int value = -threshold + 1; value <= threshold - 1; ++value)
        if (count(value) == 0) ++n;
    return n;
}

IntGrid clip_coeffs(const IntGrid& plane, int threshold) {
    if (threshold < 1) throw InvalidArgument("clip threshold must be >= 1");
    IntGrid out(plane.rows(), plane.cols());
    for (std::size_t i = 0; i < plane.size(); ++i) {
        std::int32_t v = plane.data()[i];
        if (v > threshold) v = threshold;
        if (v < -threshold) v = -threshold;
        out.data()[i] = v;
    }
    return out;
}

BinaryVolume binary_volume(const IntGrid& plane, int threshold) {
    if (threshold < 1) throw InvalidArgument("clip threshold must be >= 1");
    BinaryVolume volume;
    volume.threshold = threshold;
    volume.rows = plane.rows();
    volume.cols = plane.cols();
    volume.channels.assign(static_cast<std::size_t>(threshold) + 1,
                           ByteGrid(plane.rows(), plane.cols()));
    for (int r = 0; r < plane.rows(); ++r)
        for (int c = 0; c < plane.cols(); ++c) {
            int v = std::abs(plane.at(r, c)); // histogram symmetry folds the sign
            if (v > threshold) v = threshold;
            volume.channels[static_cast<std::size_t>(v)].at(r, c) = 1;
        }
    return volume;
}

CoefficientHistogram coefficient_histogram(const IntGrid& plane, int pos_row, int pos_col,
                                           int threshold) {
    if (pos_row < 0 || pos_row > 7 || pos_col < 0 || pos_col > 7)
        throw PositionOutOfRange("block position must lie in 0..7, got (" +
                                 std::to_string(pos_row) + "," + std::to_string(pos_col) + ")");
    if (threshold < 1) throw InvalidArgument("histogram threshold must be >= 1");
    CoefficientHistogram hist;
    hist.pos_row = pos_row;
    hist.pos_col = pos_col;
    hist.threshold = threshold;
    hist.bins.assign(static_cast<std::size_t>(2 * threshold) + 1, 0);
    for (int r = pos_row; r < plane.rows(); r += 8)
        for (int c = pos_col; c < plane.cols(); c += 8) {
            const std::int32_t v = plane.at(r, c);
            ++hist.total_blocks;
            if (v < -threshold || v > threshold)
                ++hist.out_of_range;
            else
                ++hist.bins[static_cast<std::size_t>(v + threshold)];
        }
    return hist;
}

FeatureVolumeSet feature_volume_set(const BinaryVolume& volume, const QMatrix& q,
                                    const ResidualPlane& residual, ResidualGuide guide) {
    if (residual.values.rows() != volume.rows || residual.values.cols() != volume.cols)
        throw ShapeMismatch("residual plane shape does not match the binary volume");
    if (volume.rows % 8 != 0 || volume.cols % 8 != 0)
        throw ShapeMismatch("binary volume dimensions must be multiples of 8 to tile q");
    FeatureVolumeSet set;
    set.threshold = volume.threshold;
    const std::size_t nch = volume.channels.size();
    set.quantized.assign(nch, RealGrid(volume.rows, volume.cols));
    set.dequantized.assign(nch, RealGrid(volume.rows, volume.cols));
    set.residual_guided.assign(nch, RealGrid(volume.rows, volume.cols));
    for (std::size_t t = 0; t < nch; ++t) {
        const ByteGrid& ch = volume.channels[t];
        for (int r = 0; r < volume.rows; ++r)
            for (int c = 0; c < volume.cols; ++c) {
                const double bit = ch.at(r, c);
                set.quantized[t].at(r, c) = bit;
                set.dequantized[t].at(r, c) = bit * q.at(r % 8, c % 8);
                double g = residual.values.at(r, c);
                if (guide == ResidualGuide::Magnitude) g = std::fabs(g);
                set.residual_guided[t].at(r, c) = bit * g;
            }
    }
    return set;
}

std::vector<RealGrid> block_to_channel_reshape(const RealGrid& plane) {
    if (plane.rows() % 8 != 0 || plane.cols() % 8 != 0 || plane.empty())
        throw NotBlockAligned("reshape requires dimensions that are positive multiples of 8");
    const int br = plane.rows() / 8;
    const int bc = plane.cols() / 8;
    std::vector<RealGrid> channels(64, RealGrid(br, bc));
    for (int r = 0; r < plane.rows(); ++r)
        for (int c = 0; c < plane.cols(); ++c)
            channels[static_cast<std::size_t>((r % 8) * 8 + (c % 8))].at(r / 8, c / 8) =
                plane.at(r, c);
    return channels;
}

RealGrid channel_to_block_reshape(const std::vector<RealGrid>& channels) {
    if (channels.size() != 64)
        throw LengthMismatch("expected 64 channels, got " + std::to_string(channels.size()));
    const int br = channels.front().rows();
    const int bc = channels.front().cols();
    for (const auto& ch : channels)
        if (ch.rows() != br || ch.cols() != bc)
            throw ShapeMismatch("channel grids must share one shape");
    RealGrid plane(br * 8, bc * 8);
    for (int ch = 0; ch < 64; ++ch)
        for (int r = 0; r < br; ++r)
            for (int c = 0; c < bc; ++c)
                plane.at(r * 8 + ch / 8, c * 8 + ch % 8) = channels[static_cast<std::size_t>(ch)].at(r, c);
    return plane;
}

} // namespace recompress
