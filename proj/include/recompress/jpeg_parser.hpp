#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "recompress/block_codec.hpp"
#include "recompress/grid.hpp"

namespace recompress {

/// Luma-channel quantized DCT coefficients of a baseline JPEG, exactly as
/// entropy-coded: DC differences accumulated, AC runs expanded, blocks
/// de-zigzagged into natural order. No pixel reconstruction is performed.
struct CoefficientImage {
    IntGrid y_coeffs;       // block_rows*8 x block_cols*8 tiling of 8x8 blocks
    QMatrix q_luma;         // natural order
    int pixel_width = 0;
    int pixel_height = 0;
    std::string sampling;   // "gray", "4:4:4", "4:2:2", "4:2:0", or "h1x1,..."
    std::string source_path;
    bool edge_padded = false; // trailing blocks extend past the pixel extent

    int block_rows() const { return y_coeffs.rows() / 8; }
    int block_cols() const { return y_coeffs.cols() / 8; }

    CoefficientPlane to_plane() const { return CoefficientPlane{y_coeffs, q_luma}; }
};

/// Decode the luma coefficients of a baseline sequential (SOF0) JPEG.
/// Chroma blocks are entropy-decoded to keep stream position but discarded.
CoefficientImage parse_jpeg(std::span<const std::uint8_t> bytes);

CoefficientImage parse_jpeg_file(const std::filesystem::path& path);

/// Reorder a zigzag-serialized 64-vector into a natural-order 8x8 grid
/// (flattened row-major). Bijective.
std::array<std::int32_t, 64> dezigzag(std::span<const std::int32_t> zz);

/// Inverse of dezigzag.
std::array<std::int32_t, 64> rezigzag(std::span<const std::int32_t> natural);

/// zigzag_index -> natural_index lookup.
const std::array<int, 64>& zigzag_to_natural_order();

} // namespace recompress
