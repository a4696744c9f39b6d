#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "recompress/block_codec.hpp"
#include "recompress/grid.hpp"
#include "recompress/jpeg_parser.hpp"
#include "recompress/localization.hpp"

namespace recompress {

struct ManifestRow; // corpus_sim.hpp

/// Text coefficient dump. Header lines start with '#', then one line per
/// block: "bx by c0 .. c63" with coefficients in natural order, signed decimal.
struct CoefficientDump {
    CoefficientPlane plane;
    int pixel_width = 0;
    int pixel_height = 0;
    std::string sampling = "gray";
    std::optional<int> qf;
};

void write_coefficient_dump(const std::filesystem::path& path, const CoefficientDump& dump);
CoefficientDump read_coefficient_dump(const std::filesystem::path& path);

CoefficientDump dump_from_image(const CoefficientImage& image);

/// 8-bit binary PGM (P5).
void write_pgm(const std::filesystem::path& path, const ByteGrid& gray);
ByteGrid read_pgm(const std::filesystem::path& path);

/// Heatmap values scaled by 255, round half up.
ByteGrid heatmap_to_bytes(const Heatmap& h);
/// White (255) = tampered.
ByteGrid mask_to_bytes(const BinaryMask& mask);
Heatmap heatmap_from_bytes(const ByteGrid& gray);
BinaryMask mask_from_bytes(const ByteGrid& gray);

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRow>& rows);
std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);

/// Write bytes through a temp file and rename, so partial output never lands
/// under the final name.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

bool looks_like_jpeg(const std::filesystem::path& path);

} // namespace recompress
