#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "recompress/block_codec.hpp"
#include "recompress/localization.hpp"

namespace recompress {

enum class TextureKind { Noise, Gradient, Mixed };

TextureKind texture_kind_from_string(const std::string& name);
std::string to_string(TextureKind kind);

/// Block-aligned rectangle, in pixels.
struct SpliceRect {
    int x = 0, y = 0, width = 0, height = 0;
    bool empty() const { return width == 0 || height == 0; }
};

/// Everything needed to synthesize one tampered sample deterministically.
struct ForgerySpec {
    int width = 128, height = 128; // multiples of 8
    int qf = 80;
    SpliceRect splice_rect;
    std::uint64_t seed = 0;
    TextureKind texture = TextureKind::Gradient;

    void validate() const;
};

/// A simulated sample: the final coefficient state, its ground truth, the
/// label ("single" = compressed once, "double" = background recompressed),
/// and the quality factor used throughout.
struct LabeledSample {
    std::string id;
    CoefficientPlane coeffs;
    BinaryMask gt_mask;
    std::string label; // "single" | "double"
    int qf = 0;
};

/// Deterministic texture synthesis in [0, 255].
PixelPlane make_texture(TextureKind kind, int width, int height, std::uint64_t seed);

/// Compress pixels once at the given quality factor.
CoefficientPlane simulate_single(const PixelPlane& pixels, int qf);

/// Compress at qf1, decompress, compress at qf2 (classic double compression).
CoefficientPlane simulate_double(const PixelPlane& pixels, int qf1, int qf2);

/// Same-QF splice forgery: the scene is saved once at spec.qf, reopened, the
/// splice window is overwritten with fresh never-compressed content, and the
/// frame is saved again at spec.qf. Background blocks end up double-compressed
/// and splice blocks single-compressed.
LabeledSample simulate_spliced_double(const ForgerySpec& spec);

/// Pairing authentic sample for a spec: the same scene compressed exactly once.
LabeledSample simulate_authentic(const ForgerySpec& spec);

struct CorpusConfig {
    int n_samples = 20;        // manifest rows; tampered/authentic pairs interleaved
    int qf_min = 50, qf_max = 99;
    std::uint64_t seed = 1;
    int width = 128, height = 128;
    double min_area_fraction = 0.005;
    double max_area_fraction = 0.015;
    TextureKind texture = TextureKind::Gradient;
    std::filesystem::path out_dir;
    int jobs = 1;
};

struct ManifestRow {
    std::string id;
    std::string label;
    int qf = 0;
    int width = 0, height = 0;
    std::string coeff_path; // relative to the manifest
    std::string mask_path;
};

/// Draw a forgery spec for pair index `i` under a corpus configuration.
ForgerySpec draw_spec(const CorpusConfig& config, int pair_index);

/// Generate samples on disk (coefficient dumps + mask images + manifest.csv).
/// Row 2i is pair i's tampered sample, row 2i+1 its authentic counterpart.
std::vector<ManifestRow> generate_corpus(const CorpusConfig& config);

/// In-memory variant used by tests and the self-run evaluator.
std::vector<LabeledSample> generate_samples(const CorpusConfig& config);

} // namespace recompress
