#include "recompress/corpus_sim.hpp"

#include <algorithm>
#include <cmath>

#include "recompress/errors.hpp"
#include "recompress/io.hpp"
#include "recompress/rng.hpp"
#include "recompress/threading.hpp"

namespace recompress {

TextureKind texture_kind_from_string(const std::string& name) {
    if (name == "noise") return TextureKind::Noise;
    if (name == "gradient") return TextureKind::Gradient;
    if (name == "mixed") return TextureKind::Mixed;
    throw InvalidArgument("unknown texture kind: " + name);
}

std::string to_string(TextureKind kind) {
    switch (kind) {
    case TextureKind::Noise: return "noise";
    case TextureKind::Gradient: return "gradient";
    case TextureKind::Mixed: return "mixed";
    }
    return "?";
}

void ForgerySpec::validate() const {
    if (width < 8 || height < 8 || width % 8 != 0 || height % 8 != 0)
        throw SpecInvalid("frame dimensions must be positive multiples of 8");
    if (qf < 1 || qf > 100) throw SpecInvalid("quality factor must lie in [1, 100]");
    if (splice_rect.x < 0 || splice_rect.y < 0 || splice_rect.width < 0 ||
        splice_rect.height < 0 || splice_rect.x + splice_rect.width > width ||
        splice_rect.y + splice_rect.height > height)
        throw SpecInvalid("splice rectangle must lie inside the frame");
    if (splice_rect.x % 8 != 0 || splice_rect.y % 8 != 0 || splice_rect.width % 8 != 0 ||
        splice_rect.height % 8 != 0)
        throw SpecInvalid("splice rectangle must align to the 8-px block grid");
}

namespace {

int clamp_byte(double v) {
    const double r = (v >= 0.0) ? std::floor(v + 0.5) : std::ceil(v - 0.5);
    if (r < 0.0) return 0;
    if (r > 255.0) return 255;
    return static_cast<int>(r);
}

/// High-contrast two-level noise. Nearly every block carries saturated pixels,
/// which keeps the recompression chain unstable at every quality factor.
void fill_noise(Rng& rng, IntGrid& px) {
    for (auto& v : px.data()) {
        if (rng.uniform01() < 0.5)
            v = clamp_byte(rng.uniform(0.0, 60.0));
        else
            v = clamp_byte(rng.uniform(195.0, 255.0));
    }
}

/// Smooth ramp with mild grain; calm content whose histograms stay clean.
void fill_gradient(Rng& rng, IntGrid& px) {
    const double angle = rng.uniform(0.0, 2.0 * std::acos(-1.0));
    const double gx = std::cos(angle), gy = std::sin(angle);
    const double sigma = rng.uniform(10.0, 20.0);
    for (int r = 0; r < px.rows(); ++r)
        for (int c = 0; c < px.cols(); ++c) {
            const double ramp = 96.0 + 64.0 * (gx * c / px.cols() + gy * r / px.rows());
            px.at(r, c) = clamp_byte(ramp + sigma * rng.normal());
        }
}

} // namespace

PixelPlane make_texture(TextureKind kind, int width, int height, std::uint64_t seed) {
    if (width < 8 || height < 8 || width % 8 != 0 || height % 8 != 0)
        throw NotBlockAligned("texture dimensions must be positive multiples of 8");
    Rng rng(seed);
    PixelPlane plane;
    plane.samples = IntGrid(height, width);
    switch (kind) {
    case TextureKind::Noise:
        fill_noise(rng, plane.samples);
        break;
    case TextureKind::Gradient:
        fill_gradient(rng, plane.samples);
        break;
    case TextureKind::Mixed: {
        // Cell-wise mixture: calm gradient with scattered high-activity blocks.
        IntGrid noisy(height, width), smooth(height, width);
        fill_gradient(rng, smooth);
        fill_noise(rng, noisy);
        for (int br = 0; br * 8 < height; ++br)
            for (int bc = 0; bc * 8 < width; ++bc) {
                const bool active = rng.uniform01() < 0.35;
                for (int r = 0; r < 8; ++r)
                    for (int c = 0; c < 8; ++c)
                        plane.samples.at(br * 8 + r, bc * 8 + c) =
                            active ? noisy.at(br * 8 + r, bc * 8 + c)
                                   : smooth.at(br * 8 + r, bc * 8 + c);
            }
        return plane;
    }
    }
    return plane;
}

CoefficientPlane simulate_single(const PixelPlane& pixels, int qf) {
    return compress_pixels(pixels, quality_to_qmatrix(qf));
}

CoefficientPlane simulate_double(const PixelPlane& pixels, int qf1, int qf2) {
    const CoefficientPlane first = simulate_single(pixels, qf1);
    return compress_pixels(decompress_plane(first), quality_to_qmatrix(qf2));
}

LabeledSample simulate_spliced_double(const ForgerySpec& spec) {
    spec.validate();
    const QMatrix q = quality_to_qmatrix(spec.qf);
    const PixelPlane scene = make_texture(spec.texture, spec.width, spec.height, spec.seed);

    // First save, then reopen.
    PixelPlane reopened = decompress_plane(compress_pixels(scene, q));

    // Paste fresh never-compressed content into the splice window.
    if (!spec.splice_rect.empty()) {
        const PixelPlane fresh = make_texture(TextureKind::Noise, spec.splice_rect.width,
                                              spec.splice_rect.height,
                                              derive_seed(spec.seed, 0x5f0e));
        for (int r = 0; r < spec.splice_rect.height; ++r)
            for (int c = 0; c < spec.splice_rect.width; ++c)
                reopened.samples.at(spec.splice_rect.y + r, spec.splice_rect.x + c) =
                    fresh.samples.at(r, c);
    }

    LabeledSample sample;
    sample.coeffs = compress_pixels(reopened, q); // second save
    sample.qf = spec.qf;
    sample.gt_mask.pixels = ByteGrid(spec.height, spec.width);
    for (int r = 0; r < spec.splice_rect.height; ++r)
        for (int c = 0; c < spec.splice_rect.width; ++c)
            sample.gt_mask.pixels.at(spec.splice_rect.y + r, spec.splice_rect.x + c) = 1;
    // A whole-frame splice leaves no twice-compressed block.
    const bool whole_frame = spec.splice_rect.width == spec.width &&
                             spec.splice_rect.height == spec.height;
    sample.label = whole_frame ? "single" : "double";
    return sample;
}

LabeledSample simulate_authentic(const ForgerySpec& spec) {
    spec.validate();
    const PixelPlane scene = make_texture(spec.texture, spec.width, spec.height, spec.seed);
    LabeledSample sample;
    sample.coeffs = simulate_single(scene, spec.qf);
    sample.qf = spec.qf;
    sample.gt_mask.pixels = ByteGrid(spec.height, spec.width);
    sample.label = "single";
    return sample;
}

ForgerySpec draw_spec(const CorpusConfig& config, int pair_index) {
    if (config.qf_min < 1 || config.qf_max > 100 || config.qf_min > config.qf_max)
        throw SpecInvalid("quality range must satisfy 1 <= qf_min <= qf_max <= 100");
    if (config.min_area_fraction <= 0.0 || config.max_area_fraction > 1.0 ||
        config.min_area_fraction > config.max_area_fraction)
        throw SpecInvalid("area fractions must satisfy 0 < min <= max <= 1");
    ForgerySpec spec;
    spec.width = config.width;
    spec.height = config.height;
    spec.texture = config.texture;
    spec.seed = derive_seed(config.seed, static_cast<std::uint64_t>(pair_index));
    Rng rng(derive_seed(spec.seed, 0xa11c));
    spec.qf = static_cast<int>(rng.uniform_int(config.qf_min, config.qf_max));

    const int blocks_w = config.width / 8;
    const int blocks_h = config.height / 8;
    const double total_blocks = static_cast<double>(blocks_w) * blocks_h;
    const double frac = rng.uniform(config.min_area_fraction, config.max_area_fraction);
    const int target = std::max(1, static_cast<int>(std::lround(frac * total_blocks)));
    // Factor the block budget into a roughly square window.
    int bw = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(target)))));
    bw = std::min(bw, blocks_w);
    int bh = std::min(std::max(1, target / bw), blocks_h);
    spec.splice_rect.width = bw * 8;
    spec.splice_rect.height = bh * 8;
    spec.splice_rect.x = 8 * static_cast<int>(rng.uniform_int(0, blocks_w - bw));
    spec.splice_rect.y = 8 * static_cast<int>(rng.uniform_int(0, blocks_h - bh));
    return spec;
}

std::vector<LabeledSample> generate_samples(const CorpusConfig& config) {
    if (config.n_samples < 1) throw SpecInvalid("sample count must be >= 1");
    std::vector<LabeledSample> samples(static_cast<std::size_t>(config.n_samples));
    parallel_for(config.n_samples, config.jobs, [&](int i) {
        const int pair = i / 2;
        const ForgerySpec spec = draw_spec(config, pair);
        LabeledSample sample =
            (i % 2 == 0) ? simulate_spliced_double(spec) : simulate_authentic(spec);
        char id[32];
        std::snprintf(id, sizeof id, "pair%04d_%s", pair, i % 2 == 0 ? "tampered" : "authentic");
        sample.id = id;
        samples[static_cast<std::size_t>(i)] = std::move(sample);
    });
    return samples;
}

std::vector<ManifestRow> generate_corpus(const CorpusConfig& config) {
    if (config.out_dir.empty()) throw IOFailure("output directory not set");
    std::error_code ec;
    std::filesystem::create_directories(config.out_dir / "samples", ec);
    std::filesystem::create_directories(config.out_dir / "masks", ec);
    if (ec) throw IOFailure("cannot create output directories under " + config.out_dir.string());

    const std::vector<LabeledSample> samples = generate_samples(config);
    std::vector<ManifestRow> rows;
    rows.reserve(samples.size());
    for (const auto& sample : samples) {
        ManifestRow row;
        row.id = sample.id;
        row.label = sample.label;
        row.qf = sample.qf;
        row.width = sample.coeffs.coeffs.cols();
        row.height = sample.coeffs.coeffs.rows();
        row.coeff_path = "samples/" + sample.id + ".dump";
        row.mask_path = "masks/" + sample.id + ".pgm";
        CoefficientDump dump;
        dump.plane = sample.coeffs;
        dump.pixel_width = row.width;
        dump.pixel_height = row.height;
        dump.sampling = "gray";
        dump.qf = sample.qf;
        write_coefficient_dump(config.out_dir / row.coeff_path, dump);
        write_pgm(config.out_dir / row.mask_path, mask_to_bytes(sample.gt_mask));
        rows.push_back(std::move(row));
    }
    write_manifest(config.out_dir / "manifest.csv", rows);
    return rows;
}

} // namespace recompress
