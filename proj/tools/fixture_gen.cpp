// Generates the committed parser fixtures: synthetic images encoded with
// libjpeg, plus coefficient dumps taken from libjpeg's own decode path
// (jpeg_read_coefficients), so the dumps are independent of this project's
// parser. Run once; outputs are committed under fixtures/.

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <jpeglib.h>

#include "recompress/rng.hpp"

namespace fs = std::filesystem;
using recompress::Rng;
using recompress::derive_seed;

namespace {

enum class Layout { Gray, Yuv444, Yuv422, Yuv420 };

const char* layout_name(Layout layout) {
    switch (layout) {
    case Layout::Gray: return "gray";
    case Layout::Yuv444: return "4:4:4";
    case Layout::Yuv422: return "4:2:2";
    case Layout::Yuv420: return "4:2:0";
    }
    return "?";
}

enum class Content { MidGray, Smooth, Detail, Saturated };

/// Value noise: random lattice, bilinear interpolation.
double value_noise(Rng& rng, std::vector<double>& lattice, int lw, int lh, double x, double y) {
    (void)rng;
    const int x0 = static_cast<int>(x), y0 = static_cast<int>(y);
    const int x1 = std::min(x0 + 1, lw - 1), y1 = std::min(y0 + 1, lh - 1);
    const double fx = x - x0, fy = y - y0;
    const double top = lattice[y0 * lw + x0] * (1 - fx) + lattice[y0 * lw + x1] * fx;
    const double bot = lattice[y1 * lw + x0] * (1 - fx) + lattice[y1 * lw + x1] * fx;
    return top * (1 - fy) + bot * fy;
}

std::vector<std::uint8_t> make_pixels(Content content, int width, int height, int channels,
                                      std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height * channels);
    if (content == Content::MidGray) {
        std::fill(pixels.begin(), pixels.end(), static_cast<std::uint8_t>(128));
        return pixels;
    }
    const int lw = std::max(2, width / 6), lh = std::max(2, height / 6);
    std::vector<double> lattice(static_cast<std::size_t>(lw) * lh);
    for (auto& v : lattice) v = rng.uniform(0.0, 255.0);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const double nx = static_cast<double>(x) / width * (lw - 1);
            const double ny = static_cast<double>(y) / height * (lh - 1);
            double base = value_noise(rng, lattice, lw, lh, nx, ny);
            if (content == Content::Detail) base = 0.6 * base + 0.4 * rng.uniform(0.0, 255.0);
            if (content == Content::Saturated)
                base = rng.uniform01() < 0.5 ? rng.uniform(0.0, 50.0) : rng.uniform(205.0, 255.0);
            for (int c = 0; c < channels; ++c) {
                double v = base;
                if (channels == 3) v += (c - 1) * rng.uniform(0.0, 24.0); // mild color cast
                if (v < 0) v = 0;
                if (v > 255) v = 255;
                pixels[(static_cast<std::size_t>(y) * width + x) * channels + c] =
                    static_cast<std::uint8_t>(v + 0.5);
            }
        }
    return pixels;
}

void encode_jpeg(const fs::path& path, const std::vector<std::uint8_t>& pixels, int width,
                 int height, Layout layout, int quality, int restart_interval) {
    jpeg_compress_struct cinfo;
    jpeg_error_mgr jerr;
    cinfo.err = jpeg_std_error(&jerr);
    jpeg_create_compress(&cinfo);

    FILE* out = std::fopen(path.string().c_str(), "wb");
    if (!out) {
        std::cerr << "cannot open " << path << "\n";
        std::exit(1);
    }
    jpeg_stdio_dest(&cinfo, out);

    const bool gray = layout == Layout::Gray;
    cinfo.image_width = static_cast<JDIMENSION>(width);
    cinfo.image_height = static_cast<JDIMENSION>(height);
    cinfo.input_components = gray ? 1 : 3;
    cinfo.in_color_space = gray ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    if (!gray) {
        int h = 1, v = 1;
        if (layout == Layout::Yuv422) { h = 2; v = 1; }
        if (layout == Layout::Yuv420) { h = 2; v = 2; }
        cinfo.comp_info[0].h_samp_factor = h;
        cinfo.comp_info[0].v_samp_factor = v;
        cinfo.comp_info[1].h_samp_factor = 1;
        cinfo.comp_info[1].v_samp_factor = 1;
        cinfo.comp_info[2].h_samp_factor = 1;
        cinfo.comp_info[2].v_samp_factor = 1;
    }
    cinfo.restart_interval = static_cast<unsigned>(restart_interval);

    jpeg_start_compress(&cinfo, TRUE);
    const int stride = width * cinfo.input_components;
    while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW row = const_cast<JSAMPROW>(&pixels[cinfo.next_scanline * stride]);
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    std::fclose(out);
}

void dump_coefficients(const fs::path& jpg_path, const fs::path& dump_path, Layout layout) {
    jpeg_decompress_struct cinfo;
    jpeg_error_mgr jerr;
    cinfo.err = jpeg_std_error(&jerr);
    jpeg_create_decompress(&cinfo);

    FILE* in = std::fopen(jpg_path.string().c_str(), "rb");
    if (!in) {
        std::cerr << "cannot reopen " << jpg_path << "\n";
        std::exit(1);
    }
    jpeg_stdio_src(&cinfo, in);
    jpeg_read_header(&cinfo, TRUE);
    jvirt_barray_ptr* arrays = jpeg_read_coefficients(&cinfo);

    const jpeg_component_info* luma = &cinfo.comp_info[0];
    const JQUANT_TBL* qtbl = cinfo.quant_tbl_ptrs[luma->quant_tbl_no];

    std::ofstream out(dump_path);
    out << "# recompress coefficient dump v1\n";
    out << "# width " << cinfo.image_width << " height " << cinfo.image_height << "\n";
    out << "# sampling " << layout_name(layout) << "\n";
    out << "# qmatrix";
    for (int i = 0; i < 64; ++i) out << ' ' << qtbl->quantval[i]; // natural order
    out << "\n";
    for (JDIMENSION by = 0; by < luma->height_in_blocks; ++by) {
        JBLOCKARRAY rows = (cinfo.mem->access_virt_barray)(
            reinterpret_cast<j_common_ptr>(&cinfo), arrays[0], by, 1, FALSE);
        for (JDIMENSION bx = 0; bx < luma->width_in_blocks; ++bx) {
            out << bx << ' ' << by;
            for (int i = 0; i < 64; ++i) out << ' ' << rows[0][bx][i]; // natural order
            out << "\n";
        }
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    std::fclose(in);
}

struct FixtureSpec {
    std::string name;
    int width, height, quality;
    Layout layout;
    Content content;
    int restart = 0;
};

} // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: fixture_gen <output-dir>\n";
        return 1;
    }
    const fs::path out_dir(argv[1]);
    fs::create_directories(out_dir);

    std::vector<FixtureSpec> specs;
    // One fixture per quality 50..100, cycling through geometry and content.
    const Layout layouts[4] = {Layout::Yuv420, Layout::Yuv444, Layout::Gray, Layout::Yuv422};
    const Content contents[3] = {Content::Smooth, Content::Detail, Content::Saturated};
    const int sizes[5][2] = {{64, 48}, {48, 64}, {80, 56}, {96, 96}, {64, 64}};
    for (int quality = 50; quality <= 100; ++quality) {
        const int i = quality - 50;
        FixtureSpec spec;
        spec.quality = quality;
        spec.layout = layouts[i % 4];
        spec.content = contents[i % 3];
        spec.width = sizes[i % 5][0];
        spec.height = sizes[i % 5][1];
        spec.name = "qf" + std::to_string(quality) + "_sweep";
        specs.push_back(spec);
    }
    // Edge cases: tiny frames, odd dimensions, restart markers.
    specs.push_back({"qf75_photo16", 16, 16, 75, Layout::Yuv444, Content::Smooth});
    specs.push_back({"qf80_gray8_flat", 8, 8, 80, Layout::Gray, Content::MidGray});
    specs.push_back({"qf50_gray8_flat", 8, 8, 50, Layout::Gray, Content::MidGray});
    specs.push_back({"qf80_odd65x41", 65, 41, 80, Layout::Yuv420, Content::Detail});
    specs.push_back({"qf70_odd50x30", 50, 30, 70, Layout::Yuv444, Content::Smooth});
    specs.push_back({"qf60_odd33x25_gray", 33, 25, 60, Layout::Gray, Content::Detail});
    specs.push_back({"qf80_restart2", 64, 48, 80, Layout::Yuv420, Content::Detail, 2});
    specs.push_back({"qf65_restart1", 48, 48, 65, Layout::Yuv444, Content::Smooth, 1});
    specs.push_back({"qf90_restart3_gray", 56, 40, 90, Layout::Gray, Content::Saturated, 3});

    std::uint64_t master = 0x52454353ULL; // fixture corpus seed
    int count = 0;
    for (const auto& spec : specs) {
        const int channels = spec.layout == Layout::Gray ? 1 : 3;
        const auto pixels = make_pixels(spec.content, spec.width, spec.height, channels,
                                        derive_seed(master, static_cast<std::uint64_t>(count)));
        const fs::path jpg = out_dir / (spec.name + ".jpg");
        const fs::path dump = out_dir / (spec.name + ".dump");
        encode_jpeg(jpg, pixels, spec.width, spec.height, spec.layout, spec.quality,
                    spec.restart);
        dump_coefficients(jpg, dump, spec.layout);
        ++count;
    }
    std::cout << "wrote " << count << " fixtures to " << out_dir << "\n";
    return 0;
}
