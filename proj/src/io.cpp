#include "recompress/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "recompress/corpus_sim.hpp"
#include "recompress/errors.hpp"

namespace recompress {

namespace {

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IOFailure("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw IOFailure("read error on " + path.string());
    return buffer.str();
}

} // namespace

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IOFailure("cannot open " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw IOFailure("write error on " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IOFailure("cannot move " + tmp.string() + " into place: " + ec.message());
}

void write_coefficient_dump(const std::filesystem::path& path, const CoefficientDump& dump) {
    std::ostringstream out;
    out << "# recompress coefficient dump v1\n";
    out << "# width " << dump.pixel_width << " height " << dump.pixel_height << "\n";
    out << "# sampling " << dump.sampling << "\n";
    if (dump.qf) out << "# qf " << *dump.qf << "\n";
    out << "# qmatrix";
    for (int i = 0; i < 64; ++i) out << ' ' << dump.plane.q.entries[i];
    out << "\n";
    const IntGrid& g = dump.plane.coeffs;
    for (int br = 0; br * 8 < g.rows(); ++br)
        for (int bc = 0; bc * 8 < g.cols(); ++bc) {
            out << bc << ' ' << br;
            for (int r = 0; r < 8; ++r)
                for (int c = 0; c < 8; ++c) out << ' ' << g.at(br * 8 + r, bc * 8 + c);
            out << "\n";
        }
    write_file_atomic(path, out.str());
}

CoefficientDump read_coefficient_dump(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    CoefficientDump dump;
    bool have_q = false;
    int max_bx = -1, max_by = -1;
    struct RawBlock {
        int bx, by;
        std::array<std::int32_t, 64> c;
    };
    std::vector<RawBlock> raw;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string key;
            hs >> key;
            if (key == "width") {
                hs >> dump.pixel_width;
                std::string k2;
                if (hs >> k2 && k2 == "height") hs >> dump.pixel_height;
            } else if (key == "sampling") {
                hs >> dump.sampling;
            } else if (key == "qf") {
                int v = 0;
                hs >> v;
                dump.qf = v;
            } else if (key == "qmatrix") {
                for (int i = 0; i < 64; ++i) {
                    if (!(hs >> dump.plane.q.entries[i]))
                        throw CorruptStream("qmatrix header needs 64 entries in " + path.string());
                }
                have_q = true;
            }
            continue;
        }
        std::istringstream ls(line);
        RawBlock block{};
        if (!(ls >> block.bx >> block.by))
            throw CorruptStream("malformed block line in " + path.string());
        for (int i = 0; i < 64; ++i)
            if (!(ls >> block.c[i]))
                throw CorruptStream("block line needs 64 coefficients in " + path.string());
        if (block.bx < 0 || block.by < 0)
            throw CorruptStream("negative block index in " + path.string());
        max_bx = std::max(max_bx, block.bx);
        max_by = std::max(max_by, block.by);
        raw.push_back(block);
    }
    if (!have_q) throw MissingTable("dump lacks a qmatrix header: " + path.string());
    if (raw.empty()) throw CorruptStream("dump has no blocks: " + path.string());
    if (static_cast<long>(max_bx + 1) * (max_by + 1) != static_cast<long>(raw.size()))
        throw CorruptStream("dump block grid is not rectangular: " + path.string());
    dump.plane.coeffs = IntGrid((max_by + 1) * 8, (max_bx + 1) * 8);
    for (const auto& block : raw)
        for (int r = 0; r < 8; ++r)
            for (int c = 0; c < 8; ++c)
                dump.plane.coeffs.at(block.by * 8 + r, block.bx * 8 + c) = block.c[r * 8 + c];
    if (dump.pixel_width == 0) dump.pixel_width = dump.plane.coeffs.cols();
    if (dump.pixel_height == 0) dump.pixel_height = dump.plane.coeffs.rows();
    return dump;
}

CoefficientDump dump_from_image(const CoefficientImage& image) {
    CoefficientDump dump;
    dump.plane = image.to_plane();
    dump.pixel_width = image.pixel_width;
    dump.pixel_height = image.pixel_height;
    dump.sampling = image.sampling;
    return dump;
}

void write_pgm(const std::filesystem::path& path, const ByteGrid& gray) {
    std::ostringstream out;
    out << "P5\n" << gray.cols() << ' ' << gray.rows() << "\n255\n";
    out.write(reinterpret_cast<const char*>(gray.data().data()),
              static_cast<std::streamsize>(gray.size()));
    write_file_atomic(path, out.str());
}

ByteGrid read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IOFailure("cannot open " + path.string());
    std::string magic;
    in >> magic;
    if (magic != "P5") throw CorruptStream("not a binary PGM: " + path.string());
    int width = 0, height = 0, maxval = 0;
    // Harvest the three header fields, skipping comments.
    int* fields[3] = {&width, &height, &maxval};
    for (int got = 0; got < 3;) {
        int ch = in.peek();
        if (ch == EOF) throw CorruptStream("truncated PGM header: " + path.string());
        if (std::isspace(ch)) {
            in.get();
            continue;
        }
        if (ch == '#') {
            std::string comment;
            std::getline(in, comment);
            continue;
        }
        if (!(in >> *fields[got])) throw CorruptStream("bad PGM header: " + path.string());
        ++got;
    }
    if (width <= 0 || height <= 0 || maxval != 255)
        throw CorruptStream("unsupported PGM geometry: " + path.string());
    in.get(); // single whitespace after maxval
    ByteGrid gray(height, width);
    in.read(reinterpret_cast<char*>(gray.data().data()),
            static_cast<std::streamsize>(gray.size()));
    if (in.gcount() != static_cast<std::streamsize>(gray.size()))
        throw CorruptStream("PGM pixel data truncated: " + path.string());
    return gray;
}

ByteGrid heatmap_to_bytes(const Heatmap& h) {
    ByteGrid out(h.values.rows(), h.values.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double scaled = std::floor(h.values.data()[i] * 255.0 + 0.5); // round half up
        out.data()[i] = static_cast<std::uint8_t>(std::min(255.0, std::max(0.0, scaled)));
    }
    return out;
}

ByteGrid mask_to_bytes(const BinaryMask& mask) {
    ByteGrid out(mask.pixels.rows(), mask.pixels.cols());
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data()[i] = mask.pixels.data()[i] ? 255 : 0;
    return out;
}

Heatmap heatmap_from_bytes(const ByteGrid& gray) {
    Heatmap h;
    h.origin = HeatmapOrigin::External;
    h.values = RealGrid(gray.rows(), gray.cols());
    for (std::size_t i = 0; i < gray.size(); ++i)
        h.values.data()[i] = gray.data()[i] / 255.0;
    return h;
}

BinaryMask mask_from_bytes(const ByteGrid& gray) {
    BinaryMask mask;
    mask.pixels = ByteGrid(gray.rows(), gray.cols());
    for (std::size_t i = 0; i < gray.size(); ++i)
        mask.pixels.data()[i] = gray.data()[i] >= 128 ? 1 : 0;
    return mask;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRow>& rows) {
    std::ostringstream out;
    out << "id,label,qf,width,height,coeff_path,mask_path\n";
    for (const auto& row : rows)
        out << row.id << ',' << row.label << ',' << row.qf << ',' << row.width << ','
            << row.height << ',' << row.coeff_path << ',' << row.mask_path << "\n";
    write_file_atomic(path, out.str());
}

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line) || line.rfind("id,label,qf", 0) != 0)
        throw CorruptStream("manifest header missing in " + path.string());
    std::vector<ManifestRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        ManifestRow row;
        std::string field;
        auto next = [&](const char* what) {
            if (!std::getline(ls, field, ','))
                throw CorruptStream(std::string("manifest row lacks ") + what + ": " + line);
            return field;
        };
        row.id = next("id");
        row.label = next("label");
        row.qf = std::stoi(next("qf"));
        row.width = std::stoi(next("width"));
        row.height = std::stoi(next("height"));
        row.coeff_path = next("coeff_path");
        row.mask_path = next("mask_path");
        rows.push_back(std::move(row));
    }
    return rows;
}

bool looks_like_jpeg(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IOFailure("cannot open " + path.string());
    unsigned char magic[2] = {0, 0};
    in.read(reinterpret_cast<char*>(magic), 2);
    return in.gcount() == 2 && magic[0] == 0xFF && magic[1] == 0xD8;
}

} // namespace recompress
