#include "recompress/jpeg_parser.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include "recompress/errors.hpp"

namespace recompress {

namespace {

// zigzag index -> natural (row-major) index
constexpr std::array<int, 64> kZigzagToNatural = {
    0,  1,  8,  16, 9,  2,  3,  10, //
    17, 24, 32, 25, 18, 11, 4,  5,  //
    12, 19, 26, 33, 40, 48, 41, 34, //
    27, 20, 13, 6,  7,  14, 21, 28, //
    35, 42, 49, 56, 57, 50, 43, 36, //
    29, 22, 15, 23, 30, 37, 44, 51, //
    58, 59, 52, 45, 38, 31, 39, 46, //
    53, 60, 61, 54, 47, 55, 62, 63,
};

// Marker bytes (second byte of the 0xFF xx pair).
enum : std::uint8_t {
    M_SOF0 = 0xC0, M_SOF1 = 0xC1, M_SOF2 = 0xC2, M_SOF3 = 0xC3,
    M_DHT  = 0xC4, M_SOF5 = 0xC5, M_SOF6 = 0xC6, M_SOF7 = 0xC7,
    M_JPG  = 0xC8, M_SOF9 = 0xC9, M_SOF10 = 0xCA, M_SOF11 = 0xCB,
    M_DAC  = 0xCC, M_SOF13 = 0xCD, M_SOF14 = 0xCE, M_SOF15 = 0xCF,
    M_RST0 = 0xD0, M_RST7 = 0xD7,
    M_SOI  = 0xD8, M_EOI = 0xD9, M_SOS = 0xDA, M_DQT = 0xDB,
    M_DNL  = 0xDC, M_DRI = 0xDD,
    M_APP0 = 0xE0, M_APP15 = 0xEF, M_COM = 0xFE,
};

struct ByteReader {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;

    bool eof() const { return pos >= bytes.size(); }
    std::size_t remaining() const { return bytes.size() - pos; }

    std::uint8_t u8() {
        if (pos >= bytes.size()) throw CorruptStream("unexpected end of file");
        return bytes[pos++];
    }
    std::uint16_t u16() {
        const std::uint16_t hi = u8();
        return static_cast<std::uint16_t>((hi << 8) | u8());
    }
    void skip(std::size_t n) {
        if (n > remaining()) throw CorruptStream("segment extends past end of file");
        pos += n;
    }
};

// Canonical Huffman table built from the DHT BITS/HUFFVAL lists.
// Decoding walks code lengths 1..16 with the standard mincode/maxcode scheme.
struct HuffTable {
    bool defined = false;
    std::array<std::int32_t, 17> mincode{};
    std::array<std::int32_t, 17> maxcode{}; // -1 where no codes of that length
    std::array<int, 17> valptr{};
    std::array<std::uint8_t, 256> values{};
    int value_count = 0;

    void build(const std::array<int, 17>& counts, const std::uint8_t* vals, int total) {
        value_count = total;
        std::memcpy(values.data(), vals, static_cast<std::size_t>(total));
        int code = 0, k = 0;
        for (int len = 1; len <= 16; ++len) {
            valptr[len] = k;
            mincode[len] = code;
            code += counts[len];
            k += counts[len];
            maxcode[len] = counts[len] ? code - 1 : -1;
            if (code > (1 << len))
                throw CorruptStream("oversubscribed huffman table");
            code <<= 1;
        }
        defined = true;
    }
};

// Entropy-coded segment reader: MSB-first bits with 0xFF00 unstuffing.
// Stops at any marker; restart markers are consumed explicitly.
struct BitReader {
    ByteReader& in;
    std::uint32_t bit_buffer = 0;
    int bit_count = 0;
    bool marker_pending = false;
    std::uint8_t pending_marker = 0;

    explicit BitReader(ByteReader& reader) : in(reader) {}

    bool fill() {
        while (bit_count <= 24) {
            if (marker_pending || in.eof()) return bit_count > 0;
            std::uint8_t byte = in.u8();
            if (byte == 0xFF) {
                if (in.eof()) {
                    --in.pos; // leave the bare 0xFF for the marker loop to reject
                    return bit_count > 0;
                }
                const std::uint8_t next = in.u8();
                if (next == 0x00) {
                    // stuffed data byte
                } else if (next == 0xFF) {
                    // fill byte; re-examine following byte
                    --in.pos;
                    continue;
                } else {
                    marker_pending = true;
                    pending_marker = next;
                    return bit_count > 0;
                }
            }
            bit_buffer = (bit_buffer << 8) | byte;
            bit_count += 8;
        }
        return true;
    }

    int next_bit() {
        if (bit_count == 0 && !fill())
            throw CorruptStream("entropy-coded segment truncated");
        if (bit_count == 0)
            throw CorruptStream("entropy-coded segment truncated");
        --bit_count;
        return (bit_buffer >> bit_count) & 1;
    }

    /// SSSS-bit magnitude field.
    std::int32_t receive(int ssss) {
        std::int32_t v = 0;
        for (int i = 0; i < ssss; ++i) v = (v << 1) | next_bit();
        return v;
    }

    void byte_align() { bit_count = 0; bit_buffer = 0; }

    /// Consume an expected restart marker and return its index (0..7).
    int take_restart_marker() {
        byte_align();
        if (!marker_pending) {
            // marker not yet scanned; it must be the very next bytes
            if (in.remaining() < 2 || in.u8() != 0xFF)
                throw CorruptStream("expected restart marker");
            pending_marker = in.u8();
            marker_pending = true;
        }
        if (pending_marker < M_RST0 || pending_marker > M_RST7)
            throw CorruptStream("expected restart marker, found another marker");
        const int idx = pending_marker - M_RST0;
        marker_pending = false;
        return idx;
    }
};

int huff_decode(BitReader& bits, const HuffTable& table) {
    std::int32_t code = bits.next_bit();
    for (int len = 1; len <= 16; ++len) {
        if (table.maxcode[len] >= 0 && code <= table.maxcode[len] && code >= table.mincode[len]) {
            const int index = table.valptr[len] + (code - table.mincode[len]);
            if (index >= table.value_count)
                throw CorruptStream("huffman code indexes past value table");
            return table.values[static_cast<std::size_t>(index)];
        }
        if (len == 16) break;
        code = (code << 1) | bits.next_bit();
    }
    throw CorruptStream("invalid huffman code");
}

/// JPEG EXTEND(): map an SSSS-bit magnitude to its signed value.
std::int32_t extend(std::int32_t v, int ssss) {
    if (ssss == 0) return 0;
    return v < (1 << (ssss - 1)) ? v - (1 << ssss) + 1 : v;
}

struct Component {
    int id = 0;
    int h = 1, v = 1;
    int tq = 0;          // quantization table id
    int td = 0, ta = 0;  // huffman table ids (DC, AC)
    int width_in_blocks = 0;
    int height_in_blocks = 0;
    bool decoded = false;
    std::int32_t dc_pred = 0;
    IntGrid blocks;      // only allocated for the luma component
    bool keep = false;
};

struct Frame {
    int precision = 0;
    int width = 0, height = 0;
    std::vector<Component> components;
    int h_max = 1, v_max = 1;
};

std::string sampling_descriptor(const Frame& frame) {
    if (frame.components.size() == 1) return "gray";
    if (frame.components.size() == 3) {
        const auto& y = frame.components[0];
        const auto& cb = frame.components[1];
        const auto& cr = frame.components[2];
        if (cb.h == 1 && cb.v == 1 && cr.h == 1 && cr.v == 1) {
            if (y.h == 1 && y.v == 1) return "4:4:4";
            if (y.h == 2 && y.v == 1) return "4:2:2";
            if (y.h == 2 && y.v == 2) return "4:2:0";
            if (y.h == 1 && y.v == 2) return "4:4:0";
        }
    }
    std::string s;
    for (const auto& c : frame.components) {
        if (!s.empty()) s += ",";
        s += std::to_string(c.h) + "x" + std::to_string(c.v);
    }
    return s;
}

int div_round_up(long a, long b) { return static_cast<int>((a + b - 1) / b); }

class Decoder {
public:
    explicit Decoder(std::span<const std::uint8_t> bytes) : reader_{bytes} {}

    CoefficientImage run() {
        if (reader_.remaining() < 2 || reader_.u8() != 0xFF || reader_.u8() != M_SOI)
            throw CorruptStream("missing SOI marker");
        bool done = false;
        while (!done) {
            const std::uint8_t marker = next_marker();
            switch (marker) {
            case M_SOF0:
                parse_sof();
                break;
            case M_SOF1: case M_SOF2: case M_SOF3: case M_SOF5:
            case M_SOF6: case M_SOF7: case M_SOF9: case M_SOF10:
            case M_SOF11: case M_SOF13: case M_SOF14: case M_SOF15:
                throw UnsupportedFormat("only baseline sequential (SOF0) JPEGs are supported");
            case M_DAC:
                throw UnsupportedFormat("arithmetic coding is not supported");
            case M_DHT:
                parse_dht();
                break;
            case M_DQT:
                parse_dqt();
                break;
            case M_DRI:
                parse_dri();
                break;
            case M_SOS:
                parse_sos_and_decode();
                if (all_components_decoded()) done = true;
                break;
            case M_EOI:
                if (!all_components_decoded())
                    throw CorruptStream("EOI before all components were decoded");
                done = true;
                break;
            case M_SOI:
                throw CorruptStream("unexpected nested SOI");
            case M_DNL:
                throw UnsupportedFormat("DNL-deferred image height is not supported");
            default:
                if ((marker >= M_APP0 && marker <= M_APP15) || marker == M_COM) {
                    skip_segment();
                } else if (marker >= M_RST0 && marker <= M_RST7) {
                    throw CorruptStream("restart marker outside entropy-coded segment");
                } else {
                    skip_segment(); // unknown-but-parameterized marker
                }
                break;
            }
        }
        return finish();
    }

private:
    ByteReader reader_;
    Frame frame_;
    bool have_frame_ = false;
    std::array<HuffTable, 4> dc_tables_;
    std::array<HuffTable, 4> ac_tables_;
    std::array<std::array<int, 64>, 4> quant_tables_{}; // natural order
    std::array<bool, 4> quant_defined_{};
    int restart_interval_ = 0;

    std::uint8_t next_marker() {
        // Skip fill bytes / stray bytes conservatively: require 0xFF then code.
        while (true) {
            std::uint8_t b = reader_.u8();
            if (b != 0xFF) throw CorruptStream("expected marker");
            std::uint8_t code = reader_.u8();
            while (code == 0xFF) code = reader_.u8();
            if (code == 0x00) throw CorruptStream("stuffed byte outside entropy-coded segment");
            return code;
        }
    }

    std::uint16_t segment_length() {
        const std::uint16_t len = reader_.u16();
        if (len < 2) throw CorruptStream("segment length too small");
        if (static_cast<std::size_t>(len) - 2 > reader_.remaining())
            throw CorruptStream("segment length exceeds file size");
        return len;
    }

    void skip_segment() { reader_.skip(static_cast<std::size_t>(segment_length()) - 2); }

    void parse_dqt() {
        const std::uint16_t len = segment_length();
        const std::size_t end = reader_.pos + len - 2;
        while (reader_.pos < end) {
            const std::uint8_t pq_tq = reader_.u8();
            const int precision = pq_tq >> 4;
            const int id = pq_tq & 0x0F;
            if (precision > 1) throw CorruptStream("bad DQT precision");
            if (id > 3) throw CorruptStream("bad DQT table id");
            for (int zz = 0; zz < 64; ++zz) {
                const int value = precision ? reader_.u16() : reader_.u8();
                if (value == 0) throw CorruptStream("zero quantization entry");
                quant_tables_[id][kZigzagToNatural[zz]] = value;
            }
            quant_defined_[id] = true;
        }
        if (reader_.pos != end) throw CorruptStream("DQT segment length mismatch");
    }

    void parse_dht() {
        const std::uint16_t len = segment_length();
        const std::size_t end = reader_.pos + len - 2;
        while (reader_.pos < end) {
            const std::uint8_t tc_th = reader_.u8();
            const int cls = tc_th >> 4;
            const int id = tc_th & 0x0F;
            if (cls > 1 || id > 3) throw CorruptStream("bad DHT class/id");
            std::array<int, 17> counts{};
            int total = 0;
            for (int len = 1; len <= 16; ++len) {
                counts[len] = reader_.u8();
                total += counts[len];
            }
            if (total > 256) throw CorruptStream("DHT declares more than 256 values");
            std::array<std::uint8_t, 256> vals{};
            for (int i = 0; i < total; ++i) vals[static_cast<std::size_t>(i)] = reader_.u8();
            (cls == 0 ? dc_tables_[id] : ac_tables_[id]).build(counts, vals.data(), total);
        }
        if (reader_.pos != end) throw CorruptStream("DHT segment length mismatch");
    }

    void parse_dri() {
        if (segment_length() != 4) throw CorruptStream("bad DRI length");
        restart_interval_ = reader_.u16();
    }

    void parse_sof() {
        if (have_frame_) throw CorruptStream("multiple SOF markers");
        const std::uint16_t len = segment_length();
        frame_.precision = reader_.u8();
        if (frame_.precision != 8)
            throw UnsupportedFormat("only 8-bit sample precision is supported");
        frame_.height = reader_.u16();
        frame_.width = reader_.u16();
        if (frame_.height == 0)
            throw UnsupportedFormat("DNL-deferred image height is not supported");
        if (frame_.width == 0) throw CorruptStream("zero image width");
        const int ncomp = reader_.u8();
        if (len != 8 + 3 * ncomp) throw CorruptStream("SOF length mismatch");
        if (ncomp != 1 && ncomp != 3)
            throw UnsupportedFormat("only grayscale and YCbCr component layouts are supported");
        frame_.components.resize(static_cast<std::size_t>(ncomp));
        for (auto& comp : frame_.components) {
            comp.id = reader_.u8();
            const std::uint8_t hv = reader_.u8();
            comp.h = hv >> 4;
            comp.v = hv & 0x0F;
            comp.tq = reader_.u8();
            if (comp.h < 1 || comp.h > 4 || comp.v < 1 || comp.v > 4)
                throw CorruptStream("bad sampling factors");
            if (comp.tq > 3) throw CorruptStream("bad quantization table selector");
            frame_.h_max = std::max(frame_.h_max, comp.h);
            frame_.v_max = std::max(frame_.v_max, comp.v);
        }
        for (auto& comp : frame_.components) {
            comp.width_in_blocks =
                div_round_up(static_cast<long>(frame_.width) * comp.h, frame_.h_max * 8L);
            comp.height_in_blocks =
                div_round_up(static_cast<long>(frame_.height) * comp.v, frame_.v_max * 8L);
        }
        // Fuzz guard: bound the luma allocation before touching memory.
        const auto& luma = frame_.components.front();
        const long luma_blocks =
            static_cast<long>(luma.width_in_blocks) * luma.height_in_blocks;
        if (luma_blocks > (1L << 20))
            throw UnsupportedFormat("image dimensions exceed the supported size");
        have_frame_ = true;
        frame_.components.front().keep = true;
        frame_.components.front().blocks =
            IntGrid(luma.height_in_blocks * 8, luma.width_in_blocks * 8);
    }

    bool all_components_decoded() const {
        if (!have_frame_) return false;
        for (const auto& comp : frame_.components)
            if (!comp.decoded) return false;
        return true;
    }

    void parse_sos_and_decode() {
        if (!have_frame_) throw CorruptStream("SOS before SOF");
        const std::uint16_t len = segment_length();
        const int ns = reader_.u8();
        if (ns < 1 || ns > 4) throw CorruptStream("bad scan component count");
        if (len != 6 + 2 * ns) throw CorruptStream("SOS length mismatch");
        std::vector<Component*> scan;
        scan.reserve(static_cast<std::size_t>(ns));
        for (int i = 0; i < ns; ++i) {
            const int cs = reader_.u8();
            const std::uint8_t tables = reader_.u8();
            Component* comp = nullptr;
            for (auto& c : frame_.components)
                if (c.id == cs) comp = &c;
            if (!comp) throw CorruptStream("scan references unknown component");
            if (comp->decoded) throw CorruptStream("component decoded twice");
            comp->td = tables >> 4;
            comp->ta = tables & 0x0F;
            if (comp->td > 3 || comp->ta > 3) throw CorruptStream("bad huffman selector");
            scan.push_back(comp);
        }
        const int ss = reader_.u8();
        const int se = reader_.u8();
        const int ah_al = reader_.u8();
        if (ss != 0 || se != 63 || ah_al != 0)
            throw UnsupportedFormat("spectral selection / successive approximation requires progressive mode");
        for (const Component* comp : scan) {
            if (!dc_tables_[comp->td].defined || !ac_tables_[comp->ta].defined)
                throw MissingTable("scan references an undefined huffman table");
            if (!quant_defined_[comp->tq])
                throw MissingTable("component references an undefined quantization table");
        }
        decode_scan(scan);
    }

    void decode_block(BitReader& bits, Component& comp, int block_row, int block_col) {
        CoeffBlock block{};
        const int t = huff_decode(bits, dc_tables_[comp.td]);
        if (t > 11) throw CorruptStream("DC magnitude category out of range");
        const std::int32_t diff = extend(bits.receive(t), t);
        comp.dc_pred += diff;
        if (comp.dc_pred > 2048 || comp.dc_pred < -2048)
            throw CorruptStream("accumulated DC exceeds the 8-bit coefficient bound");
        block[0] = comp.dc_pred;
        int k = 1;
        while (k < 64) {
            const int rs = huff_decode(bits, ac_tables_[comp.ta]);
            const int run = rs >> 4;
            const int ssss = rs & 0x0F;
            if (ssss == 0) {
                if (run == 0) break; // EOB
                if (run != 15) throw CorruptStream("invalid zero-run code in baseline scan");
                k += 16;
                continue;
            }
            if (ssss > 10) throw CorruptStream("AC magnitude category out of range");
            k += run;
            if (k > 63) throw CorruptStream("AC run extends past end of block");
            block[kZigzagToNatural[k]] = extend(bits.receive(ssss), ssss);
            ++k;
        }
        // MCU-padding blocks outside the component's nominal grid are decoded
        // for stream position but not stored.
        if (comp.keep && block_row < comp.height_in_blocks && block_col < comp.width_in_blocks) {
            for (int r = 0; r < 8; ++r)
                for (int c = 0; c < 8; ++c)
                    comp.blocks.at(block_row * 8 + r, block_col * 8 + c) = block[r * 8 + c];
        }
    }

    void decode_scan(std::vector<Component*>& scan) {
        BitReader bits(reader_);
        long mcus_wide, mcus_high;
        const bool interleaved = scan.size() > 1;
        if (interleaved) {
            mcus_wide = div_round_up(frame_.width, frame_.h_max * 8L);
            mcus_high = div_round_up(frame_.height, frame_.v_max * 8L);
        } else {
            mcus_wide = scan[0]->width_in_blocks;
            mcus_high = scan[0]->height_in_blocks;
        }
        for (Component* comp : scan) comp->dc_pred = 0;

        long mcus_until_restart =
            restart_interval_ > 0 ? restart_interval_ : 0;
        int expected_rst = 0;
        const long total_mcus = mcus_wide * mcus_high;
        for (long mcu = 0; mcu < total_mcus; ++mcu) {
            if (restart_interval_ > 0 && mcus_until_restart == 0) {
                const int idx = bits.take_restart_marker();
                if (idx != expected_rst)
                    throw CorruptStream("restart marker out of sequence");
                expected_rst = (expected_rst + 1) & 7;
                for (Component* comp : scan) comp->dc_pred = 0;
                mcus_until_restart = restart_interval_;
            }
            const long mcu_row = mcu / mcus_wide;
            const long mcu_col = mcu % mcus_wide;
            if (interleaved) {
                for (Component* comp : scan)
                    for (int by = 0; by < comp->v; ++by)
                        for (int bx = 0; bx < comp->h; ++bx)
                            decode_block(bits, *comp,
                                         static_cast<int>(mcu_row * comp->v + by),
                                         static_cast<int>(mcu_col * comp->h + bx));
            } else {
                decode_block(bits, *scan[0], static_cast<int>(mcu_row),
                             static_cast<int>(mcu_col));
            }
            if (restart_interval_ > 0) --mcus_until_restart;
        }
        for (Component* comp : scan) comp->decoded = true;
        // Leave the reader positioned at the next marker.
        bits.byte_align();
        if (bits.marker_pending) {
            reader_.pos -= 2; // un-consume the marker for the main loop
            if (reader_.bytes[reader_.pos] != 0xFF)
                throw CorruptStream("lost marker position after scan");
        }
    }

    CoefficientImage finish() {
        const Component& luma = frame_.components.front();
        if (!quant_defined_[luma.tq])
            throw MissingTable("luma quantization table was never defined");
        CoefficientImage out;
        out.y_coeffs = luma.blocks;
        for (int i = 0; i < 64; ++i) {
            const int v = quant_tables_[luma.tq][i];
            if (v > 255)
                throw UnsupportedFormat("16-bit quantization entries are not supported for baseline");
            out.q_luma.entries[i] = v;
        }
        out.pixel_width = frame_.width;
        out.pixel_height = frame_.height;
        out.sampling = sampling_descriptor(frame_);
        const int luma_width = div_round_up(static_cast<long>(frame_.width) * luma.h, frame_.h_max);
        const int luma_height = div_round_up(static_cast<long>(frame_.height) * luma.v, frame_.v_max);
        out.edge_padded = (luma_width % 8 != 0) || (luma_height % 8 != 0);
        return out;
    }
};

} // namespace

CoefficientImage parse_jpeg(std::span<const std::uint8_t> bytes) {
    Decoder decoder(bytes);
    return decoder.run();
}

CoefficientImage parse_jpeg_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IOFailure("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw IOFailure("read error on " + path.string());
    CoefficientImage image = parse_jpeg(bytes);
    image.source_path = path.string();
    return image;
}

std::array<std::int32_t, 64> dezigzag(std::span<const std::int32_t> zz) {
    if (zz.size() != 64)
        throw LengthMismatch("dezigzag expects exactly 64 entries, got " +
                             std::to_string(zz.size()));
    std::array<std::int32_t, 64> out{};
    for (int i = 0; i < 64; ++i) out[kZigzagToNatural[i]] = zz[i];
    return out;
}

std::array<std::int32_t, 64> rezigzag(std::span<const std::int32_t> natural) {
    if (natural.size() != 64)
        throw LengthMismatch("rezigzag expects exactly 64 entries, got " +
                             std::to_string(natural.size()));
    std::array<std::int32_t, 64> out{};
    for (int i = 0; i < 64; ++i) out[i] = natural[kZigzagToNatural[i]];
    return out;
}

const std::array<int, 64>& zigzag_to_natural_order() {
    static const std::array<int, 64> order = kZigzagToNatural;
    return order;
}

} // namespace recompress
