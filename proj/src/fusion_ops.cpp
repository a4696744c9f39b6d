#include "recompress/fusion_ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"

#include "recompress/errors.hpp"

namespace recompress {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_conv1x1(const Conv1x1& conv, int in_channels, const char* what) {
    if (conv.in_channels != in_channels)
        throw ShapeMismatch(std::string(what) + ": expected " + std::to_string(in_channels) +
                            " input channels, got " + std::to_string(conv.in_channels));
    if (conv.weight.size() !=
            static_cast<std::size_t>(conv.in_channels) * conv.out_channels ||
        conv.bias.size() != static_cast<std::size_t>(conv.out_channels))
        throw ShapeMismatch(std::string(what) + ": weight/bias sizes are inconsistent");
}

std::vector<double> apply_linear(const Linear& layer, const std::vector<double>& in,
                                 const char* what) {
    if (static_cast<int>(in.size()) != layer.in_dim ||
        layer.weight.size() != static_cast<std::size_t>(layer.in_dim) * layer.out_dim ||
        layer.bias.size() != static_cast<std::size_t>(layer.out_dim))
        throw ShapeMismatch(std::string(what) + ": linear layer shapes are inconsistent");
    std::vector<double> out(static_cast<std::size_t>(layer.out_dim), 0.0);
    for (int o = 0; o < layer.out_dim; ++o) {
        double acc = layer.bias[static_cast<std::size_t>(o)];
        for (int i = 0; i < layer.in_dim; ++i)
            acc += layer.weight[static_cast<std::size_t>(o) * layer.in_dim + i] * in[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(o)] = acc;
    }
    return out;
}

} // namespace

std::vector<double> channel_attention_gate(const FeatureTensor& f_hi,
                                           const ChannelAttentionParams& p) {
    check_conv1x1(p.proj, f_hi.channels, "channel attention projection");
    const int cp = p.proj.out_channels;
    if (p.reduction < 1 || cp % p.reduction != 0)
        throw ShapeMismatch("reduction must divide the projected channel count");
    // GAP(conv1x1(F)): pooling commutes with the 1x1 projection, but keep the
    // literal order so the forward pass matches an external implementation.
    std::vector<double> projected_mean(static_cast<std::size_t>(cp), 0.0);
    const double inv_area = 1.0 / (static_cast<double>(f_hi.height) * f_hi.width);
    for (int y = 0; y < f_hi.height; ++y)
        for (int x = 0; x < f_hi.width; ++x)
            for (int o = 0; o < cp; ++o) {
                double acc = 0.0;
                for (int c = 0; c < f_hi.channels; ++c)
                    acc += p.proj.weight[static_cast<std::size_t>(o) * f_hi.channels + c] *
                           f_hi.at(y, x, c);
                projected_mean[static_cast<std::size_t>(o)] += (acc + p.proj.bias[static_cast<std::size_t>(o)]) * inv_area;
            }
    std::vector<double> squeezed =
        apply_linear(p.excite_down, projected_mean, "channel attention excite_down");
    std::vector<double> excited = apply_linear(p.excite_up, squeezed, "channel attention excite_up");
    for (double& v : excited) v = sigmoid(v);
    return excited;
}

FeatureTensor channel_attention(const FeatureTensor& f_hi, const FeatureTensor& f_lo,
                                const ChannelAttentionParams& p) {
    const std::vector<double> gate = channel_attention_gate(f_hi, p);
    if (static_cast<int>(gate.size()) != f_lo.channels)
        throw ShapeMismatch("channel gate width does not match the gated tensor");
    FeatureTensor out(f_lo.height, f_lo.width, f_lo.channels);
    for (int y = 0; y < f_lo.height; ++y)
        for (int x = 0; x < f_lo.width; ++x)
            for (int c = 0; c < f_lo.channels; ++c)
                out.at(y, x, c) = gate[static_cast<std::size_t>(c)] * f_lo.at(y, x, c);
    return out;
}

RealGrid spatial_attention_gate(const FeatureTensor& f_prev, const SpatialAttentionParams& p) {
    check_conv1x1(p.spatial_conv, 2, "spatial attention conv");
    if (p.spatial_conv.out_channels != 1)
        throw ShapeMismatch("spatial attention conv must emit one channel");
    RealGrid gate(f_prev.height, f_prev.width);
    for (int y = 0; y < f_prev.height; ++y)
        for (int x = 0; x < f_prev.width; ++x) {
            double mx = f_prev.at(y, x, 0);
            double avg = 0.0;
            for (int c = 0; c < f_prev.channels; ++c) {
                mx = std::max(mx, f_prev.at(y, x, c));
                avg += f_prev.at(y, x, c);
            }
            avg /= f_prev.channels;
            const double z = p.spatial_conv.weight[0] * mx + p.spatial_conv.weight[1] * avg +
                             p.spatial_conv.bias[0];
            gate.at(y, x) = sigmoid(z);
        }
    return gate;
}

FeatureTensor spatial_attention(const FeatureTensor& f_prev, const FeatureTensor& f_cur,
                                const SpatialAttentionParams& p) {
    if (!f_prev.same_spatial(f_cur))
        throw ShapeMismatch("spatial attention requires matching H x W");
    const RealGrid gate = spatial_attention_gate(f_prev, p);
    FeatureTensor out(f_cur.height, f_cur.width, f_cur.channels);
    for (int y = 0; y < f_cur.height; ++y)
        for (int x = 0; x < f_cur.width; ++x)
            for (int c = 0; c < f_cur.channels; ++c)
                out.at(y, x, c) = gate.at(y, x) * f_cur.at(y, x, c);
    return out;
}

namespace {

FeatureTensor conv2d_same(const FeatureTensor& f, const Conv2d& conv) {
    if (conv.in_channels != f.channels)
        throw ShapeMismatch("conv2d input channel mismatch");
    if (conv.kernel < 1 || conv.kernel % 2 == 0)
        throw InvalidArgument("conv2d kernel must be odd");
    const std::size_t expected = static_cast<std::size_t>(conv.out_channels) *
                                 conv.in_channels * conv.kernel * conv.kernel;
    if (conv.weight.size() != expected ||
        conv.bias.size() != static_cast<std::size_t>(conv.out_channels))
        throw ShapeMismatch("conv2d weight/bias sizes are inconsistent");
    const int half = conv.kernel / 2;
    FeatureTensor out(f.height, f.width, conv.out_channels);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x)
            for (int o = 0; o < conv.out_channels; ++o) {
                double acc = conv.bias[static_cast<std::size_t>(o)];
                for (int c = 0; c < conv.in_channels; ++c)
                    for (int ky = -half; ky <= half; ++ky)
                        for (int kx = -half; kx <= half; ++kx) {
                            const int sy = y + ky * conv.dilation;
                            const int sx = x + kx * conv.dilation;
                            if (sy < 0 || sy >= f.height || sx < 0 || sx >= f.width)
                                continue; // zero padding
                            const std::size_t widx =
                                ((static_cast<std::size_t>(o) * conv.in_channels + c) *
                                     conv.kernel +
                                 (ky + half)) *
                                    conv.kernel +
                                (kx + half);
                            acc += conv.weight[widx] * f.at(sy, sx, c);
                        }
                out.at(y, x, o) = acc;
            }
    return out;
}

} // namespace

FeatureTensor aspp_forward(const FeatureTensor& f, const AsppParams& p) {
    for (int i = 0; i < 3; ++i) {
        if (p.branches[static_cast<std::size_t>(i)].dilation < 1)
            throw InvalidArgument("dilation rates must be positive");
        for (int j = i + 1; j < 3; ++j)
            if (p.branches[static_cast<std::size_t>(i)].dilation ==
                p.branches[static_cast<std::size_t>(j)].dilation)
                throw InvalidArgument("dilation rates must be distinct");
    }
    const int cb = p.branches[0].out_channels;
    for (const auto& br : p.branches)
        if (br.out_channels != cb)
            throw ShapeMismatch("ASPP branches must share one output width");
    check_conv1x1(p.gap_proj, f.channels, "ASPP pooled branch");
    if (p.gap_proj.out_channels != cb)
        throw ShapeMismatch("ASPP pooled branch width must match the conv branches");

    std::vector<FeatureTensor> parts;
    parts.reserve(4);
    for (const auto& br : p.branches) parts.push_back(conv2d_same(f, br));

    // Pooled branch: 1x1 conv on the channel means, broadcast spatially.
    std::vector<double> mean(static_cast<std::size_t>(f.channels), 0.0);
    const double inv_area = 1.0 / (static_cast<double>(f.height) * f.width);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x)
            for (int c = 0; c < f.channels; ++c) mean[static_cast<std::size_t>(c)] += f.at(y, x, c) * inv_area;
    FeatureTensor pooled(f.height, f.width, cb);
    for (int o = 0; o < cb; ++o) {
        double acc = p.gap_proj.bias[static_cast<std::size_t>(o)];
        for (int c = 0; c < f.channels; ++c)
            acc += p.gap_proj.weight[static_cast<std::size_t>(o) * f.channels + c] * mean[static_cast<std::size_t>(c)];
        for (int y = 0; y < f.height; ++y)
            for (int x = 0; x < f.width; ++x) pooled.at(y, x, o) = acc;
    }
    parts.push_back(std::move(pooled));

    const FeatureTensor stacked = concat_channels(parts);
    check_conv1x1(p.fuse, stacked.channels, "ASPP fuse conv");
    FeatureTensor out(f.height, f.width, p.fuse.out_channels);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x)
            for (int o = 0; o < p.fuse.out_channels; ++o) {
                double acc = p.fuse.bias[static_cast<std::size_t>(o)];
                for (int c = 0; c < stacked.channels; ++c)
                    acc += p.fuse.weight[static_cast<std::size_t>(o) * stacked.channels + c] *
                           stacked.at(y, x, c);
                out.at(y, x, o) = acc;
            }
    return out;
}

FeatureTensor bilinear_upsample(const FeatureTensor& f, int factor) {
    if (factor < 1) throw InvalidArgument("upsample factor must be >= 1");
    if (factor == 1) return f;
    FeatureTensor out(f.height * factor, f.width * factor, f.channels);
    for (int y = 0; y < out.height; ++y) {
        const double sy = std::clamp((y + 0.5) / factor - 0.5, 0.0, static_cast<double>(f.height - 1));
        const int y0 = static_cast<int>(std::floor(sy));
        const int y1 = std::min(y0 + 1, f.height - 1);
        const double wy = sy - y0;
        for (int x = 0; x < out.width; ++x) {
            const double sx = std::clamp((x + 0.5) / factor - 0.5, 0.0, static_cast<double>(f.width - 1));
            const int x0 = static_cast<int>(std::floor(sx));
            const int x1 = std::min(x0 + 1, f.width - 1);
            const double wx = sx - x0;
            for (int c = 0; c < f.channels; ++c) {
                const double top = (1.0 - wx) * f.at(y0, x0, c) + wx * f.at(y0, x1, c);
                const double bot = (1.0 - wx) * f.at(y1, x0, c) + wx * f.at(y1, x1, c);
                out.at(y, x, c) = (1.0 - wy) * top + wy * bot;
            }
        }
    }
    return out;
}

FeatureTensor concat_channels(const std::vector<FeatureTensor>& parts) {
    if (parts.empty()) throw InvalidArgument("nothing to concatenate");
    int total = 0;
    for (const auto& part : parts) {
        if (!part.same_spatial(parts.front()))
            throw ShapeMismatch("channel concat requires matching H x W");
        total += part.channels;
    }
    FeatureTensor out(parts.front().height, parts.front().width, total);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            int offset = 0;
            for (const auto& part : parts) {
                for (int c = 0; c < part.channels; ++c)
                    out.at(y, x, offset + c) = part.at(y, x, c);
                offset += part.channels;
            }
        }
    return out;
}

FeatureTensor fusion_pipeline(const std::array<FeatureTensor, 4>& scales,
                              const FusionParams& params) {
    // Scale n has twice the resolution of scale n+1; scale 4 stays channel-
    // ungated, scale 1 stays spatially ungated.
    for (int n = 0; n < 3; ++n) {
        if (scales[static_cast<std::size_t>(n)].height != 2 * scales[static_cast<std::size_t>(n) + 1].height ||
            scales[static_cast<std::size_t>(n)].width != 2 * scales[static_cast<std::size_t>(n) + 1].width)
            throw ShapeMismatch("each scale must halve the previous resolution");
    }
    std::array<FeatureTensor, 4> feats = scales;
    for (int n = 2; n >= 0; --n)
        feats[static_cast<std::size_t>(n)] =
            channel_attention(feats[static_cast<std::size_t>(n) + 1], feats[static_cast<std::size_t>(n)],
                              params.channel[static_cast<std::size_t>(n)]);
    for (int m = 1; m < 4; ++m)
        feats[static_cast<std::size_t>(m)] =
            bilinear_upsample(feats[static_cast<std::size_t>(m)], 1 << m);
    for (int m = 1; m < 4; ++m)
        feats[static_cast<std::size_t>(m)] =
            spatial_attention(feats[static_cast<std::size_t>(m) - 1], feats[static_cast<std::size_t>(m)],
                              params.spatial[static_cast<std::size_t>(m) - 1]);
    return concat_channels({feats[0], feats[1], feats[2], feats[3]});
}

// --- weight file I/O ---------------------------------------------------------

const WeightStore::Entry& WeightStore::find(const std::string& name) const {
    for (const auto& entry : entries)
        if (entry.name == name) return entry;
    throw MissingTable("weight tensor not found: " + name);
}

void WeightStore::add(const std::string& name, std::vector<int> shape,
                      std::vector<double> values) {
    std::size_t expected = 1;
    for (int d : shape) expected *= static_cast<std::size_t>(d);
    if (expected != values.size())
        throw ShapeMismatch("tensor " + name + " shape does not match its value count");
    entries.push_back(Entry{name, std::move(shape), std::move(values)});
}

void save_weights(const WeightStore& store, const std::filesystem::path& bin_path,
                  const std::filesystem::path& json_path) {
    std::ofstream bin(bin_path, std::ios::binary);
    if (!bin) throw IOFailure("cannot open " + bin_path.string());
    nlohmann::json meta = nlohmann::json::array();
    for (const auto& entry : store.entries) {
        for (double v : entry.values) {
            const float f = static_cast<float>(v);
            std::uint32_t bits;
            std::memcpy(&bits, &f, sizeof bits);
            const unsigned char le[4] = {
                static_cast<unsigned char>(bits & 0xFF),
                static_cast<unsigned char>((bits >> 8) & 0xFF),
                static_cast<unsigned char>((bits >> 16) & 0xFF),
                static_cast<unsigned char>((bits >> 24) & 0xFF),
            };
            bin.write(reinterpret_cast<const char*>(le), 4);
        }
        meta.push_back({{"name", entry.name}, {"shape", entry.shape}});
    }
    if (!bin) throw IOFailure("write error on " + bin_path.string());
    std::ofstream js(json_path);
    if (!js) throw IOFailure("cannot open " + json_path.string());
    js << meta.dump(2) << "\n";
    if (!js) throw IOFailure("write error on " + json_path.string());
}

WeightStore load_weights(const std::filesystem::path& bin_path,
                         const std::filesystem::path& json_path) {
    std::ifstream js(json_path);
    if (!js) throw IOFailure("cannot open " + json_path.string());
    nlohmann::json meta;
    try {
        js >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw CorruptStream("weight sidecar is not valid JSON: " + std::string(e.what()));
    }
    std::ifstream bin(bin_path, std::ios::binary);
    if (!bin) throw IOFailure("cannot open " + bin_path.string());
    WeightStore store;
    for (const auto& item : meta) {
        WeightStore::Entry entry;
        entry.name = item.at("name").get<std::string>();
        entry.shape = item.at("shape").get<std::vector<int>>();
        std::size_t count = 1;
        for (int d : entry.shape) {
            if (d <= 0) throw CorruptStream("non-positive dimension in weight sidecar");
            count *= static_cast<std::size_t>(d);
        }
        entry.values.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
            unsigned char le[4];
            if (!bin.read(reinterpret_cast<char*>(le), 4))
                throw CorruptStream("weight file shorter than its sidecar describes");
            const std::uint32_t bits = static_cast<std::uint32_t>(le[0]) |
                                       (static_cast<std::uint32_t>(le[1]) << 8) |
                                       (static_cast<std::uint32_t>(le[2]) << 16) |
                                       (static_cast<std::uint32_t>(le[3]) << 24);
            float f;
            std::memcpy(&f, &bits, sizeof f);
            entry.values[i] = static_cast<double>(f);
        }
        store.entries.push_back(std::move(entry));
    }
    return store;
}

namespace {

Conv1x1 conv1x1_from(const WeightStore& store, const std::string& prefix) {
    const auto& w = store.find(prefix + ".w");
    const auto& b = store.find(prefix + ".b");
    if (w.shape.size() != 2)
        throw ShapeMismatch(prefix + ".w must be 2-D (out x in)");
    Conv1x1 conv;
    conv.out_channels = w.shape[0];
    conv.in_channels = w.shape[1];
    conv.weight = w.values;
    conv.bias = b.values;
    return conv;
}

Linear linear_from(const WeightStore& store, const std::string& prefix) {
    const auto& w = store.find(prefix + ".w");
    const auto& b = store.find(prefix + ".b");
    if (w.shape.size() != 2)
        throw ShapeMismatch(prefix + ".w must be 2-D (out x in)");
    Linear layer;
    layer.out_dim = w.shape[0];
    layer.in_dim = w.shape[1];
    layer.weight = w.values;
    layer.bias = b.values;
    return layer;
}

} // namespace

FusionParams fusion_params_from_weights(const WeightStore& store) {
    FusionParams params;
    for (int n = 1; n <= 3; ++n) {
        const std::string base = "ca" + std::to_string(n);
        auto& ca = params.channel[static_cast<std::size_t>(n - 1)];
        ca.proj = conv1x1_from(store, base + ".proj");
        ca.excite_down = linear_from(store, base + ".down");
        ca.excite_up = linear_from(store, base + ".up");
        ca.reduction = ca.excite_down.in_dim / std::max(1, ca.excite_down.out_dim);
    }
    for (int m = 2; m <= 4; ++m) {
        const std::string base = "sa" + std::to_string(m);
        params.spatial[static_cast<std::size_t>(m - 2)].spatial_conv =
            conv1x1_from(store, base + ".conv");
    }
    return params;
}

WeightStore fusion_params_to_weights(const FusionParams& params) {
    WeightStore store;
    for (int n = 1; n <= 3; ++n) {
        const auto& ca = params.channel[static_cast<std::size_t>(n - 1)];
        const std::string base = "ca" + std::to_string(n);
        store.add(base + ".proj.w", {ca.proj.out_channels, ca.proj.in_channels}, ca.proj.weight);
        store.add(base + ".proj.b", {ca.proj.out_channels}, ca.proj.bias);
        store.add(base + ".down.w", {ca.excite_down.out_dim, ca.excite_down.in_dim},
                  ca.excite_down.weight);
        store.add(base + ".down.b", {ca.excite_down.out_dim}, ca.excite_down.bias);
        store.add(base + ".up.w", {ca.excite_up.out_dim, ca.excite_up.in_dim}, ca.excite_up.weight);
        store.add(base + ".up.b", {ca.excite_up.out_dim}, ca.excite_up.bias);
    }
    for (int m = 2; m <= 4; ++m) {
        const auto& sa = params.spatial[static_cast<std::size_t>(m - 2)];
        const std::string base = "sa" + std::to_string(m);
        store.add(base + ".conv.w", {sa.spatial_conv.out_channels, sa.spatial_conv.in_channels},
                  sa.spatial_conv.weight);
        store.add(base + ".conv.b", {sa.spatial_conv.out_channels}, sa.spatial_conv.bias);
    }
    return store;
}

} // namespace recompress
