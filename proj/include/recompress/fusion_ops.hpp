#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "recompress/grid.hpp"

namespace recompress {

/// Dense H x W x C tensor, channel-minor storage.
struct FeatureTensor {
    int height = 0, width = 0, channels = 0;
    std::vector<double> data;

    FeatureTensor() = default;
    FeatureTensor(int h, int w, int c)
        : height(h), width(w), channels(c),
          data(static_cast<std::size_t>(h) * w * c, 0.0) {}

    double& at(int y, int x, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    double at(int y, int x, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    bool same_spatial(const FeatureTensor& o) const {
        return height == o.height && width == o.width;
    }
};

/// 1x1 convolution: out[c_out] = sum_c w[c_out][c] * in[c] + b[c_out].
struct Conv1x1 {
    int in_channels = 0, out_channels = 0;
    std::vector<double> weight; // out_channels x in_channels
    std::vector<double> bias;   // out_channels
};

/// Fully-connected layer on a channel vector.
struct Linear {
    int in_dim = 0, out_dim = 0;
    std::vector<double> weight; // out_dim x in_dim
    std::vector<double> bias;   // out_dim
};

/// Square convolution with dilation, zero same-padding.
struct Conv2d {
    int in_channels = 0, out_channels = 0;
    int kernel = 3, dilation = 1;
    std::vector<double> weight; // out x in x k x k
    std::vector<double> bias;   // out
};

/// Squeeze-excitation style channel gate: project, pool, excite, sigmoid.
struct ChannelAttentionParams {
    Conv1x1 proj;       // C_in -> C'
    Linear excite_down; // C' -> C'/r
    Linear excite_up;   // C'/r -> C'
    int reduction = 4;
};

/// Channel-pooled spatial gate.
struct SpatialAttentionParams {
    Conv1x1 spatial_conv; // 2 -> 1 over [max-pool; avg-pool] maps
};

struct AsppParams {
    std::array<Conv2d, 3> branches; // dilated 3x3, distinct rates
    Conv1x1 gap_proj;               // C_in -> C_b, applied to the pooled vector
    Conv1x1 fuse;                   // 4*C_b -> C_out
};

/// Gate f_lo by a per-channel sigmoid computed from f_hi:
/// sigma(excite_up(excite_down(GAP(proj(f_hi))))) broadcast spatially.
FeatureTensor channel_attention(const FeatureTensor& f_hi, const FeatureTensor& f_lo,
                                const ChannelAttentionParams& p);

/// Per-channel attention gate vector (exposed for invariant checks).
std::vector<double> channel_attention_gate(const FeatureTensor& f_hi,
                                           const ChannelAttentionParams& p);

/// Gate f_cur by a per-pixel sigmoid computed from f_prev's channel max/avg maps.
FeatureTensor spatial_attention(const FeatureTensor& f_prev, const FeatureTensor& f_cur,
                                const SpatialAttentionParams& p);

/// Per-pixel attention gate map (exposed for invariant checks).
RealGrid spatial_attention_gate(const FeatureTensor& f_prev, const SpatialAttentionParams& p);

/// Three dilated conv branches plus a pooled branch, concatenated and fused 1x1.
FeatureTensor aspp_forward(const FeatureTensor& f, const AsppParams& p);

/// Bilinear upsampling, align-corners=false, integer factor >= 1.
FeatureTensor bilinear_upsample(const FeatureTensor& f, int factor);

FeatureTensor concat_channels(const std::vector<FeatureTensor>& parts);

/// Parameters for the four-scale interactive fusion pass.
struct FusionParams {
    std::array<ChannelAttentionParams, 3> channel; // applied at n = 3, 2, 1
    std::array<SpatialAttentionParams, 3> spatial; // applied at m = 2, 3, 4
};

/// Bottom-up channel attention over scales 3..1 (the deepest scale stays
/// ungated), bilinear upsampling of scales 2..4 to scale 1, then top-down
/// spatial attention over scales 2..4 (the finest stays ungated), and a
/// channel concatenation of the four aligned tensors.
FeatureTensor fusion_pipeline(const std::array<FeatureTensor, 4>& scales,
                              const FusionParams& params);

// --- weight file I/O ---------------------------------------------------------

/// Named tensor store backed by a flat little-endian float32 file with a JSON
/// sidecar listing names and shapes in file order.
struct WeightStore {
    struct Entry {
        std::string name;
        std::vector<int> shape;
        std::vector<double> values;
    };
    std::vector<Entry> entries;

    const Entry& find(const std::string& name) const;
    void add(const std::string& name, std::vector<int> shape, std::vector<double> values);
};

void save_weights(const WeightStore& store, const std::filesystem::path& bin_path,
                  const std::filesystem::path& json_path);
WeightStore load_weights(const std::filesystem::path& bin_path,
                         const std::filesystem::path& json_path);

/// Assemble fusion parameters from a store with entries named
/// "ca<n>.proj.{w,b}", "ca<n>.down.{w,b}", "ca<n>.up.{w,b}" for n in 1..3 and
/// "sa<m>.conv.{w,b}" for m in 2..4.
FusionParams fusion_params_from_weights(const WeightStore& store);
WeightStore fusion_params_to_weights(const FusionParams& params);

} // namespace recompress
