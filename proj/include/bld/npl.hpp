// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License. You may
// obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "bld/core.hpp"
#include "bld/groundtruth.hpp"
#include "bld/rng.hpp"
#include "bld/tensor.hpp"

namespace bld {

enum class NplVariant { U, RU, ARU };

inline const char* variant_name(NplVariant v) {
    switch (v) {
    case NplVariant::U: return "U";
    case NplVariant::RU: return "RU";
    default: return "ARU";
    }
}

inline NplVariant parse_variant(const std::string& s) {
    if (s == "U" || s == "u") return NplVariant::U;
    if (s == "RU" || s == "ru") return NplVariant::RU;
    if (s == "ARU" || s == "aru") return NplVariant::ARU;
    throw std::invalid_argument("unknown network variant: " + s);
}

/// Architecture hyperparameters. Defaults match the production configuration:
/// 6 scale spaces starting at depth 8 doubling per level, 3x3 kernels,
/// residual depth 3, a 4-layer attention CNN (4x4 kernels, 2x2 maxpool,
/// depths 12/16/32/1) over a 5-image pyramid, and a 4x4 softmax classifier
/// over 3 classes.
struct NplArchitecture {
    int scale_spaces = 6;
    int initial_depth = 8;
    int residual_depth = 3;
    int growth_factor = 2;
    int kernel = 3;
    int anet_kernel = 4;
    std::array<int, 4> anet_depths{12, 16, 32, 1};
    int image_scales = 5;
    int classifier_kernel = 4;
    int num_classes = 3;
    int in_channels = 1;
    NplVariant variant = NplVariant::ARU;

    void validate() const {
        if (scale_spaces < 1 || image_scales < 1 || growth_factor < 2 || initial_depth < 1 ||
            residual_depth < 1 || num_classes < 2)
            throw std::invalid_argument("NplArchitecture: invalid hyperparameter");
    }

    int depth_at(int level) const {
        int d = initial_depth;
        for (int i = 0; i < level; ++i) d *= growth_factor;
        return d;
    }

    // Pyramid scale factors 1, 2, 4, ...
    int scale_factor(int i) const { return 1 << i; }
};

struct Param {
    std::vector<uint32_t> dims;
    std::vector<float> v;

    size_t count() const { return v.size(); }
};

/// Named parameter collection; map keeps names sorted for deterministic I/O.
struct WeightStore {
    std::map<std::string, Param> params;

    const Param& get(const std::string& name) const {
        auto it = params.find(name);
        if (it == params.end())
            throw std::runtime_error("missing weight slot: " + name);
        return it->second;
    }

    Tensor4 kernel(const std::string& name) const {
        const Param& p = get(name);
        if (p.dims.size() != 4)
            throw std::runtime_error("weight slot is not a kernel: " + name);
        Tensor4 k(static_cast<int>(p.dims[0]), static_cast<int>(p.dims[1]),
                  static_cast<int>(p.dims[2]), static_cast<int>(p.dims[3]));
        k.v = p.v;
        return k;
    }

    std::vector<float> bias(const std::string& name) const {
        const Param& p = get(name);
        if (p.dims.size() != 1)
            throw std::runtime_error("weight slot is not a bias: " + name);
        return p.v;
    }

    size_t total_count() const {
        size_t n = 0;
        for (const auto& [_, p] : params) n += p.count();
        return n;
    }

    friend bool operator==(const WeightStore& a, const WeightStore& b) {
        return a.params.size() == b.params.size() &&
               std::equal(a.params.begin(), a.params.end(), b.params.begin(),
                          [](const auto& x, const auto& y) {
                              return x.first == y.first && x.second.dims == y.second.dims &&
                                     x.second.v == y.second.v;
                          });
    }
};

struct SlotSpec {
    std::string name;
    std::vector<uint32_t> dims;

    size_t count() const {
        return std::accumulate(dims.begin(), dims.end(), size_t{1},
                               [](size_t a, uint32_t d) { return a * d; });
    }
};

/// Enumerate every trainable slot of a variant, in a fixed order.
inline std::vector<SlotSpec> weight_slots(const NplArchitecture& arch) {
    arch.validate();
    std::vector<SlotSpec> slots;
    auto u32 = [](int v) { return static_cast<uint32_t>(v); };
    auto add_conv = [&](const std::string& name, int kh, int kw, int ci, int co) {
        slots.push_back({name + ".k", {u32(kh), u32(kw), u32(ci), u32(co)}});
        slots.push_back({name + ".b", {u32(co)}});
    };
    auto add_block = [&](const std::string& prefix, int ci, int z) {
        if (arch.variant == NplVariant::U) {
            add_conv(prefix + ".conv0", arch.kernel, arch.kernel, ci, z);
            add_conv(prefix + ".conv1", arch.kernel, arch.kernel, z, z);
        } else {
            add_conv(prefix + ".entry", arch.kernel, arch.kernel, ci, z);
            for (int j = 0; j < arch.residual_depth; ++j)
                add_conv(prefix + ".res" + std::to_string(j), arch.kernel, arch.kernel, z, z);
        }
    };

    for (int l = 0; l < arch.scale_spaces; ++l) {
        int ci = (l == 0) ? arch.in_channels : arch.depth_at(l - 1);
        add_block("unet.enc" + std::to_string(l), ci, arch.depth_at(l));
    }
    for (int l = arch.scale_spaces - 2; l >= 0; --l) {
        int above = arch.depth_at(l + 1);
        add_conv("unet.dec" + std::to_string(l) + ".up", 2, 2, above, above);
        add_block("unet.dec" + std::to_string(l), arch.depth_at(l) + above, arch.depth_at(l));
    }
    if (arch.variant == NplVariant::ARU) {
        int ci = arch.in_channels;
        for (size_t j = 0; j < arch.anet_depths.size(); ++j) {
            add_conv("anet.conv" + std::to_string(j), arch.anet_kernel, arch.anet_kernel, ci,
                     arch.anet_depths[j]);
            ci = arch.anet_depths[j];
        }
        const int anet_downscale = 1 << static_cast<int>(arch.anet_depths.size());
        for (int i = 0; i < arch.image_scales; ++i) {
            int f = arch.scale_factor(i);
            if (f > 1)
                add_conv("aru.ru_up" + std::to_string(f), f, f, arch.initial_depth,
                         arch.initial_depth);
            int af = anet_downscale * f;
            add_conv("aru.att_up" + std::to_string(f), af, af, arch.anet_depths.back(),
                     arch.anet_depths.back());
        }
    }
    add_conv("classifier", arch.classifier_kernel, arch.classifier_kernel, arch.initial_depth,
             arch.num_classes);
    return slots;
}

/// Total number of trainable scalars for a variant; independent of image size.
inline size_t count_parameters(const NplArchitecture& arch) {
    size_t n = 0;
    for (const auto& s : weight_slots(arch)) n += s.count();
    return n;
}

inline WeightStore make_random_weights(const NplArchitecture& arch, uint64_t seed,
                                       float amplitude = 0.1f) {
    WeightStore ws;
    Rng rng(seed);
    for (const auto& s : weight_slots(arch)) {
        Param p;
        p.dims = s.dims;
        p.v.resize(s.count());
        for (auto& x : p.v)
            x = static_cast<float>(rng.uniform(-amplitude, amplitude));
        ws.params.emplace(s.name, std::move(p));
    }
    return ws;
}

/// Check that the store has exactly the slots of the architecture.
inline void validate_weights(const WeightStore& ws, const NplArchitecture& arch) {
    auto slots = weight_slots(arch);
    std::map<std::string, std::vector<uint32_t>> expected;
    for (auto& s : slots) expected.emplace(s.name, s.dims);
    for (const auto& [name, dims] : expected) {
        auto it = ws.params.find(name);
        if (it == ws.params.end())
            throw std::runtime_error("missing weight slot: " + name);
        if (it->second.dims != dims)
            throw std::runtime_error("weight slot has wrong shape: " + name);
    }
    for (const auto& [name, _] : ws.params)
        if (!expected.count(name))
            throw std::runtime_error("unexpected weight slot: " + name);
}

enum class Activation { None, Relu };

/// Same-padding stride-1 convolution. Even kernels pad one less on the
/// top/left side.
inline Tensor3 conv2d(const Tensor3& x, const Tensor4& k, const std::vector<float>& bias,
                      Activation act = Activation::None) {
    if (k.ci != x.c)
        throw std::invalid_argument("conv2d: kernel depth " + std::to_string(k.ci) +
                                    " does not match input depth " + std::to_string(x.c) +
                                    " (input " + shape_str(x) + ")");
    if (static_cast<int>(bias.size()) != k.co)
        throw std::invalid_argument("conv2d: bias size does not match kernel count");
    const int pad_y = (k.kh - 1) / 2, pad_x = (k.kw - 1) / 2;
    Tensor3 out(x.h, x.w, k.co);
    std::vector<float> acc(static_cast<size_t>(k.co));
    for (int y = 0; y < x.h; ++y) {
        for (int xx = 0; xx < x.w; ++xx) {
            for (int o = 0; o < k.co; ++o) acc[o] = bias[o];
            for (int ky = 0; ky < k.kh; ++ky) {
                const int iy = y + ky - pad_y;
                if (iy < 0 || iy >= x.h) continue;
                for (int kx = 0; kx < k.kw; ++kx) {
                    const int ix = xx + kx - pad_x;
                    if (ix < 0 || ix >= x.w) continue;
                    const float* in = x.row(iy, ix);
                    const float* kk = k.v.data() +
                                      (static_cast<size_t>(ky) * k.kw + kx) * k.ci * k.co;
                    for (int ci = 0; ci < k.ci; ++ci) {
                        const float iv = in[ci];
                        const float* kr = kk + static_cast<size_t>(ci) * k.co;
                        for (int o = 0; o < k.co; ++o) acc[o] += iv * kr[o];
                    }
                }
            }
            float* op = out.row(y, xx);
            if (act == Activation::Relu)
                for (int o = 0; o < k.co; ++o) op[o] = acc[o] > 0.0f ? acc[o] : 0.0f;
            else
                for (int o = 0; o < k.co; ++o) op[o] = acc[o];
        }
    }
    return out;
}

/// 2x2 max pooling with ceil semantics; border windows shrink.
inline Tensor3 maxpool2(const Tensor3& x) {
    const int oh = (x.h + 1) / 2, ow = (x.w + 1) / 2;
    Tensor3 out(oh, ow, x.c);
    for (int y = 0; y < oh; ++y)
        for (int xx = 0; xx < ow; ++xx)
            for (int c = 0; c < x.c; ++c) {
                float m = x.at(2 * y, 2 * xx, c);
                if (2 * xx + 1 < x.w) m = std::max(m, x.at(2 * y, 2 * xx + 1, c));
                if (2 * y + 1 < x.h) {
                    m = std::max(m, x.at(2 * y + 1, 2 * xx, c));
                    if (2 * xx + 1 < x.w) m = std::max(m, x.at(2 * y + 1, 2 * xx + 1, c));
                }
                out.at(y, xx, c) = m;
            }
    return out;
}

/// Transposed convolution with kernel size == stride == factor: every input
/// pixel stamps a non-overlapping factor x factor patch.
inline Tensor3 upconv(const Tensor3& x, const Tensor4& k, const std::vector<float>& bias,
                      int factor) {
    if (factor < 1) throw std::invalid_argument("upconv: factor must be >= 1");
    if (k.kh != factor || k.kw != factor)
        throw std::invalid_argument("upconv: kernel size must equal factor");
    if (k.ci != x.c)
        throw std::invalid_argument("upconv: kernel depth does not match input (input " +
                                    shape_str(x) + ")");
    if (static_cast<int>(bias.size()) != k.co)
        throw std::invalid_argument("upconv: bias size does not match kernel count");
    Tensor3 out(x.h * factor, x.w * factor, k.co);
    for (int y = 0; y < x.h; ++y)
        for (int xx = 0; xx < x.w; ++xx) {
            const float* in = x.row(y, xx);
            for (int dy = 0; dy < factor; ++dy)
                for (int dx = 0; dx < factor; ++dx) {
                    float* op = out.row(y * factor + dy, xx * factor + dx);
                    for (int o = 0; o < k.co; ++o) op[o] = bias[o];
                    for (int ci = 0; ci < k.ci; ++ci) {
                        const float iv = in[ci];
                        for (int o = 0; o < k.co; ++o) op[o] += iv * k.at(dy, dx, ci, o);
                    }
                }
        }
    return out;
}

/// Center-crop (or zero-pad) to exact target spatial dims.
inline Tensor3 crop_or_pad(const Tensor3& x, int h, int w) {
    if (x.h == h && x.w == w) return x;
    Tensor3 out(h, w, x.c);
    const int oy = (x.h - h) / 2, ox = (x.w - w) / 2;
    for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx) {
            int sy = y + oy, sx = xx + ox;
            if (sy < 0 || sy >= x.h || sx < 0 || sx >= x.w) continue;
            for (int c = 0; c < x.c; ++c) out.at(y, xx, c) = x.at(sy, sx, c);
        }
    return out;
}

inline Tensor3 concat_channels(const Tensor3& a, const Tensor3& b) {
    if (a.h != b.h || a.w != b.w)
        throw std::invalid_argument("concat: spatial dims differ (" + shape_str(a) + " vs " +
                                    shape_str(b) + ")");
    Tensor3 out(a.h, a.w, a.c + b.c);
    for (int y = 0; y < a.h; ++y)
        for (int x = 0; x < a.w; ++x) {
            float* op = out.row(y, x);
            const float* ap = a.row(y, x);
            const float* bp = b.row(y, x);
            for (int c = 0; c < a.c; ++c) op[c] = ap[c];
            for (int c = 0; c < b.c; ++c) op[a.c + c] = bp[c];
        }
    return out;
}

inline Tensor3 relu(Tensor3 x) {
    for (auto& v : x.v) v = v > 0.0f ? v : 0.0f;
    return x;
}

/// Residual block: the entry convolution's logits feed both the inner branch
/// and the shortcut; the branch ends with a pre-activation convolution and
/// the sum passes through the activation.
inline Tensor3 residual_block(const Tensor3& x, const WeightStore& ws, const std::string& prefix,
                              int residual_depth) {
    Tensor3 entry = conv2d(x, ws.kernel(prefix + ".entry.k"), ws.bias(prefix + ".entry.b"));
    Tensor3 a = relu(entry);
    for (int j = 0; j + 1 < residual_depth; ++j) {
        const std::string n = prefix + ".res" + std::to_string(j);
        a = conv2d(a, ws.kernel(n + ".k"), ws.bias(n + ".b"), Activation::Relu);
    }
    const std::string last = prefix + ".res" + std::to_string(residual_depth - 1);
    Tensor3 branch = conv2d(a, ws.kernel(last + ".k"), ws.bias(last + ".b"));
    if (branch.h != entry.h || branch.w != entry.w || branch.c != entry.c)
        throw std::invalid_argument("residual_block: branch/shortcut shape mismatch");
    for (size_t i = 0; i < branch.v.size(); ++i) {
        float s = branch.v[i] + entry.v[i];
        branch.v[i] = s > 0.0f ? s : 0.0f;
    }
    return branch;
}

namespace detail {

inline Tensor3 unet_block(const Tensor3& x, const WeightStore& ws, const std::string& prefix,
                          const NplArchitecture& arch) {
    if (arch.variant == NplVariant::U) {
        Tensor3 t = conv2d(x, ws.kernel(prefix + ".conv0.k"), ws.bias(prefix + ".conv0.b"),
                           Activation::Relu);
        return conv2d(t, ws.kernel(prefix + ".conv1.k"), ws.bias(prefix + ".conv1.b"),
                      Activation::Relu);
    }
    return residual_block(x, ws, prefix, arch.residual_depth);
}

// 2x2 average pooling (ceil) for the image pyramid.
inline Tensor3 downscale2(const Tensor3& x) {
    const int oh = (x.h + 1) / 2, ow = (x.w + 1) / 2;
    Tensor3 out(oh, ow, x.c);
    for (int y = 0; y < oh; ++y)
        for (int xx = 0; xx < ow; ++xx)
            for (int c = 0; c < x.c; ++c) {
                double acc = 0.0;
                int n = 0;
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx) {
                        int sy = 2 * y + dy, sx = 2 * xx + dx;
                        if (sy < x.h && sx < x.w) {
                            acc += x.at(sy, sx, c);
                            ++n;
                        }
                    }
                out.at(y, xx, c) = static_cast<float>(acc / n);
            }
    return out;
}

} // namespace detail

/// Encoder/decoder pass with concatenation shortcuts between equal-resolution
/// scale spaces. Output keeps the input's spatial dims with initial_depth
/// feature maps.
inline Tensor3 ru_net_forward(const Tensor3& x, const WeightStore& ws,
                              const NplArchitecture& arch) {
    arch.validate();
    Tensor3 cur = x;
    std::vector<Tensor3> skips;
    for (int l = 0; l < arch.scale_spaces; ++l) {
        cur = detail::unet_block(cur, ws, "unet.enc" + std::to_string(l), arch);
        if (l < arch.scale_spaces - 1) {
            skips.push_back(cur);
            cur = maxpool2(cur);
        }
    }
    for (int l = arch.scale_spaces - 2; l >= 0; --l) {
        const std::string up = "unet.dec" + std::to_string(l) + ".up";
        Tensor3 upped = upconv(cur, ws.kernel(up + ".k"), ws.bias(up + ".b"), 2);
        upped = crop_or_pad(upped, skips[l].h, skips[l].w);
        cur = concat_channels(skips[l], upped);
        cur = detail::unet_block(cur, ws, "unet.dec" + std::to_string(l), arch);
    }
    return cur;
}

/// Attention CNN: anet_depths.size() convolutions, each ReLU-activated and
/// followed by 2x2 maxpooling.
inline Tensor3 anet_forward(const Tensor3& x, const WeightStore& ws,
                            const NplArchitecture& arch) {
    Tensor3 cur = x;
    for (size_t j = 0; j < arch.anet_depths.size(); ++j) {
        const std::string n = "anet.conv" + std::to_string(j);
        cur = conv2d(cur, ws.kernel(n + ".k"), ws.bias(n + ".b"), Activation::Relu);
        cur = maxpool2(cur);
    }
    return cur;
}

namespace detail {

inline ConfidenceMaps classify(const Tensor3& features, const WeightStore& ws,
                               const NplArchitecture& arch) {
    Tensor3 logits = conv2d(features, ws.kernel("classifier.k"), ws.bias("classifier.b"));
    if (logits.c != 3)
        throw std::runtime_error("classifier must produce 3 classes");
    GrayImage b(logits.h, logits.w), s(logits.h, logits.w), o(logits.h, logits.w);
    for (int y = 0; y < logits.h; ++y)
        for (int x = 0; x < logits.w; ++x) {
            const float* lp = logits.row(y, x);
            float m = std::max(lp[0], std::max(lp[1], lp[2]));
            double e0 = std::exp(static_cast<double>(lp[0] - m));
            double e1 = std::exp(static_cast<double>(lp[1] - m));
            double e2 = std::exp(static_cast<double>(lp[2] - m));
            double sum = e0 + e1 + e2;
            b.at(y, x) = e0 / sum;
            s.at(y, x) = e1 / sum;
            o.at(y, x) = e2 / sum;
        }
    ConfidenceMaps maps;
    maps.baseline = std::move(b);
    maps.separator = std::move(s);
    maps.other = std::move(o);
    return maps;
}

} // namespace detail

struct AruResult {
    ConfidenceMaps maps;
    std::vector<GrayImage> attention; // per pyramid scale, softmax-normalized
};

/// Multi-scale forward pass: pyramid -> shared RU-Net / A-Net per scale ->
/// learned upsampling to full resolution -> pixel-wise attention softmax ->
/// attention-weighted sum -> softmax classifier.
inline AruResult aru_forward_detailed(const Tensor3& img, const WeightStore& ws,
                                      const NplArchitecture& arch) {
    arch.validate();
    if (arch.variant != NplVariant::ARU)
        throw std::invalid_argument("aru_forward requires the ARU variant");
    if (img.c != arch.in_channels)
        throw std::invalid_argument("aru_forward: expected " +
                                    std::to_string(arch.in_channels) + "-channel input");
    const int min_side = 1 << (arch.scale_spaces - 1);
    if (img.h < min_side || img.w < min_side)
        throw std::invalid_argument("aru_forward: input " + shape_str(img) +
                                    " below minimum size " + std::to_string(min_side) + "x" +
                                    std::to_string(min_side));

    const int H = img.h, W = img.w;
    const int anet_downscale = 1 << static_cast<int>(arch.anet_depths.size());

    std::vector<Tensor3> pyramid{img};
    for (int i = 1; i < arch.image_scales; ++i)
        pyramid.push_back(detail::downscale2(pyramid.back()));

    std::vector<Tensor3> ru_maps, a_maps;
    for (int i = 0; i < arch.image_scales; ++i) {
        const int f = arch.scale_factor(i);
        Tensor3 ru = ru_net_forward(pyramid[i], ws, arch);
        if (f > 1) {
            const std::string n = "aru.ru_up" + std::to_string(f);
            ru = upconv(ru, ws.kernel(n + ".k"), ws.bias(n + ".b"), f);
        }
        ru_maps.push_back(crop_or_pad(ru, H, W));

        Tensor3 a = anet_forward(pyramid[i], ws, arch);
        const std::string n = "aru.att_up" + std::to_string(f);
        a = upconv(a, ws.kernel(n + ".k"), ws.bias(n + ".b"), anet_downscale * f);
        a_maps.push_back(crop_or_pad(a, H, W));
    }

    // Pixel-wise softmax over scales.
    std::vector<GrayImage> attention(arch.image_scales, GrayImage(H, W));
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            float m = a_maps[0].at(y, x, 0);
            for (int i = 1; i < arch.image_scales; ++i)
                m = std::max(m, a_maps[i].at(y, x, 0));
            double sum = 0.0;
            for (int i = 0; i < arch.image_scales; ++i)
                sum += std::exp(static_cast<double>(a_maps[i].at(y, x, 0) - m));
            for (int i = 0; i < arch.image_scales; ++i)
                attention[i].at(y, x) =
                    std::exp(static_cast<double>(a_maps[i].at(y, x, 0) - m)) / sum;
        }

    Tensor3 combined(H, W, arch.initial_depth, 0.0f);
    for (int i = 0; i < arch.image_scales; ++i)
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                const float w8 = static_cast<float>(attention[i].at(y, x));
                const float* rp = ru_maps[i].row(y, x);
                float* cp = combined.row(y, x);
                for (int c = 0; c < arch.initial_depth; ++c) cp[c] += w8 * rp[c];
            }

    AruResult result;
    result.maps = detail::classify(combined, ws, arch);
    result.attention = std::move(attention);
    return result;
}

inline ConfidenceMaps aru_forward(const Tensor3& img, const WeightStore& ws,
                                  const NplArchitecture& arch) {
    return aru_forward_detailed(img, ws, arch).maps;
}

/// Variant dispatch: U/RU classify the encoder-decoder features directly,
/// ARU runs the attention combination.
inline ConfidenceMaps npl_forward(const Tensor3& img, const WeightStore& ws,
                                  const NplArchitecture& arch) {
    if (arch.variant == NplVariant::ARU) return aru_forward(img, ws, arch);
    return detail::classify(ru_net_forward(img, ws, arch), ws, arch);
}

/// Cross-entropy between predicted confidences and one-hot ground truth,
/// summed over pixels. Predictions are clamped below at 1e-12.
inline double cross_entropy_loss(const ConfidenceMaps& pred, const PixelGT& gt) {
    if (!pred.other)
        throw std::invalid_argument("cross_entropy_loss: needs all three class planes");
    if (pred.height() != gt.height || pred.width() != gt.width)
        throw std::invalid_argument("cross_entropy_loss: dimension mismatch");
    const GrayImage* planes[3] = {&pred.baseline, &pred.separator, &*pred.other};
    double loss = 0.0;
    for (int y = 0; y < gt.height; ++y)
        for (int x = 0; x < gt.width; ++x)
            loss -= std::log(std::max(planes[gt.at(y, x)]->at(y, x), 1e-12));
    return loss;
}

struct PreprocessedImage {
    Tensor3 t;        // single-channel, mean 0 / variance 1
    int factor = 1;   // applied downscale factor
    bool degenerate = false;
};

/// Downscale by 2/3/4 depending on the larger side, then normalize to mean 0
/// and variance 1. A constant input yields an all-zero map and sets the
/// degenerate flag.
inline PreprocessedImage preprocess(const GrayImage& img) {
    const int maxdim = std::max(img.height, img.width);
    const int factor = maxdim < 2000 ? 2 : (maxdim < 4800 ? 3 : 4);
    const int oh = (img.height + factor - 1) / factor;
    const int ow = (img.width + factor - 1) / factor;

    std::vector<double> down(static_cast<size_t>(oh) * ow);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            int n = 0;
            for (int dy = 0; dy < factor; ++dy)
                for (int dx = 0; dx < factor; ++dx) {
                    int sy = y * factor + dy, sx = x * factor + dx;
                    if (sy < img.height && sx < img.width) {
                        acc += img.at(sy, sx);
                        ++n;
                    }
                }
            down[static_cast<size_t>(y) * ow + x] = acc / n;
        }

    double mean = 0.0;
    for (double v : down) mean += v;
    mean /= static_cast<double>(down.size());
    double var = 0.0;
    for (double v : down) var += (v - mean) * (v - mean);
    var /= static_cast<double>(down.size());
    const double stdev = std::sqrt(var);

    PreprocessedImage out;
    out.factor = factor;
    out.degenerate = stdev < 1e-8;
    out.t = Tensor3(oh, ow, 1);
    const double denom = std::max(stdev, 1e-8);
    for (size_t i = 0; i < down.size(); ++i)
        out.t.v[i] = static_cast<float>((down[i] - mean) / denom);
    return out;
}

} // namespace bld
