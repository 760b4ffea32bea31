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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bld/core.hpp"

namespace bld {

struct BinaryImage {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> data;

    BinaryImage() = default;
    BinaryImage(int h, int w, uint8_t fill = 0)
        : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {
        if (h < 1 || w < 1) throw std::invalid_argument("BinaryImage: dims must be >= 1");
    }

    uint8_t& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }

    bool empty_image() const {
        return std::all_of(data.begin(), data.end(), [](uint8_t v) { return v == 0; });
    }

    size_t count() const {
        size_t n = 0;
        for (uint8_t v : data) n += v != 0;
        return n;
    }

    friend bool operator==(const BinaryImage& a, const BinaryImage& b) {
        return a.height == b.height && a.width == b.width && a.data == b.data;
    }
};

/// A selected pixel of the skeletonized baseline map, with its confidence.
struct SuperPixel {
    Point pos;          // integer pixel coordinates
    double confidence;  // baseline map value at pos
};

/// Strict element-wise comparison B > b.
inline BinaryImage binarize(const GrayImage& map, double threshold) {
    if (threshold < 0.0 || threshold >= 1.0)
        throw std::invalid_argument("binarize: threshold must be in [0,1)");
    BinaryImage out(map.height, map.width);
    for (size_t i = 0; i < map.data.size(); ++i)
        out.data[i] = map.data[i] > threshold ? 1 : 0;
    return out;
}

/// Morphological erosion with a 3x3 square element. Pixels outside the image
/// count as background.
inline BinaryImage erode3(const BinaryImage& x) {
    BinaryImage out(x.height, x.width);
    for (int y = 0; y < x.height; ++y)
        for (int xx = 0; xx < x.width; ++xx) {
            uint8_t keep = 1;
            for (int dy = -1; dy <= 1 && keep; ++dy)
                for (int dx = -1; dx <= 1 && keep; ++dx) {
                    int yy = y + dy, xc = xx + dx;
                    if (yy < 0 || yy >= x.height || xc < 0 || xc >= x.width || !x.at(yy, xc))
                        keep = 0;
                }
            out.at(y, xx) = keep;
        }
    return out;
}

/// Morphological dilation with a 3x3 square element.
inline BinaryImage dilate3(const BinaryImage& x) {
    BinaryImage out(x.height, x.width);
    for (int y = 0; y < x.height; ++y)
        for (int xx = 0; xx < x.width; ++xx) {
            if (!x.at(y, xx)) continue;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    int yy = y + dy, xc = xx + dx;
                    if (yy >= 0 && yy < x.height && xc >= 0 && xc < x.width) out.at(yy, xc) = 1;
                }
        }
    return out;
}

inline BinaryImage open3(const BinaryImage& x) { return dilate3(erode3(x)); }

/// Skeleton subsets S_k = erode^k(X) \ open(erode^k(X)), until erode^k(X) is
/// empty. Dilating S_k back k times and unioning reconstructs X exactly.
inline std::vector<BinaryImage> skeleton_subsets(const BinaryImage& x) {
    std::vector<BinaryImage> subsets;
    BinaryImage eroded = x;
    while (!eroded.empty_image()) {
        BinaryImage opened = open3(eroded);
        BinaryImage sk(x.height, x.width);
        for (size_t i = 0; i < sk.data.size(); ++i)
            sk.data[i] = eroded.data[i] && !opened.data[i];
        subsets.push_back(std::move(sk));
        eroded = erode3(eroded);
    }
    return subsets;
}

/// Morphological skeleton: union of the skeleton subsets. Always a subset of
/// the input.
inline BinaryImage skeletonize(const BinaryImage& x) {
    BinaryImage out(x.height, x.width);
    for (const auto& sk : skeleton_subsets(x))
        for (size_t i = 0; i < out.data.size(); ++i)
            out.data[i] = out.data[i] || sk.data[i];
    return out;
}

/// Greedy maximal selection: skeleton pixels sorted by descending confidence
/// (ties by row-major position) are kept only when strictly farther than d
/// from every already selected pixel.
inline std::vector<SuperPixel> select_superpixels(const BinaryImage& skel, const GrayImage& map,
                                                  double min_distance) {
    if (skel.height != map.height || skel.width != map.width)
        throw std::invalid_argument("select_superpixels: skeleton/map dims differ");
    struct Cand {
        int y, x;
        double conf;
    };
    std::vector<Cand> cands;
    for (int y = 0; y < skel.height; ++y)
        for (int x = 0; x < skel.width; ++x)
            if (skel.at(y, x)) cands.push_back({y, x, map.at(y, x)});
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.conf != b.conf) return a.conf > b.conf;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });

    // Uniform grid with cell size d makes the distance test local.
    const double cell = std::max(1.0, min_distance);
    const int gw = static_cast<int>(skel.width / cell) + 2;
    const int gh = static_cast<int>(skel.height / cell) + 2;
    std::vector<std::vector<int>> grid(static_cast<size_t>(gw) * gh);
    std::vector<SuperPixel> selected;

    const double d2 = min_distance * min_distance;
    for (const auto& c : cands) {
        const int gx = static_cast<int>(c.x / cell), gy = static_cast<int>(c.y / cell);
        bool ok = true;
        for (int dy = -1; dy <= 1 && ok; ++dy)
            for (int dx = -1; dx <= 1 && ok; ++dx) {
                int yy = gy + dy, xx = gx + dx;
                if (yy < 0 || yy >= gh || xx < 0 || xx >= gw) continue;
                for (int idx : grid[static_cast<size_t>(yy) * gw + xx]) {
                    double ddx = selected[idx].pos.x - c.x;
                    double ddy = selected[idx].pos.y - c.y;
                    if (ddx * ddx + ddy * ddy <= d2) {
                        ok = false;
                        break;
                    }
                }
            }
        if (ok) {
            grid[static_cast<size_t>(gy) * gw + gx].push_back(static_cast<int>(selected.size()));
            selected.push_back({{static_cast<double>(c.x), static_cast<double>(c.y)}, c.conf});
        }
    }
    return selected;
}

} // namespace bld
