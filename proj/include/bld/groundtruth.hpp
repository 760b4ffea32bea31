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
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bld/core.hpp"
#include "bld/rng.hpp"

namespace bld {

/// One-hot pixel classes: exactly one of {baseline, separator, other} per pixel.
struct PixelGT {
    static constexpr uint8_t kBaseline = 0;
    static constexpr uint8_t kSeparator = 1;
    static constexpr uint8_t kOther = 2;

    int height = 0;
    int width = 0;
    std::vector<uint8_t> cls;

    PixelGT() = default;
    PixelGT(int h, int w) : height(h), width(w), cls(static_cast<size_t>(h) * w, kOther) {
        if (h < 1 || w < 1) throw std::invalid_argument("PixelGT: dims must be >= 1");
    }

    uint8_t& at(int y, int x) { return cls[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int y, int x) const { return cls[static_cast<size_t>(y) * width + x]; }

    GrayImage plane(uint8_t c) const {
        GrayImage g(height, width, 0.0);
        for (size_t i = 0; i < cls.size(); ++i) g.data[i] = (cls[i] == c) ? 1.0 : 0.0;
        return g;
    }
};

/// Synthetic page: known baselines on a blank canvas, reproducible from seed.
struct SynthPage {
    int width = 0;
    int height = 0;
    std::vector<PolyChain> baselines;
    std::optional<std::vector<Region>> regions;
    uint64_t seed = 0;
};

enum class SynthStyle { Straight, Curved, Rotated, Mixed };
enum class DeformKind { Affine, Elastic, Rotation };

namespace detail {

// Direction angle of the chain segment adjacent to point index i.
inline double segment_theta(const PolyChain& c, size_t i) {
    Point a, b;
    if (i + 1 < c.points.size()) {
        a = c.points[i];
        b = c.points[i + 1];
    } else {
        a = c.points[i - 1];
        b = c.points[i];
    }
    return std::atan2(b.y - a.y, b.x - a.x);
}

// Minimal |off-text component| from x to segment [a,b]; linear in the segment
// parameter, so the minimum sits at an endpoint or at the interior zero.
inline double min_offtext_to_segment(Point x, Point a, Point b, double theta) {
    const double f0 = (x.x - a.x) * std::sin(theta) - (x.y - a.y) * std::cos(theta);
    const double f1 = (x.x - b.x) * std::sin(theta) - (x.y - b.y) * std::cos(theta);
    if ((f0 <= 0.0 && f1 >= 0.0) || (f0 >= 0.0 && f1 <= 0.0)) return 0.0;
    return std::min(std::abs(f0), std::abs(f1));
}

inline std::vector<std::pair<Point, double>> sample_chain(const PolyChain& c, double step) {
    std::vector<std::pair<Point, double>> out;
    for (size_t i = 0; i + 1 < c.points.size(); ++i) {
        Point a = c.points[i], b = c.points[i + 1];
        double len = norm2(b - a);
        double theta = std::atan2(b.y - a.y, b.x - a.x);
        int n = std::max(1, static_cast<int>(std::ceil(len / step)));
        for (int j = 0; j < n; ++j) {
            double t = static_cast<double>(j) / n;
            out.push_back({a + t * (b - a), theta});
        }
    }
    out.push_back({c.points.back(), segment_theta(c, c.points.size() - 1)});
    return out;
}

inline void draw_segment(std::vector<uint8_t>& grid, int h, int w, Point a, Point b) {
    int x0 = static_cast<int>(std::lround(a.x)), y0 = static_cast<int>(std::lround(a.y));
    int x1 = static_cast<int>(std::lround(b.x)), y1 = static_cast<int>(std::lround(b.y));
    int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        if (y0 >= 0 && y0 < h && x0 >= 0 && x0 < w)
            grid[static_cast<size_t>(y0) * w + x0] = 1;
        if (x0 == x1 && y0 == y1) break;
        int e2 = 2 * err;
        if (e2 >= dy) { err += dy; x0 += sx; }
        if (e2 <= dx) { err += dx; y0 += sy; }
    }
}

inline void draw_chain(std::vector<uint8_t>& grid, int h, int w, const PolyChain& c) {
    for (size_t i = 0; i + 1 < c.points.size(); ++i)
        draw_segment(grid, h, w, c.points[i], c.points[i + 1]);
}

inline std::vector<uint8_t> dilate3(const std::vector<uint8_t>& g, int h, int w) {
    std::vector<uint8_t> out(g.size(), 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!g[static_cast<size_t>(y) * w + x]) continue;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    int yy = y + dy, xx = x + dx;
                    if (yy >= 0 && yy < h && xx >= 0 && xx < w)
                        out[static_cast<size_t>(yy) * w + xx] = 1;
                }
        }
    return out;
}

} // namespace detail

/// Minimum off-text distance from chain c to any other chain of `all`,
/// measured against c's local segment orientation. `c` must be an element of
/// `all` (compared by address); `fallback` is returned when it is alone.
inline double chain_interline_distance(const PolyChain& c, const std::vector<PolyChain>& all,
                                       double fallback) {
    bool has_other = false;
    double best = std::numeric_limits<double>::infinity();
    auto samples = detail::sample_chain(c, 2.0);
    for (const auto& other : all) {
        if (&other == &c) continue;
        has_other = true;
        for (const auto& [x, theta] : samples)
            for (size_t i = 0; i + 1 < other.points.size(); ++i)
                best = std::min(best, detail::min_offtext_to_segment(
                                          x, other.points[i], other.points[i + 1], theta));
    }
    return has_other ? best : fallback;
}

/// Rasterize baseline annotations into one-hot pixel classes: each chain is
/// drawn into the baseline plane, orthogonal end strokes of length equal to
/// the chain's interline distance into the separator plane, then both planes
/// are dilated with a 3x3 element with separator taking precedence.
inline PixelGT generate_pixel_gt(int height, int width, const std::vector<PolyChain>& chains,
                                 double fallback_interline = 64.0) {
    const size_t n = static_cast<size_t>(height) * width;
    std::vector<uint8_t> b(n, 0), s(n, 0);
    for (const auto& chain : chains) {
        double d = chain_interline_distance(chain, chains, fallback_interline);
        for (size_t endpt : {size_t{0}, chain.points.size() - 1}) {
            double theta = detail::segment_theta(chain, endpt);
            Point dir{-std::sin(theta), std::cos(theta)}; // theta + 90 degrees
            Point c = chain.points[endpt];
            detail::draw_segment(s, height, width, c - (d / 2.0) * dir, c + (d / 2.0) * dir);
        }
        detail::draw_chain(b, height, width, chain);
    }
    s = detail::dilate3(s, height, width);
    b = detail::dilate3(b, height, width);
    PixelGT gt(height, width);
    for (size_t i = 0; i < n; ++i) {
        if (s[i]) gt.cls[i] = PixelGT::kSeparator;
        else if (b[i]) gt.cls[i] = PixelGT::kBaseline;
        else gt.cls[i] = PixelGT::kOther;
    }
    return gt;
}

namespace detail {

inline PolyChain make_row(double x0, double x1, double y, double step = 40.0) {
    std::vector<Point> pts;
    int n = std::max(1, static_cast<int>(std::ceil((x1 - x0) / step)));
    for (int i = 0; i <= n; ++i) pts.push_back({x0 + (x1 - x0) * i / n, y});
    return PolyChain(std::move(pts));
}

inline Point rotate_about(Point p, Point c, double angle) {
    double ca = std::cos(angle), sa = std::sin(angle);
    Point d = p - c;
    return {c.x + ca * d.x - sa * d.y, c.y + sa * d.x + ca * d.y};
}

} // namespace detail

/// Deterministic synthetic corpus. Pages carry 5-30 baselines with per-page
/// interline spacing in [12.8, 170.7] px. Curved pages warp y by a sine with
/// random period; rotated pages are rigidly rotated (uniform within +/-45deg
/// unless `fixed_rotation` pins the angle).
inline std::vector<SynthPage> synth_corpus(int n_pages, uint64_t seed, SynthStyle style,
                                           std::optional<double> fixed_rotation = std::nullopt) {
    if (n_pages < 1) throw std::invalid_argument("synth_corpus: n_pages must be >= 1");
    std::vector<SynthPage> pages;
    Rng root(seed);
    for (int pg = 0; pg < n_pages; ++pg) {
        Rng rng = root.fork(static_cast<uint64_t>(pg));
        SynthStyle st = style;
        if (st == SynthStyle::Mixed)
            st = static_cast<SynthStyle>(rng.uniform_int(0, 2));

        double spacing = rng.uniform(12.8, 170.7);
        int max_lines = std::min(30, static_cast<int>(1200.0 / spacing) + 1);
        int n_lines = rng.uniform_int(5, std::max(5, max_lines));
        double cw = rng.uniform(400.0, 900.0);
        double ch = (n_lines - 1) * spacing;
        double lambda = rng.uniform(1.5, 3.0) * cw;
        double phase = rng.uniform(0.0, 2.0 * kPi);
        // Wave amplitude stays well under half the interline distance (the
        // hard bound): at 0.5*s adjacent rows touch in the perpendicular
        // metric and cease to be separable clusters. The slope cap keeps
        // lines polynomial-like for the fixed regression degree.
        double amp = (st == SynthStyle::Curved)
                         ? std::min(rng.uniform(0.1, 0.2) * spacing, 0.05 * lambda)
                         : 0.0;
        double margin = 50.0 + amp;

        SynthPage page;
        page.seed = seed * 1000003ULL + static_cast<uint64_t>(pg);
        if (st == SynthStyle::Rotated) {
            double diag = std::hypot(cw, ch);
            page.width = static_cast<int>(std::ceil(diag + 2.0 * margin));
            page.height = page.width;
        } else {
            page.width = static_cast<int>(std::ceil(cw + 2.0 * margin));
            page.height = static_cast<int>(std::ceil(ch + 2.0 * margin));
        }
        double ox = (page.width - cw) / 2.0;
        double oy = (page.height - ch) / 2.0;
        for (int r = 0; r < n_lines; ++r) {
            double x0 = ox + rng.uniform(0.0, 0.04 * cw);
            double x1 = ox + cw - rng.uniform(0.0, 0.04 * cw);
            PolyChain row = detail::make_row(x0, x1, oy + r * spacing);
            if (st == SynthStyle::Curved)
                for (auto& p : row.points)
                    p.y += amp * std::sin(2.0 * kPi * p.x / lambda + phase);
            page.baselines.push_back(std::move(row));
        }
        if (st == SynthStyle::Rotated) {
            double angle = fixed_rotation ? *fixed_rotation : rng.uniform(-kPi / 4.0, kPi / 4.0);
            Point c{page.width / 2.0, page.height / 2.0};
            for (auto& chain : page.baselines)
                for (auto& p : chain.points) p = detail::rotate_about(p, c, angle);
        }
        pages.push_back(std::move(page));
    }
    return pages;
}

namespace detail {

// Smoothed random displacement field, bilinearly sampled at page coordinates.
class ElasticField {
public:
    ElasticField(int height, int width, double magnitude, Rng& rng) {
        cell_ = 32.0;
        gw_ = static_cast<int>(std::ceil(width / cell_)) + 3;
        gh_ = static_cast<int>(std::ceil(height / cell_)) + 3;
        dx_.resize(static_cast<size_t>(gw_) * gh_);
        dy_.resize(dx_.size());
        for (auto& v : dx_) v = rng.uniform(-magnitude, magnitude);
        for (auto& v : dy_) v = rng.uniform(-magnitude, magnitude);
        smooth(dx_);
        smooth(dy_);
    }

    Point displacement(Point p) const {
        double gx = p.x / cell_ + 1.0, gy = p.y / cell_ + 1.0;
        int x0 = std::clamp(static_cast<int>(std::floor(gx)), 0, gw_ - 2);
        int y0 = std::clamp(static_cast<int>(std::floor(gy)), 0, gh_ - 2);
        double fx = std::clamp(gx - x0, 0.0, 1.0), fy = std::clamp(gy - y0, 0.0, 1.0);
        auto lerp2 = [&](const std::vector<double>& g) {
            double a = g[idx(y0, x0)] * (1 - fx) + g[idx(y0, x0 + 1)] * fx;
            double b = g[idx(y0 + 1, x0)] * (1 - fx) + g[idx(y0 + 1, x0 + 1)] * fx;
            return a * (1 - fy) + b * fy;
        };
        return {lerp2(dx_), lerp2(dy_)};
    }

private:
    size_t idx(int y, int x) const { return static_cast<size_t>(y) * gw_ + x; }

    void smooth(std::vector<double>& g) {
        // Three binomial passes approximate a gaussian over the coarse grid.
        for (int pass = 0; pass < 3; ++pass) {
            std::vector<double> t(g.size());
            for (int y = 0; y < gh_; ++y)
                for (int x = 0; x < gw_; ++x) {
                    double acc = 0.0, wsum = 0.0;
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx) {
                            int yy = y + dy, xx = x + dx;
                            if (yy < 0 || yy >= gh_ || xx < 0 || xx >= gw_) continue;
                            double wgt = (dy == 0 ? 2.0 : 1.0) * (dx == 0 ? 2.0 : 1.0);
                            acc += wgt * g[idx(yy, xx)];
                            wsum += wgt;
                        }
                    t[idx(y, x)] = acc / wsum;
                }
            g.swap(t);
        }
    }

    int gw_ = 0, gh_ = 0;
    double cell_ = 32.0;
    std::vector<double> dx_, dy_;
};

// Affine map fitted through three point correspondences (least squares is
// exact for three points).
struct AffineMap {
    // x' = a x + b y + c ; y' = d x + e y + f
    double a = 1, b = 0, c = 0, d = 0, e = 1, f = 0;

    static AffineMap fit(const std::array<Point, 3>& src, const std::array<Point, 3>& dst) {
        auto solve3 = [](double m[3][4]) {
            for (int col = 0; col < 3; ++col) {
                int piv = col;
                for (int r = col + 1; r < 3; ++r)
                    if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
                std::swap(m[piv], m[col]);
                for (int r = 0; r < 3; ++r) {
                    if (r == col || m[col][col] == 0.0) continue;
                    double k = m[r][col] / m[col][col];
                    for (int cc = col; cc < 4; ++cc) m[r][cc] -= k * m[col][cc];
                }
            }
            return std::array<double, 3>{m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
        };
        double mx[3][4], my[3][4];
        for (int i = 0; i < 3; ++i) {
            mx[i][0] = src[i].x; mx[i][1] = src[i].y; mx[i][2] = 1.0; mx[i][3] = dst[i].x;
            my[i][0] = src[i].x; my[i][1] = src[i].y; my[i][2] = 1.0; my[i][3] = dst[i].y;
        }
        auto [a, b, c] = solve3(mx);
        auto [d, e, f] = solve3(my);
        return {a, b, c, d, e, f};
    }

    Point apply(Point p) const { return {a * p.x + b * p.y + c, d * p.x + e * p.y + f}; }
};

} // namespace detail

/// Point-wise deformation of a synthetic page. Chains keep their point count
/// and order; magnitude 0 is the identity for every kind.
inline SynthPage deform(const SynthPage& page, DeformKind kind, double magnitude, uint64_t seed) {
    if (magnitude < 0.0) throw std::invalid_argument("deform: magnitude must be >= 0");
    Rng rng(seed);
    SynthPage out = page;

    auto apply = [&](auto&& fn) {
        for (auto& chain : out.baselines)
            for (auto& p : chain.points) p = fn(p);
        if (out.regions)
            for (auto& r : *out.regions)
                for (auto& p : r.boundary.points) p = fn(p);
    };

    switch (kind) {
    case DeformKind::Affine: {
        double radius = magnitude * std::max(page.width, page.height) / 2.0;
        std::array<Point, 3> src{Point{0, 0}, Point{static_cast<double>(page.width), 0},
                                 Point{0, static_cast<double>(page.height)}};
        std::array<Point, 3> dst = src;
        for (auto& p : dst) {
            double ang = rng.uniform(0.0, 2.0 * kPi);
            double rad = radius * std::sqrt(rng.uniform());
            p = p + Point{rad * std::cos(ang), rad * std::sin(ang)};
        }
        auto map = detail::AffineMap::fit(src, dst);
        apply([&](Point p) { return map.apply(p); });
        break;
    }
    case DeformKind::Elastic: {
        detail::ElasticField field(page.height, page.width, magnitude, rng);
        if (magnitude > 0.0) apply([&](Point p) { return p + field.displacement(p); });
        break;
    }
    case DeformKind::Rotation: {
        Point c{page.width / 2.0, page.height / 2.0};
        apply([&](Point p) { return detail::rotate_about(p, c, magnitude); });
        break;
    }
    }
    return out;
}

/// Separable gaussian blur with clamp-to-edge borders; sigma 0 is a no-op.
inline GrayImage gaussian_blur(const GrayImage& img, double sigma) {
    if (sigma <= 0.0) return img;
    int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += kernel[i + radius];
    }
    for (auto& k : kernel) k /= sum;

    GrayImage tmp(img.height, img.width), out(img.height, img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] * img.at(y, std::clamp(x + i, 0, img.width - 1));
            tmp.at(y, x) = acc;
        }
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] * tmp.at(std::clamp(y + i, 0, img.height - 1), x);
            out.at(y, x) = acc;
        }
    return out;
}

/// Render baseline/separator confidence maps from known ground truth: blur and
/// peak-renormalize the binary planes, then add clipped uniform noise. Stands
/// in for a trained labeler so Stage II can be exercised on its own.
inline ConfidenceMaps render_oracle_maps(const SynthPage& page, double blur_sigma,
                                         double noise_amp, uint64_t seed) {
    if (blur_sigma < 0.0) throw std::invalid_argument("render_oracle_maps: blur_sigma >= 0");
    if (noise_amp < 0.0 || noise_amp >= 0.5)
        throw std::invalid_argument("render_oracle_maps: noise_amp in [0, 0.5)");
    PixelGT gt = generate_pixel_gt(page.height, page.width, page.baselines);

    auto render_plane = [&](uint8_t c, Rng& rng) {
        GrayImage plane = gaussian_blur(gt.plane(c), blur_sigma);
        double peak = *std::max_element(plane.data.begin(), plane.data.end());
        if (peak > 0.0)
            for (auto& v : plane.data) v /= peak;
        if (noise_amp > 0.0)
            for (auto& v : plane.data)
                v = std::clamp(v + rng.uniform(-noise_amp, noise_amp), 0.0, 1.0);
        return plane;
    };

    Rng rng(seed);
    ConfidenceMaps maps;
    maps.baseline = render_plane(PixelGT::kBaseline, rng);
    maps.separator = render_plane(PixelGT::kSeparator, rng);
    return maps;
}

} // namespace bld
