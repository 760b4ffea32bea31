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
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace bld {

inline constexpr double kPi = 3.14159265358979323846;

/// Malformed file content (bad magic, truncated payload, broken JSON).
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Image-space point: x grows rightward, y grows downward.
struct Point {
    double x = 0.0;
    double y = 0.0;

    friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
    friend bool operator==(Point a, Point b) { return a.x == b.x && a.y == b.y; }
};

inline double norm2(Point p) { return std::hypot(p.x, p.y); }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }

/// Ordered point sequence of length >= 2 with distinct consecutive points.
struct PolyChain {
    std::vector<Point> points;

    PolyChain() = default;
    explicit PolyChain(std::vector<Point> pts) : points(std::move(pts)) {
        if (points.size() < 2)
            throw std::invalid_argument("PolyChain: needs at least 2 points");
        for (size_t i = 1; i < points.size(); ++i)
            if (points[i] == points[i - 1])
                throw std::invalid_argument("PolyChain: consecutive points must be distinct");
    }

    double length() const {
        double len = 0.0;
        for (size_t i = 1; i < points.size(); ++i) len += norm2(points[i] - points[i - 1]);
        return len;
    }
};

/// Dense 2-D intensity raster, values in [0,1], indexed [row=y][col=x].
struct GrayImage {
    int height = 0;
    int width = 0;
    std::vector<double> data;

    GrayImage() = default;
    GrayImage(int h, int w, double fill = 0.0)
        : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {
        if (h < 1 || w < 1) throw std::invalid_argument("GrayImage: dims must be >= 1");
    }

    double& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
    double at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
    bool in_bounds(int y, int x) const { return y >= 0 && y < height && x >= 0 && x < width; }
};

/// Per-class confidence planes. The third plane is optional; when all three
/// are present the per-pixel class sum is 1 (up to 1e-5).
struct ConfidenceMaps {
    GrayImage baseline;
    GrayImage separator;
    std::optional<GrayImage> other;

    int height() const { return baseline.height; }
    int width() const { return baseline.width; }

    void validate() const {
        if (separator.height != baseline.height || separator.width != baseline.width)
            throw std::invalid_argument("ConfidenceMaps: plane dims differ");
        if (other && (other->height != baseline.height || other->width != baseline.width))
            throw std::invalid_argument("ConfidenceMaps: plane dims differ");
        if (other) {
            for (size_t i = 0; i < baseline.data.size(); ++i) {
                double s = baseline.data[i] + separator.data[i] + other->data[i];
                if (std::abs(s - 1.0) > 1e-5)
                    throw std::invalid_argument("ConfidenceMaps: class sum != 1");
            }
        }
    }
};

/// Closed polygonal region; the last point implicitly connects to the first.
/// Containment is defined by crossing parity, so self-intersection is allowed.
struct Region {
    PolyChain boundary;

    Region() = default;
    explicit Region(PolyChain b) : boundary(std::move(b)) {
        if (boundary.points.size() < 3)
            throw std::invalid_argument("Region: needs at least 3 points");
    }
};

/// Stage II parameters. Defaults are the fixed values used throughout.
struct PipelineConfig {
    double bin_threshold = 0.2;            // b
    double min_sp_distance = 10.0;         // d
    std::array<int, 4> diameters{64, 128, 256, 512};
    std::array<int, 3> harmonics{3, 4, 5}; // k
    double sigma = 25.0;                   // smoothing-cost cap
    double alpha = 1.0;                    // data-cost weight
    double beta = 1.0;                     // smoothing-cost weight
    double gamma = 0.3;                    // curvilinearity bound
    double delta = 0.5;                    // cluster-separation factor
    double eta = 0.125;                    // separator connectivity threshold
    int reg_degree = 3;                    // regression polynomial degree
    int min_sps_per_baseline = 2;
    double data_cost_cap = 20.0;
    bool connectivity_literal = false;     // divide the path integral by edge length

    void validate() const {
        if (bin_threshold < 0.0 || bin_threshold >= 1.0 || min_sp_distance <= 0.0 ||
            sigma <= 0.0 || gamma <= 0.0 || delta <= 0.0 || eta <= 0.0 ||
            reg_degree < 1 || min_sps_per_baseline < 2 || data_cost_cap <= 0.0)
            throw std::invalid_argument("PipelineConfig: invalid threshold");
        for (size_t i = 1; i < diameters.size(); ++i)
            if (diameters[i] != 2 * diameters[i - 1])
                throw std::invalid_argument("PipelineConfig: diameters must double");
    }
};

namespace detail {
// Does p lie on the closed segment [a,b] (within a small absolute tolerance)?
inline bool on_segment(Point p, Point a, Point b, double eps = 1e-9) {
    Point ab = b - a, ap = p - a;
    double len = norm2(ab);
    if (len < eps) return norm2(ap) <= eps;
    if (std::abs(cross(ab, ap)) > eps * len) return false;
    double t = dot(ap, ab) / (len * len);
    return t >= -eps && t <= 1.0 + eps;
}
} // namespace detail

/// Crossing-parity containment test. Points exactly on the boundary count as
/// inside, so baselines touching a region border are not dropped.
inline bool point_in_region(Point p, const Region& r) {
    const auto& pts = r.boundary.points;
    const size_t n = pts.size();
    for (size_t i = 0; i < n; ++i)
        if (detail::on_segment(p, pts[i], pts[(i + 1) % n])) return true;
    // Ray towards +x; half-open vertex rule avoids double counting.
    bool inside = false;
    for (size_t i = 0; i < n; ++i) {
        Point a = pts[i], b = pts[(i + 1) % n];
        if ((a.y > p.y) != (b.y > p.y)) {
            double xin = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < xin) inside = !inside;
        }
    }
    return inside;
}

/// Nearest-pixel intensity lookup: round half away from zero on each axis,
/// then clamp to the raster bounds.
inline double interp_intensity(const GrayImage& img, Point p) {
    int x = static_cast<int>(std::round(p.x));
    int y = static_cast<int>(std::round(p.y));
    x = std::clamp(x, 0, img.width - 1);
    y = std::clamp(y, 0, img.height - 1);
    return img.at(y, x);
}

/// Length of the component of p-q orthogonal to orientation theta.
inline double off_text_distance(Point p, Point q, double theta) {
    return std::abs((p.x - q.x) * std::sin(theta) - (p.y - q.y) * std::cos(theta));
}

/// Fold an angle difference into the axial range [0, pi/2].
inline double axial_difference(double a, double b) {
    double d = std::fmod(std::abs(a - b), kPi);
    return std::min(d, kPi - d);
}

/// Fold an angle into (-pi/2, pi/2].
inline double normalize_axial(double theta) {
    double t = std::fmod(theta, kPi);
    if (t > kPi / 2.0) t -= kPi;
    if (t <= -kPi / 2.0) t += kPi;
    return t;
}

} // namespace bld
