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
#include <limits>
#include <stdexcept>
#include <vector>

#include "bld/core.hpp"
#include "bld/groundtruth.hpp"

namespace bld {

struct EvalReport {
    double precision = 0.0;
    double recall = 0.0;
    double f_value = 0.0;
    std::vector<std::pair<int, int>> matches; // (gt index, hyp index)
    std::vector<double> gt_coverage;          // per gt chain, 0 when unmatched
    std::vector<double> hyp_coverage;         // per hyp chain, 0 when unmatched
};

namespace detail {

inline double point_segment_distance(Point p, Point a, Point b) {
    const Point ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 < 1e-24) return norm2(p - a);
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return norm2(p - (a + t * ab));
}

inline double point_chain_distance(Point p, const PolyChain& c) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < c.points.size(); ++i)
        best = std::min(best, point_segment_distance(p, c.points[i], c.points[i + 1]));
    return best;
}

inline std::vector<Point> resample_chain(const PolyChain& c, double step = 1.0) {
    std::vector<Point> out;
    for (size_t i = 0; i + 1 < c.points.size(); ++i) {
        const Point a = c.points[i], b = c.points[i + 1];
        const double len = norm2(b - a);
        const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
        for (int j = 0; j < n; ++j) out.push_back(a + (static_cast<double>(j) / n) * (b - a));
    }
    out.push_back(c.points.back());
    return out;
}

inline double coverage(const std::vector<Point>& samples, const PolyChain& target,
                       double tol) {
    if (samples.empty()) return 0.0;
    size_t covered = 0;
    for (const Point& p : samples)
        if (point_chain_distance(p, target) <= tol) ++covered;
    return static_cast<double>(covered) / static_cast<double>(samples.size());
}

} // namespace detail

/// Greedy best-first matching of hypothesis chains to ground-truth chains on
/// a symmetric coverage score. A resampled point counts as covered when its
/// distance to the nearest segment of the other chain is within tol. Recall
/// averages gt-side coverage over all gt chains, precision hyp-side coverage
/// over all hyp chains.
inline EvalReport match_baselines(const std::vector<PolyChain>& gt,
                                  const std::vector<PolyChain>& hyp, double tol) {
    if (tol <= 0.0) throw std::invalid_argument("match_baselines: tol must be > 0");
    EvalReport rep;
    rep.gt_coverage.assign(gt.size(), 0.0);
    rep.hyp_coverage.assign(hyp.size(), 0.0);
    if (gt.empty() && hyp.empty()) {
        rep.precision = rep.recall = rep.f_value = 1.0;
        return rep;
    }
    if (gt.empty() || hyp.empty()) return rep;

    std::vector<std::vector<Point>> gt_samples(gt.size()), hyp_samples(hyp.size());
    for (size_t g = 0; g < gt.size(); ++g) gt_samples[g] = detail::resample_chain(gt[g]);
    for (size_t h = 0; h < hyp.size(); ++h) hyp_samples[h] = detail::resample_chain(hyp[h]);

    struct Pair {
        int g, h;
        double score, cov_g, cov_h;
    };
    std::vector<Pair> pairs;
    for (size_t g = 0; g < gt.size(); ++g)
        for (size_t h = 0; h < hyp.size(); ++h) {
            const double cg = detail::coverage(gt_samples[g], hyp[h], tol);
            const double ch = detail::coverage(hyp_samples[h], gt[g], tol);
            const double score = std::min(cg, ch);
            if (score > 0.0)
                pairs.push_back({static_cast<int>(g), static_cast<int>(h), score, cg, ch});
        }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.score != b.score) return a.score > b.score;
        if (std::min(a.g, a.h) != std::min(b.g, b.h))
            return std::min(a.g, a.h) < std::min(b.g, b.h);
        if (std::max(a.g, a.h) != std::max(b.g, b.h))
            return std::max(a.g, a.h) < std::max(b.g, b.h);
        return a.g < b.g;
    });

    std::vector<bool> g_used(gt.size(), false), h_used(hyp.size(), false);
    for (const auto& pr : pairs) {
        if (g_used[pr.g] || h_used[pr.h]) continue;
        g_used[pr.g] = h_used[pr.h] = true;
        rep.matches.push_back({pr.g, pr.h});
        rep.gt_coverage[pr.g] = pr.cov_g;
        rep.hyp_coverage[pr.h] = pr.cov_h;
    }

    double r = 0.0, p = 0.0;
    for (double c : rep.gt_coverage) r += c;
    for (double c : rep.hyp_coverage) p += c;
    rep.recall = r / static_cast<double>(gt.size());
    rep.precision = p / static_cast<double>(hyp.size());
    rep.f_value = (rep.precision + rep.recall > 0.0)
                      ? 2.0 * rep.precision * rep.recall / (rep.precision + rep.recall)
                      : 0.0;
    return rep;
}

/// Leftmost point of each chain (ties broken towards smaller y).
inline std::vector<Point> origin_points(const std::vector<PolyChain>& chains) {
    std::vector<Point> out;
    out.reserve(chains.size());
    for (const auto& c : chains) {
        Point best = c.points.front();
        for (const Point& p : c.points)
            if (p.x < best.x || (p.x == best.x && p.y < best.y)) best = p;
        out.push_back(best);
    }
    return out;
}

/// Default matching tolerance: a quarter of the page's median interline
/// distance estimate, floored at 12 px.
inline double default_tolerance(const std::vector<PolyChain>& gt,
                                double fallback_interline = 64.0) {
    if (gt.empty()) return 12.0;
    std::vector<double> dists;
    for (const auto& c : gt)
        dists.push_back(chain_interline_distance(c, gt, fallback_interline));
    std::sort(dists.begin(), dists.end());
    const double median = dists[dists.size() / 2];
    return std::max(12.0, 0.25 * median);
}

} // namespace bld
