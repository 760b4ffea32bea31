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
#include <map>
#include <utility>
#include <vector>

#include "bld/core.hpp"

namespace bld {
namespace detail {

// Long-double predicates: exact for integer pixel coordinates at page scale.
inline long double orient2d(Point a, Point b, Point c) {
    const long double abx = static_cast<long double>(b.x) - a.x;
    const long double aby = static_cast<long double>(b.y) - a.y;
    const long double acx = static_cast<long double>(c.x) - a.x;
    const long double acy = static_cast<long double>(c.y) - a.y;
    return abx * acy - aby * acx;
}

// > 0 iff p lies strictly inside the circumcircle of CCW triangle (a,b,c).
inline long double incircle(Point a, Point b, Point c, Point p) {
    const long double adx = static_cast<long double>(a.x) - p.x;
    const long double ady = static_cast<long double>(a.y) - p.y;
    const long double bdx = static_cast<long double>(b.x) - p.x;
    const long double bdy = static_cast<long double>(b.y) - p.y;
    const long double cdx = static_cast<long double>(c.x) - p.x;
    const long double cdy = static_cast<long double>(c.y) - p.y;
    const long double ad = adx * adx + ady * ady;
    const long double bd = bdx * bdx + bdy * bdy;
    const long double cd = cdx * cdx + cdy * cdy;
    return adx * (bdy * cd - cdy * bd) - ady * (bdx * cd - cdx * bd) +
           ad * (bdx * cdy - cdx * bdy);
}

/// Bowyer-Watson triangulation. Expects >= 3 not-all-collinear points; the
/// caller handles degenerate inputs.
inline std::vector<std::pair<int, int>> delaunay_edges(const std::vector<Point>& pts) {
    const int n = static_cast<int>(pts.size());
    double minx = pts[0].x, maxx = pts[0].x, miny = pts[0].y, maxy = pts[0].y;
    for (const auto& p : pts) {
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    const double m = std::max({maxx - minx, maxy - miny, 1.0});
    const double cx = (minx + maxx) / 2.0, cy = (miny + maxy) / 2.0;

    std::vector<Point> verts = pts;
    verts.push_back({cx - 20.0 * m, cy - 13.0 * m});
    verts.push_back({cx + 20.0 * m, cy - 13.0 * m});
    verts.push_back({cx, cy + 26.0 * m});

    struct Tri {
        int a, b, c;
        bool degenerate;
    };
    auto make_tri = [&](int a, int b, int c) {
        long double o = orient2d(verts[a], verts[b], verts[c]);
        if (o < 0) std::swap(b, c);
        return Tri{a, b, c, o == 0};
    };

    std::vector<Tri> tris{make_tri(n, n + 1, n + 2)};
    for (int i = 0; i < n; ++i) {
        const Point p = verts[i];
        std::vector<Tri> keep;
        std::map<std::pair<int, int>, int> edge_count;
        for (const auto& t : tris) {
            const bool bad =
                t.degenerate || incircle(verts[t.a], verts[t.b], verts[t.c], p) > 0;
            if (!bad) {
                keep.push_back(t);
                continue;
            }
            for (auto [u, v] : {std::pair{t.a, t.b}, {t.b, t.c}, {t.c, t.a}})
                ++edge_count[{std::min(u, v), std::max(u, v)}];
        }
        tris.swap(keep);
        for (const auto& [e, cnt] : edge_count)
            if (cnt == 1) tris.push_back(make_tri(e.first, e.second, i));
    }

    std::vector<std::pair<int, int>> edges;
    for (const auto& t : tris) {
        if (t.a >= n || t.b >= n || t.c >= n) continue;
        for (auto [u, v] : {std::pair{t.a, t.b}, {t.b, t.c}, {t.c, t.a}})
            edges.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

} // namespace detail
} // namespace bld
