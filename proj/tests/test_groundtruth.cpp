// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License. You may
// obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "bld/groundtruth.hpp"
#include "bld/rng.hpp"

using namespace bld;
using Catch::Approx;

namespace {

PolyChain horizontal(double x0, double x1, double y) {
    return PolyChain({{x0, y}, {x1, y}});
}

// Dense-sampling distance oracle: min over 0.25-px samples of both chains of
// the off-text component at the sample's local orientation.
double interline_oracle(const PolyChain& c, const std::vector<PolyChain>& all) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t si = 0; si + 1 < c.points.size(); ++si) {
        const Point a = c.points[si], b = c.points[si + 1];
        const double theta = std::atan2(b.y - a.y, b.x - a.x);
        const int n = std::max(2, static_cast<int>(norm2(b - a) * 4));
        for (int i = 0; i <= n; ++i) {
            const Point x = a + (static_cast<double>(i) / n) * (b - a);
            for (const auto& other : all) {
                if (&other == &c) continue;
                for (size_t sj = 0; sj + 1 < other.points.size(); ++sj) {
                    const Point oa = other.points[sj], ob = other.points[sj + 1];
                    const int m = std::max(2, static_cast<int>(norm2(ob - oa) * 4));
                    for (int j = 0; j <= m; ++j) {
                        const Point y = oa + (static_cast<double>(j) / m) * (ob - oa);
                        best = std::min(best, off_text_distance(x, y, theta));
                    }
                }
            }
        }
    }
    return best;
}

} // namespace

TEST_CASE("chain_interline_distance") {
    SECTION("two parallel horizontal chains") {
        std::vector<PolyChain> chains{horizontal(0, 100, 100), horizontal(0, 100, 150)};
        CHECK(chain_interline_distance(chains[0], chains, 64) == Approx(50.0).margin(1e-6));
    }
    SECTION("lone chain falls back to the default") {
        std::vector<PolyChain> chains{horizontal(0, 100, 100)};
        CHECK(chain_interline_distance(chains[0], chains, 64) == Approx(64.0));
    }
    SECTION("diagonal chain with a parallel neighbor offset by (10,10)") {
        // directions (1,-1): the (10,10) offset is purely orthogonal
        PolyChain a({{0, 100}, {100, 0}});
        PolyChain b({{10, 110}, {110, 10}});
        std::vector<PolyChain> chains{a, b};
        const double got = chain_interline_distance(chains[0], chains, 64);
        CHECK(got == Approx(10.0 * std::sqrt(2.0)).margin(0.05));
        CHECK(got == Approx(interline_oracle(chains[0], chains)).margin(0.05));
    }
}

TEST_CASE("generate_pixel_gt covers the degenerate and simple cases") {
    SECTION("no chains gives an all-other page") {
        PixelGT gt = generate_pixel_gt(20, 30, {});
        for (auto c : gt.cls) CHECK(c == PixelGT::kOther);
    }

    SECTION("one horizontal chain per the rasterization contract") {
        std::vector<PolyChain> chains{horizontal(10, 50, 20)};
        PixelGT gt = generate_pixel_gt(40, 64, chains, 6.0);

        // separator bars: 3 px wide around x=10 and x=50, length ~6+2
        int sep_left = 0, sep_right = 0, base = 0;
        for (int y = 0; y < 40; ++y)
            for (int x = 0; x < 64; ++x) {
                if (gt.at(y, x) == PixelGT::kSeparator) {
                    if (std::abs(x - 10) <= 1) ++sep_left;
                    if (std::abs(x - 50) <= 1) ++sep_right;
                    CHECK((std::abs(x - 10) <= 1 || std::abs(x - 50) <= 1));
                }
                if (gt.at(y, x) == PixelGT::kBaseline) {
                    ++base;
                    CHECK(std::abs(y - 20) <= 1); // 3-px band
                    CHECK(x >= 12);               // end caps carved out
                    CHECK(x <= 48);
                }
            }
        CHECK(sep_left >= 3 * 7);
        CHECK(sep_right >= 3 * 7);
        CHECK(base == 3 * (48 - 12 + 1));
    }

    SECTION("two parallel chains use their spacing as stroke length") {
        std::vector<PolyChain> chains{horizontal(20, 120, 50), horizontal(60, 160, 90)};
        PixelGT gt = generate_pixel_gt(160, 200, chains);
        // the stroke at (20,50) spans roughly y in [50-20-1, 50+20+1]
        int ymin = 1000, ymax = -1;
        for (int y = 0; y < 160; ++y)
            if (gt.at(y, 20) == PixelGT::kSeparator) {
                ymin = std::min(ymin, y);
                ymax = std::max(ymax, y);
            }
        CHECK(ymax - ymin == Approx(40 + 2).margin(2));
    }
}

TEST_CASE("generate_pixel_gt planes always partition, separator wins") {
    auto pages = synth_corpus(3, 77, SynthStyle::Mixed);
    for (const auto& page : pages) {
        PixelGT gt = generate_pixel_gt(page.height, page.width, page.baselines);
        GrayImage b = gt.plane(PixelGT::kBaseline);
        GrayImage s = gt.plane(PixelGT::kSeparator);
        GrayImage o = gt.plane(PixelGT::kOther);
        for (size_t i = 0; i < b.data.size(); ++i)
            REQUIRE(b.data[i] + s.data[i] + o.data[i] == 1.0);
    }
    // end strokes cross their own chain's band; separator wins those pixels
    std::vector<PolyChain> chains{horizontal(10, 60, 30), horizontal(10, 60, 50)};
    PixelGT gt = generate_pixel_gt(90, 100, chains);
    bool stroke_through_band = false;
    for (int x = 9; x <= 11; ++x)
        if (gt.at(30, x) == PixelGT::kSeparator) stroke_through_band = true;
    CHECK(stroke_through_band);
    CHECK(gt.at(30, 10) != PixelGT::kBaseline);
}

TEST_CASE("synth_corpus determinism and styles") {
    SECTION("same seed reproduces the corpus exactly") {
        auto a = synth_corpus(4, 7, SynthStyle::Mixed);
        auto b = synth_corpus(4, 7, SynthStyle::Mixed);
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].width == b[i].width);
            CHECK(a[i].height == b[i].height);
            REQUIRE(a[i].baselines.size() == b[i].baselines.size());
            for (size_t c = 0; c < a[i].baselines.size(); ++c) {
                REQUIRE(a[i].baselines[c].points.size() == b[i].baselines[c].points.size());
                for (size_t p = 0; p < a[i].baselines[c].points.size(); ++p)
                    CHECK(a[i].baselines[c].points[p] == b[i].baselines[c].points[p]);
            }
        }
    }

    SECTION("straight pages have constant y per chain") {
        for (const auto& page : synth_corpus(3, 9, SynthStyle::Straight)) {
            CHECK(page.baselines.size() >= 5);
            CHECK(page.baselines.size() <= 30);
            for (const auto& chain : page.baselines)
                for (const auto& p : chain.points) CHECK(p.y == chain.points[0].y);
        }
    }

    SECTION("rotation by exactly 90 degrees gives constant x") {
        for (const auto& page : synth_corpus(2, 10, SynthStyle::Rotated, kPi / 2)) {
            for (const auto& chain : page.baselines)
                for (const auto& p : chain.points)
                    CHECK(p.x == Approx(chain.points[0].x).margin(1e-9));
        }
    }

    SECTION("chains stay inside the page") {
        for (const auto& page : synth_corpus(6, 11, SynthStyle::Mixed))
            for (const auto& chain : page.baselines)
                for (const auto& p : chain.points) {
                    CHECK(p.x >= 0.0);
                    CHECK(p.y >= 0.0);
                    CHECK(p.x <= page.width);
                    CHECK(p.y <= page.height);
                }
    }
}

TEST_CASE("deform") {
    auto page = synth_corpus(1, 5, SynthStyle::Straight)[0];

    SECTION("magnitude zero is the identity for every kind") {
        for (auto kind : {DeformKind::Affine, DeformKind::Elastic, DeformKind::Rotation}) {
            SynthPage out = deform(page, kind, 0.0, 123);
            for (size_t c = 0; c < page.baselines.size(); ++c)
                for (size_t p = 0; p < page.baselines[c].points.size(); ++p) {
                    CHECK(out.baselines[c].points[p].x ==
                          Approx(page.baselines[c].points[p].x).margin(1e-12));
                    CHECK(out.baselines[c].points[p].y ==
                          Approx(page.baselines[c].points[p].y).margin(1e-12));
                }
        }
    }

    SECTION("rotation by pi maps (x,y) to (W-x, H-y)") {
        SynthPage out = deform(page, DeformKind::Rotation, kPi, 1);
        for (size_t c = 0; c < page.baselines.size(); ++c)
            for (size_t p = 0; p < page.baselines[c].points.size(); ++p) {
                const Point orig = page.baselines[c].points[p];
                const Point got = out.baselines[c].points[p];
                CHECK(got.x == Approx(page.width - orig.x));
                CHECK(got.y == Approx(page.height - orig.y));
            }
    }

    SECTION("affine deformation is an affine map") {
        SynthPage out = deform(page, DeformKind::Affine, 0.025, 9);
        // an affine map preserves affine combinations: f(a - b + c) = f(a) - f(b) + f(c)
        const auto& src = page.baselines[0].points;
        const auto& dst = out.baselines[0].points;
        REQUIRE(src.size() >= 3);
        const Point combo_src = src[0] - src[1] + src[2];
        // find the image of combo by fitting on two other points of the page
        // instead: check collinearity preservation along the straight chain
        for (size_t p = 2; p < dst.size(); ++p) {
            const Point d1 = dst[p] - dst[p - 1];
            const Point d0 = dst[p - 1] - dst[p - 2];
            CHECK(cross(d0, d1) == Approx(0.0).margin(1e-6));
        }
        (void)combo_src;
    }

    SECTION("affine 3-point solve matches an independent closed form") {
        const std::array<Point, 3> src{Point{0, 0}, Point{100, 0}, Point{0, 80}};
        const std::array<Point, 3> dst{Point{3, 2}, Point{104, -1}, Point{-2, 85}};
        auto map = bld::detail::AffineMap::fit(src, dst);
        // closed form for this source triangle: columns are (dst1-dst0)/100,
        // (dst2-dst0)/80, offset dst0
        const double a = (dst[1].x - dst[0].x) / 100.0, d = (dst[1].y - dst[0].y) / 100.0;
        const double b = (dst[2].x - dst[0].x) / 80.0, e = (dst[2].y - dst[0].y) / 80.0;
        CHECK(map.a == Approx(a).margin(1e-12));
        CHECK(map.b == Approx(b).margin(1e-12));
        CHECK(map.c == Approx(dst[0].x).margin(1e-12));
        CHECK(map.d == Approx(d).margin(1e-12));
        CHECK(map.e == Approx(e).margin(1e-12));
        CHECK(map.f == Approx(dst[0].y).margin(1e-12));
    }

    SECTION("elastic displacement is bounded by the magnitude") {
        SynthPage out = deform(page, DeformKind::Elastic, 3.0, 5);
        for (size_t c = 0; c < page.baselines.size(); ++c)
            for (size_t p = 0; p < page.baselines[c].points.size(); ++p) {
                const double dx =
                    out.baselines[c].points[p].x - page.baselines[c].points[p].x;
                const double dy =
                    out.baselines[c].points[p].y - page.baselines[c].points[p].y;
                CHECK(std::abs(dx) <= 3.0 + 1e-9);
                CHECK(std::abs(dy) <= 3.0 + 1e-9);
            }
    }

    SECTION("deform preserves point counts and order") {
        SynthPage out = deform(page, DeformKind::Elastic, 2.0, 6);
        REQUIRE(out.baselines.size() == page.baselines.size());
        for (size_t c = 0; c < page.baselines.size(); ++c)
            CHECK(out.baselines[c].points.size() == page.baselines[c].points.size());
    }
}

TEST_CASE("render_oracle_maps") {
    auto page = synth_corpus(1, 21, SynthStyle::Straight)[0];

    SECTION("no blur and no noise reproduces the binary planes") {
        ConfidenceMaps maps = render_oracle_maps(page, 0.0, 0.0, 1);
        PixelGT gt = generate_pixel_gt(page.height, page.width, page.baselines);
        GrayImage b = gt.plane(PixelGT::kBaseline);
        GrayImage s = gt.plane(PixelGT::kSeparator);
        REQUIRE(maps.baseline.data.size() == b.data.size());
        for (size_t i = 0; i < b.data.size(); ++i) {
            CHECK(maps.baseline.data[i] == b.data[i]);
            CHECK(maps.separator.data[i] == s.data[i]);
        }
    }

    SECTION("same seed renders identical maps") {
        ConfidenceMaps a = render_oracle_maps(page, 1.5, 0.2, 7);
        ConfidenceMaps b = render_oracle_maps(page, 1.5, 0.2, 7);
        CHECK(a.baseline.data == b.baseline.data);
        CHECK(a.separator.data == b.separator.data);
    }

    SECTION("blur keeps baseline peaks above off-band values") {
        ConfidenceMaps maps = render_oracle_maps(page, 2.0, 0.0, 1);
        PixelGT gt = generate_pixel_gt(page.height, page.width, page.baselines);
        double on_max = 0.0, off_max = 0.0;
        auto dilated = gt.plane(PixelGT::kBaseline);
        for (int y = 0; y < page.height; ++y)
            for (int x = 0; x < page.width; ++x) {
                bool near_band = false;
                for (int dy = -8; dy <= 8 && !near_band; ++dy)
                    for (int dx = -8; dx <= 8 && !near_band; ++dx)
                        if (y + dy >= 0 && y + dy < page.height && x + dx >= 0 &&
                            x + dx < page.width && dilated.at(y + dy, x + dx) > 0)
                            near_band = true;
                if (gt.at(y, x) == PixelGT::kBaseline)
                    on_max = std::max(on_max, maps.baseline.at(y, x));
                else if (!near_band)
                    off_max = std::max(off_max, maps.baseline.at(y, x));
            }
        CHECK(on_max >= off_max);
        CHECK(on_max >= 0.8); // peak renormalization keeps confident baselines
    }

    SECTION("noisy peaks remain above 0.8 for amplitude 0.2") {
        ConfidenceMaps maps = render_oracle_maps(page, 1.5, 0.2, 9);
        PixelGT gt = generate_pixel_gt(page.height, page.width, page.baselines);
        double on_max = 0.0;
        for (int y = 0; y < page.height; ++y)
            for (int x = 0; x < page.width; ++x)
                if (gt.at(y, x) == PixelGT::kBaseline)
                    on_max = std::max(on_max, maps.baseline.at(y, x));
        CHECK(on_max >= 0.8);
    }

    SECTION("parameter validation") {
        CHECK_THROWS_AS(render_oracle_maps(page, -1.0, 0.0, 1), std::invalid_argument);
        CHECK_THROWS_AS(render_oracle_maps(page, 0.0, 0.5, 1), std::invalid_argument);
    }
}
