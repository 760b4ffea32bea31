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

#include "bld/rng.hpp"
#include "bld/superpixels.hpp"

using namespace bld;
using Catch::Approx;

namespace {

// Literal skeleton formula evaluated with its own erosion/opening code.
struct MorphOracle {
    static BinaryImage erode(const BinaryImage& x) {
        const int h = x.height, w = x.width;
        BinaryImage out(h, w);
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx) {
                bool all = true;
                for (int dy = -1; dy <= 1 && all; ++dy)
                    for (int dx = -1; dx <= 1 && all; ++dx) {
                        const int yy = y + dy, xc = xx + dx;
                        all = yy >= 0 && yy < h && xc >= 0 && xc < w && x.at(yy, xc);
                    }
                out.at(y, xx) = all ? 1 : 0;
            }
        return out;
    }
    static BinaryImage dilate(const BinaryImage& x) {
        BinaryImage out(x.height, x.width);
        for (int y = 0; y < x.height; ++y)
            for (int xx = 0; xx < x.width; ++xx) {
                bool any = false;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int yy = y + dy, xc = xx + dx;
                        any = any || (yy >= 0 && yy < x.height && xc >= 0 && xc < x.width &&
                                      x.at(yy, xc));
                    }
                out.at(y, xx) = any ? 1 : 0;
            }
        return out;
    }
    static BinaryImage skeleton(const BinaryImage& x) {
        BinaryImage result(x.height, x.width);
        BinaryImage eroded = x;
        while (!eroded.empty_image()) {
            BinaryImage opened = dilate(erode(eroded));
            for (size_t i = 0; i < result.data.size(); ++i)
                if (eroded.data[i] && !opened.data[i]) result.data[i] = 1;
            eroded = erode(eroded);
        }
        return result;
    }
};

BinaryImage random_blob(int h, int w, Rng& rng) {
    BinaryImage img(h, w);
    const int discs = rng.uniform_int(1, 5);
    for (int d = 0; d < discs; ++d) {
        const double cx = rng.uniform(0, w), cy = rng.uniform(0, h);
        const double r = rng.uniform(2, 12);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) img.at(y, x) = 1;
    }
    return img;
}

} // namespace

TEST_CASE("binarize uses a strict comparison") {
    GrayImage map(2, 2);
    map.at(0, 0) = 0.2;
    map.at(0, 1) = 0.21;
    BinaryImage out = binarize(map, 0.2);
    CHECK(out.at(0, 0) == 0);
    CHECK(out.at(0, 1) == 1);
    CHECK(out.at(1, 0) == 0);

    BinaryImage zeros = binarize(GrayImage(5, 5, 0.0), 0.2);
    CHECK(zeros.empty_image());
    CHECK_THROWS_AS(binarize(map, 1.0), std::invalid_argument);
}

TEST_CASE("skeletonize simple cases") {
    SECTION("a single isolated pixel is its own skeleton") {
        BinaryImage img(7, 7);
        img.at(3, 3) = 1;
        BinaryImage sk = skeletonize(img);
        CHECK(sk.count() == 1);
        CHECK(sk.at(3, 3) == 1);
    }
    SECTION("empty input gives an empty skeleton") {
        CHECK(skeletonize(BinaryImage(5, 8)).empty_image());
    }
    SECTION("filled 5x5 square matches the literal formula") {
        BinaryImage img(9, 9);
        for (int y = 2; y <= 6; ++y)
            for (int x = 2; x <= 6; ++x) img.at(y, x) = 1;
        CHECK(skeletonize(img) == MorphOracle::skeleton(img));
    }
}

TEST_CASE("skeleton is a subset and matches the formula on random blobs") {
    Rng rng(31);
    for (int iter = 0; iter < 15; ++iter) {
        BinaryImage img = random_blob(rng.uniform_int(8, 48), rng.uniform_int(8, 48), rng);
        BinaryImage sk = skeletonize(img);
        for (size_t i = 0; i < img.data.size(); ++i)
            if (sk.data[i]) REQUIRE(img.data[i]);
        CHECK(sk == MorphOracle::skeleton(img));
    }
}

TEST_CASE("skeleton subsets reconstruct the original image") {
    Rng rng(32);
    for (int iter = 0; iter < 30; ++iter) {
        BinaryImage img = random_blob(rng.uniform_int(8, 64), rng.uniform_int(8, 64), rng);
        auto subsets = skeleton_subsets(img);
        BinaryImage rebuilt(img.height, img.width);
        for (size_t k = 0; k < subsets.size(); ++k) {
            BinaryImage grown = subsets[k];
            for (size_t d = 0; d < k; ++d) grown = dilate3(grown);
            for (size_t i = 0; i < rebuilt.data.size(); ++i)
                rebuilt.data[i] = rebuilt.data[i] || grown.data[i];
        }
        REQUIRE(rebuilt == img);
    }
}

TEST_CASE("select_superpixels greedy rules") {
    SECTION("a close weaker pixel is suppressed") {
        GrayImage map(10, 20);
        BinaryImage skel(10, 20);
        skel.at(5, 5) = 1;
        map.at(5, 5) = 0.9;
        skel.at(5, 10) = 1; // 5 px away
        map.at(5, 10) = 0.8;
        auto sps = select_superpixels(skel, map, 10.0);
        REQUIRE(sps.size() == 1);
        CHECK(sps[0].pos.x == 5);
        CHECK(sps[0].confidence == Approx(0.9));
    }
    SECTION("pixels strictly farther than d both survive") {
        GrayImage map(10, 20);
        BinaryImage skel(10, 20);
        skel.at(5, 3) = 1;
        map.at(5, 3) = 0.9;
        skel.at(5, 14) = 1; // 11 px away
        map.at(5, 14) = 0.8;
        CHECK(select_superpixels(skel, map, 10.0).size() == 2);
    }
    SECTION("uniform 100-px line keeps 9-10 pixels, pairwise audited") {
        GrayImage map(5, 100, 0.5);
        BinaryImage skel(5, 100);
        for (int x = 0; x < 100; ++x) skel.at(2, x) = 1;
        auto sps = select_superpixels(skel, map, 10.0);
        CHECK(sps.size() >= 9);
        CHECK(sps.size() <= 10);
        for (size_t i = 0; i < sps.size(); ++i)
            for (size_t j = i + 1; j < sps.size(); ++j)
                REQUIRE(norm2(sps[i].pos - sps[j].pos) > 10.0);
    }
}

TEST_CASE("select_superpixels output properties on random inputs") {
    Rng rng(33);
    for (int iter = 0; iter < 10; ++iter) {
        const int h = rng.uniform_int(16, 64), w = rng.uniform_int(16, 64);
        GrayImage map(h, w);
        for (auto& v : map.data) v = rng.uniform();
        BinaryImage skel(h, w);
        for (auto& v : skel.data) v = rng.uniform() < 0.3;
        const double d = rng.uniform(2.0, 9.0);
        auto sps = select_superpixels(skel, map, d);

        for (size_t i = 1; i < sps.size(); ++i)
            REQUIRE(sps[i - 1].confidence >= sps[i].confidence); // ordering
        for (size_t i = 0; i < sps.size(); ++i)
            for (size_t j = i + 1; j < sps.size(); ++j)
                REQUIRE(norm2(sps[i].pos - sps[j].pos) > d); // pairwise distance

        // greedy maximality: every skeleton pixel is selected or dominated
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (!skel.at(y, x)) continue;
                bool ok = false;
                for (const auto& sp : sps) {
                    const bool same = sp.pos.x == x && sp.pos.y == y;
                    const bool dominates =
                        norm2(sp.pos - Point{double(x), double(y)}) <= d &&
                        sp.confidence >= map.at(y, x);
                    if (same || dominates) {
                        ok = true;
                        break;
                    }
                }
                REQUIRE(ok);
            }
    }
}
