// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License. You may
// obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// End-to-end acceptance suite. Each criterion prints one pass/fail line; the
// exit code is the number of failed criteria. The first argument must be the
// path to the CLI binary (used by the determinism criterion).

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bld/bld.hpp"
#include "support/audit.hpp"
#include "support/oracles.hpp"

using namespace bld;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
    std::printf("criterion %2d (%s): %s  [%s]\n", criterion, name.c_str(),
                pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

struct PooledEval {
    double gt_sum = 0.0, hyp_sum = 0.0;
    size_t gt_n = 0, hyp_n = 0;

    void add(const EvalReport& rep) {
        for (double c : rep.gt_coverage) gt_sum += c;
        for (double c : rep.hyp_coverage) hyp_sum += c;
        gt_n += rep.gt_coverage.size();
        hyp_n += rep.hyp_coverage.size();
    }

    double recall() const { return gt_n ? gt_sum / gt_n : 0.0; }
    double precision() const { return hyp_n ? hyp_sum / hyp_n : 0.0; }
    double f_value() const {
        const double p = precision(), r = recall();
        return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    }
};

// Shared audit across every clustering the suite produces (criterion 7).
size_t g_audited = 0;
std::vector<std::string> g_audit_violations;

void audit_detection(const DetectionResult& det, const PipelineConfig& cfg,
                     const GrayImage& baseline_map) {
    std::vector<Point> positions(det.sps.size());
    for (size_t i = 0; i < det.sps.size(); ++i) positions[i] = det.sps[i].pos;
    auto violations =
        audit::check_feasible(det.partition, positions, det.states, det.reduced, cfg);
    if (!audit::check_energy_log(det.moves, det.partition, det.reduced, positions,
                                 baseline_map))
        violations.push_back("energy log not monotone or final mismatch");
    ++g_audited;
    for (auto& v : violations) g_audit_violations.push_back(v);
}

PooledEval run_style(SynthStyle style, uint64_t seed, const PipelineConfig& cfg,
                     int pages = 20) {
    PooledEval pooled;
    auto corpus = synth_corpus(pages, seed, style);
    for (const auto& page : corpus) {
        ConfidenceMaps maps = render_oracle_maps(page, 1.5, 0.0, page.seed);
        DetectionResult det = detect_from_maps(maps, cfg);
        audit_detection(det, cfg, maps.baseline);
        const double tol = default_tolerance(page.baselines);
        pooled.add(match_baselines(page.baselines, det.baselines, tol));
    }
    return pooled;
}

// Two-column page with collinear rows; the columns sit closer than
// delta * interline so only the separator plane can keep them apart.
SynthPage two_column_page() {
    SynthPage page;
    page.width = 640;
    page.height = 480;
    page.seed = 99;
    for (int r = 0; r < 6; ++r) {
        const double y = 64.0 + 64.0 * r;
        page.baselines.push_back(PolyChain({{40.0, y}, {300.0, y}}));
        page.baselines.push_back(PolyChain({{320.0, y}, {580.0, y}}));
    }
    return page;
}

// Separator plane as a trained labeler would emit it for that page: one
// stroke per line end, sized by the within-column interline distance. (The
// ground-truth generator would size the divide strokes by the off-text
// distance to the collinear facing row, which is 0 here.)
GrayImage two_column_separators(const SynthPage& page, double interline, double blur) {
    std::vector<uint8_t> raster(static_cast<size_t>(page.width) * page.height, 0);
    for (const auto& chain : page.baselines)
        for (const Point& end : {chain.points.front(), chain.points.back()})
            bld::detail::draw_segment(raster, page.height, page.width,
                                      {end.x, end.y - interline / 2.0},
                                      {end.x, end.y + interline / 2.0});
    raster = bld::detail::dilate3(raster, page.height, page.width);
    GrayImage plane(page.height, page.width);
    for (size_t i = 0; i < raster.size(); ++i) plane.data[i] = raster[i];
    plane = gaussian_blur(plane, blur);
    const double peak = *std::max_element(plane.data.begin(), plane.data.end());
    if (peak > 0.0)
        for (auto& v : plane.data) v /= peak;
    return plane;
}

int cross_column_chains(const std::vector<PolyChain>& chains) {
    int crossing = 0;
    for (const auto& c : chains) {
        const double x0 = c.points.front().x, x1 = c.points.back().x;
        if (std::min(x0, x1) < 305.0 && std::max(x0, x1) > 315.0) ++crossing;
    }
    return crossing;
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <path-to-cli>\n", argv[0]);
        return 64;
    }
    const std::string cli = argv[1];
    PipelineConfig cfg;

    // 1. synthetic end-to-end, straight
    {
        const auto t0 = std::chrono::steady_clock::now();
        PooledEval pooled = run_style(SynthStyle::Straight, 20260809, cfg);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool pass = pooled.f_value() >= 0.99 && secs < 60.0;
        report(1, "straight end-to-end", pass,
               "F=" + fmt(pooled.f_value()) + " over 20 pages in " + fmt(secs) + "s");
    }

    // 2. synthetic end-to-end, curved and rotated
    {
        PooledEval curved = run_style(SynthStyle::Curved, 20260810, cfg);
        PooledEval rotated = run_style(SynthStyle::Rotated, 20260811, cfg);
        const bool pass = curved.f_value() >= 0.95 && rotated.f_value() >= 0.95;
        report(2, "curved/rotated end-to-end", pass,
               "F_curved=" + fmt(curved.f_value()) + " F_rotated=" + fmt(rotated.f_value()));
    }

    // 3. separator efficacy on a tight two-column page
    {
        SynthPage page = two_column_page();
        ConfidenceMaps maps = render_oracle_maps(page, 1.5, 0.0, page.seed);
        maps.separator = two_column_separators(page, 64.0, 1.5);
        DetectionResult with_sep = detect_from_maps(maps, cfg, std::nullopt, true);
        DetectionResult without_sep = detect_from_maps(maps, cfg, std::nullopt, false);
        audit_detection(with_sep, cfg, maps.baseline);
        audit_detection(without_sep, cfg, maps.baseline);
        const int merged_without = cross_column_chains(without_sep.baselines);
        const int merged_with = cross_column_chains(with_sep.baselines);
        const bool pass = merged_without >= 1 && merged_with == 0;
        report(3, "separator efficacy", pass,
               "cross-column chains without/with separators: " +
                   std::to_string(merged_without) + "/" + std::to_string(merged_with));
    }

    // 4. pairwise-swap minimizer against exhaustive search
    {
        const auto labels = InterlineLabelSet::make(cfg);
        Rng rng(424242);
        int optimal = 0, greedy_ok = 0;
        const int total = 100;
        for (int iter = 0; iter < total; ++iter) {
            const int n = rng.uniform_int(1, 5);
            std::vector<Point> pos;
            for (int i = 0; i < n; ++i)
                pos.push_back(
                    {std::floor(rng.uniform(0, 600)), std::floor(rng.uniform(0, 600))});
            NeighborhoodSystem ns = build_neighborhood(pos);
            std::vector<std::vector<double>> costs(n);
            for (int p = 0; p < n; ++p)
                costs[p] = data_costs(pos[p], pos, rng.uniform(-1.5, 1.5), cfg, labels);
            auto got = minimize_labeling(costs, ns, cfg.alpha, cfg.beta, cfg.sigma);
            const double got_cost =
                labeling_cost(got, costs, ns, cfg.alpha, cfg.beta, cfg.sigma);
            auto [best, best_cost] =
                oracle::exhaustive_labeling(costs, ns, cfg.alpha, cfg.beta, cfg.sigma);
            (void)best;
            if (std::abs(got_cost - best_cost) <= 1e-9) ++optimal;
            std::vector<int> greedy(n);
            for (int p = 0; p < n; ++p) {
                int b = 0;
                for (int l = 1; l < labels.size(); ++l)
                    if (costs[p][l] < costs[p][b]) b = l;
                greedy[p] = b;
            }
            if (got_cost <=
                labeling_cost(greedy, costs, ns, cfg.alpha, cfg.beta, cfg.sigma) + 1e-9)
                ++greedy_ok;
        }
        const bool pass = optimal >= 95 && greedy_ok == total;
        report(4, "graph-cut vs exhaustive", pass,
               "optimal " + std::to_string(optimal) + "/100, never-above-greedy " +
                   std::to_string(greedy_ok) + "/100");
    }

    // 5. spectral normalization against the naive DFT oracle
    {
        Rng rng(5150);
        bool pass = true;
        double worst_sum = 0.0, worst_bin = 0.0;
        for (int d : cfg.diameters) {
            for (int iter = 0; iter < 1000 && pass; ++iter) {
                std::vector<int> hist(d);
                for (auto& h : hist) h = rng.uniform_int(0, 9);
                auto H = oracle::naive_dft(hist);
                double total = 0.0;
                for (int j = 1; j < d; ++j) total += std::norm(H[j]);
                if (total < 1e-12) continue;
                double sum = 0.0;
                for (int k = 1; k <= d / 2; ++k) {
                    double frac = std::norm(H[k]);
                    if (k != d - k) frac += std::norm(H[d - k]);
                    sum += frac / total;
                }
                worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
                for (int k : cfg.harmonics) {
                    const double impl = profile_energy_fraction(hist, k);
                    double want = std::norm(H[k]);
                    if (k != d - k) want += std::norm(H[d - k]);
                    want /= total;
                    worst_bin = std::max(worst_bin, std::abs(impl - want));
                }
                pass = worst_sum <= 1e-9 && worst_bin <= 1e-9;
            }
        }
        report(5, "Parseval normalization", pass,
               "max |sum-1|=" + fmt(worst_sum * 1e9) + "e-9, max bin err=" +
                   fmt(worst_bin * 1e9) + "e-9 over 4x1000 profiles");
    }

    // 6. skeleton reconstruction
    {
        Rng rng(6160);
        bool pass = true;
        for (int iter = 0; iter < 200 && pass; ++iter) {
            const int h = rng.uniform_int(8, 64), w = rng.uniform_int(8, 64);
            BinaryImage img(h, w);
            const int discs = rng.uniform_int(1, 5);
            for (int dsc = 0; dsc < discs; ++dsc) {
                const double cx = rng.uniform(0, w), cy = rng.uniform(0, h);
                const double r = rng.uniform(2, 12);
                for (int y = 0; y < h; ++y)
                    for (int x = 0; x < w; ++x)
                        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r)
                            img.at(y, x) = 1;
            }
            auto subsets = skeleton_subsets(img);
            BinaryImage rebuilt(h, w);
            for (size_t k = 0; k < subsets.size(); ++k) {
                BinaryImage grown = subsets[k];
                for (size_t d = 0; d < k; ++d) grown = dilate3(grown);
                for (size_t i = 0; i < rebuilt.data.size(); ++i)
                    rebuilt.data[i] = rebuilt.data[i] || grown.data[i];
            }
            pass = rebuilt == img;
        }
        report(6, "skeleton reconstruction", pass, "200 random blobs up to 64x64, exact");
    }

    // 7. feasibility audit over every clustering this suite produced
    {
        const bool pass = g_audit_violations.empty() && g_audited >= 60;
        std::string detail = std::to_string(g_audited) + " partitions audited";
        if (!g_audit_violations.empty())
            detail += "; first violation: " + g_audit_violations.front();
        report(7, "feasibility audit", pass, detail);
    }

    // 8. trainable-parameter budgets
    {
        NplArchitecture u;
        u.variant = NplVariant::U;
        NplArchitecture ru;
        ru.variant = NplVariant::RU;
        NplArchitecture aru;
        const double cu = static_cast<double>(count_parameters(u));
        const double cru = static_cast<double>(count_parameters(ru));
        const double caru = static_cast<double>(count_parameters(aru));
        const double du = std::abs(cu - 2.16e6) / 2.16e6;
        const double dru = std::abs(cru - 4.13e6) / 4.13e6;
        const double daru = std::abs(caru - 4.14e6) / 4.14e6;
        const bool pass = du < 0.10 && dru < 0.10 && daru < 0.10;
        report(8, "parameter counts", pass,
               "U=" + fmt(cu / 1e6) + "M (" + fmt(du * 100) + "%), RU=" + fmt(cru / 1e6) +
                   "M (" + fmt(dru * 100) + "%), ARU=" + fmt(caru / 1e6) + "M (" +
                   fmt(daru * 100) + "%)");
    }

    // 9. forward-pass normalization on random weights
    {
        NplArchitecture arch;
        bool pass = true;
        double worst_class = 0.0, worst_att = 0.0;
        const std::vector<std::pair<int, int>> sizes{{128, 128}, {256, 256}, {300, 200}};
        int done = 0;
        for (int i = 0; i < 50 && pass; ++i) {
            const auto [h, w] = sizes[i % sizes.size()];
            WeightStore ws = make_random_weights(arch, 9000 + i);
            Rng rng(100 + i);
            Tensor3 img(h, w, 1);
            for (auto& v : img.v) v = static_cast<float>(rng.uniform(-2.0, 2.0));
            AruResult res = aru_forward_detailed(img, ws, arch);
            pass = res.maps.baseline.height == h && res.maps.baseline.width == w &&
                   res.maps.other.has_value();
            for (int y = 0; y < h && pass; ++y)
                for (int x = 0; x < w; ++x) {
                    const double cs = res.maps.baseline.at(y, x) +
                                      res.maps.separator.at(y, x) + res.maps.other->at(y, x);
                    worst_class = std::max(worst_class, std::abs(cs - 1.0));
                    double att = 0.0;
                    for (const auto& a : res.attention) att += a.at(y, x);
                    worst_att = std::max(worst_att, std::abs(att - 1.0));
                }
            pass = pass && worst_class <= 1e-5 && worst_att <= 1e-6;
            ++done;
        }
        report(9, "forward normalization", pass,
               std::to_string(done) + " inferences, max class err=" + fmt(worst_class * 1e6) +
                   "e-6, max attention err=" + fmt(worst_att * 1e7) + "e-7");
    }

    // 10. smoothing-cost anchor
    {
        const auto labels = InterlineLabelSet::make(cfg);
        const double v = smoothing_cost(labels.index_of(16.0, 0.05),
                                        labels.index_of(42.7, 0.05), cfg.sigma);
        const bool pass = v == 25.0;
        report(10, "smoothing-cost anchor", pass, "V(16.0, 42.7) = " + fmt(v));
    }

    // 11. CLI determinism
    {
        const fs::path dir = fs::temp_directory_path() / "bld_acceptance";
        fs::create_directories(dir);
        auto page = synth_corpus(1, 11011, SynthStyle::Straight)[0];
        ConfidenceMaps maps = render_oracle_maps(page, 1.5, 0.1, page.seed);
        const std::string maps_path = (dir / "page.aruc").string();
        write_maps_file(maps_path, maps);
        const std::string out1 = (dir / "det1.json").string();
        const std::string out2 = (dir / "det2.json").string();
        const std::string cmd1 = cli + " detect --maps " + maps_path + " --out " + out1;
        const std::string cmd2 = cli + " detect --maps " + maps_path + " --out " + out2;
        bool pass = std::system(cmd1.c_str()) == 0 && std::system(cmd2.c_str()) == 0;
        std::string detail = "two runs";
        if (pass) {
            std::ifstream f1(out1, std::ios::binary), f2(out2, std::ios::binary);
            std::stringstream s1, s2;
            s1 << f1.rdbuf();
            s2 << f2.rdbuf();
            pass = !s1.str().empty() && s1.str() == s2.str();
            detail = "outputs " + std::to_string(s1.str().size()) +
                     " bytes, byte-identical=" + (pass ? "yes" : "no");
        }
        fs::remove_all(dir);
        report(11, "detect determinism", pass, detail);
    }

    std::printf("%s: %d of 11 criteria passed\n", g_failures == 0 ? "SUCCESS" : "FAILURE",
                11 - g_failures);
    return g_failures;
}
