// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License. You may
// obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bld/bld.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitFormat = 3;

struct ConfigFlags {
    bld::PipelineConfig cfg;
    std::string config_file;

    void attach(CLI::App* app) {
        app->add_option("--bin-threshold", cfg.bin_threshold, "binarization threshold b");
        app->add_option("--min-sp-distance", cfg.min_sp_distance, "superpixel distance d");
        app->add_option("--sigma", cfg.sigma, "smoothing-cost cap");
        app->add_option("--alpha", cfg.alpha, "data-cost weight");
        app->add_option("--beta", cfg.beta, "smoothing-cost weight");
        app->add_option("--gamma", cfg.gamma, "curvilinearity bound");
        app->add_option("--delta", cfg.delta, "cluster separation factor");
        app->add_option("--eta", cfg.eta, "separator threshold");
        app->add_option("--reg-degree", cfg.reg_degree, "regression degree");
        app->add_option("--min-sps", cfg.min_sps_per_baseline, "min SPs per baseline");
        app->add_option("--data-cost-cap", cfg.data_cost_cap, "data cost cap");
        app->add_flag("--connectivity-literal", cfg.connectivity_literal,
                      "divide path integrals by edge length");
        app->add_option("--config", config_file, "key=value file overriding flags");
    }

    bld::PipelineConfig resolve() const {
        bld::PipelineConfig out = cfg;
        if (!config_file.empty()) out = bld::apply_config_file(out, config_file);
        out.validate();
        return out;
    }
};

// Run fn(i) over [0, n) on a small worker pool; exceptions are collected.
void run_parallel(size_t n, int threads, const std::function<void(size_t)>& fn) {
    threads = std::max(1, threads);
    if (threads == 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&]() {
            for (size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::string output_path(const std::string& out, const std::string& input, size_t n_inputs,
                        const std::string& suffix) {
    if (n_inputs == 1 && !fs::is_directory(out)) return out;
    return (fs::path(out) / (fs::path(input).stem().string() + suffix)).string();
}

void draw_overlay(bld::GrayImage background, const std::vector<bld::PolyChain>& chains,
                  const std::string& path) {
    for (auto& v : background.data) v = 0.25 + 0.5 * v;
    std::vector<uint8_t> mask(background.data.size(), 0);
    for (const auto& c : chains)
        bld::detail::draw_chain(mask, background.height, background.width, c);
    mask = bld::detail::dilate3(mask, background.height, background.width);
    for (size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) background.data[i] = 1.0;
    if (fs::path(path).extension() == ".png")
        bld::write_png(path, background);
    else
        bld::write_pgm(path, background);
}

bld::SynthStyle parse_style(const std::string& s) {
    if (s == "straight") return bld::SynthStyle::Straight;
    if (s == "curved") return bld::SynthStyle::Curved;
    if (s == "rotated") return bld::SynthStyle::Rotated;
    if (s == "mixed") return bld::SynthStyle::Mixed;
    throw CLI::ValidationError("--style", "unknown style: " + s);
}

int cmd_detect(const std::vector<std::string>& maps_files, const std::string& image_file,
               const std::string& weights_file, const std::string& variant_name,
               const std::string& regions_file, const ConfigFlags& flags,
               const std::string& out, const std::string& overlay, bool no_separator,
               int threads) {
    const bld::PipelineConfig cfg = flags.resolve();

    std::optional<std::vector<bld::Region>> regions;
    if (!regions_file.empty()) {
        auto doc = bld::baselines_from_json(bld::read_json_file(regions_file));
        if (doc.regions) regions = doc.regions;
    }

    struct Job {
        std::string input;
        bld::ConfidenceMaps maps;
        double scale = 1.0;
        int width = 0, height = 0;
        std::optional<bld::GrayImage> background;
    };
    std::vector<Job> jobs;

    if (!maps_files.empty()) {
        for (const auto& f : maps_files) {
            Job j;
            j.input = f;
            j.maps = bld::read_maps_file(f);
            j.width = j.maps.width();
            j.height = j.maps.height();
            jobs.push_back(std::move(j));
        }
    } else {
        bld::NplArchitecture arch;
        arch.variant = bld::parse_variant(variant_name);
        bld::WeightStore ws = bld::load_weights_file(weights_file);
        bld::validate_weights(ws, arch);
        Job j;
        j.input = image_file;
        bld::GrayImage img = bld::read_gray_image(image_file);
        auto pre = bld::preprocess(img);
        j.maps = bld::npl_forward(pre.t, ws, arch);
        j.scale = pre.factor;
        j.width = img.width;
        j.height = img.height;
        j.background = std::move(img);
        jobs.push_back(std::move(j));
    }

    std::mutex log_mutex;
    run_parallel(jobs.size(), threads, [&](size_t i) {
        Job& j = jobs[i];
        const auto t0 = std::chrono::steady_clock::now();
        std::optional<std::vector<bld::Region>> scaled_regions = regions;
        if (scaled_regions && j.scale != 1.0)
            for (auto& r : *scaled_regions)
                for (auto& p : r.boundary.points) p = (1.0 / j.scale) * p;

        auto det = bld::detect_from_maps(j.maps, cfg, scaled_regions, !no_separator);
        std::vector<bld::PolyChain> chains = det.baselines;
        if (j.scale != 1.0)
            for (auto& c : chains)
                for (auto& p : c.points) p = j.scale * p;

        bld::BaselineDocument doc;
        doc.width = j.width;
        doc.height = j.height;
        doc.baselines = chains;
        doc.regions = regions;
        const std::string path = output_path(out, j.input, jobs.size(), ".baselines.json");
        bld::write_text_file_atomic(path, bld::baselines_to_json(doc, &cfg).dump(2) + "\n");
        if (!overlay.empty()) {
            bld::GrayImage bg = j.background ? *j.background : j.maps.baseline;
            draw_overlay(std::move(bg), chains,
                         output_path(overlay, j.input, jobs.size(), ".overlay.png"));
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::lock_guard<std::mutex> lock(log_mutex);
        std::cerr << j.input << ": " << chains.size() << " baselines in " << secs << "s -> "
                  << path << "\n";
    });
    return kExitOk;
}

int cmd_infer(const std::vector<std::string>& images, const std::string& weights_file,
              const std::string& variant_name, const std::string& out, int threads) {
    bld::NplArchitecture arch;
    arch.variant = bld::parse_variant(variant_name);
    bld::WeightStore ws = bld::load_weights_file(weights_file);
    bld::validate_weights(ws, arch);
    run_parallel(images.size(), threads, [&](size_t i) {
        bld::GrayImage img = bld::read_gray_image(images[i]);
        auto pre = bld::preprocess(img);
        bld::ConfidenceMaps maps = bld::npl_forward(pre.t, ws, arch);
        bld::write_maps_file(output_path(out, images[i], images.size(), ".aruc"), maps);
    });
    return kExitOk;
}

int cmd_gtgen(const std::string& baselines_file, const std::string& out) {
    auto doc = bld::baselines_from_json(bld::read_json_file(baselines_file));
    bld::PixelGT gt = bld::generate_pixel_gt(doc.height, doc.width, doc.baselines);
    bld::write_maps_file(out, bld::maps_from_pixel_gt(gt));
    return kExitOk;
}

int cmd_synth(int pages, uint64_t seed, const std::string& style_name, double blur,
              double noise, const std::string& deform_name, double magnitude,
              const ConfigFlags& flags, const std::string& out) {
    const bld::PipelineConfig cfg = flags.resolve();
    fs::create_directories(out);
    auto corpus = bld::synth_corpus(pages, seed, parse_style(style_name));
    for (size_t i = 0; i < corpus.size(); ++i) {
        bld::SynthPage page = corpus[i];
        if (deform_name != "none") {
            bld::DeformKind kind = deform_name == "affine"  ? bld::DeformKind::Affine
                                   : deform_name == "elastic" ? bld::DeformKind::Elastic
                                                              : bld::DeformKind::Rotation;
            page = bld::deform(page, kind, magnitude, page.seed + 1);
        }
        char name[32];
        std::snprintf(name, sizeof(name), "page_%04zu", i);
        const std::string base = (fs::path(out) / name).string();

        bld::BaselineDocument doc{page.width, page.height, page.baselines, page.regions};
        bld::write_text_file_atomic(base + ".json",
                                    bld::baselines_to_json(doc, &cfg).dump(2) + "\n");

        bld::ConfidenceMaps maps = bld::render_oracle_maps(page, blur, noise, page.seed);
        bld::write_maps_file(base + ".aruc", maps);

        bld::PixelGT gt = bld::generate_pixel_gt(page.height, page.width, page.baselines);
        bld::GrayImage pageimg = gt.plane(bld::PixelGT::kBaseline);
        for (auto& v : pageimg.data) v = 1.0 - v; // ink on white
        bld::write_pgm(base + ".pgm", pageimg);
    }
    return kExitOk;
}

int cmd_eval(const std::string& gt_file, const std::string& hyp_file, double tol,
             const std::string& out) {
    auto gt = bld::baselines_from_json(bld::read_json_file(gt_file));
    auto hyp = bld::baselines_from_json(bld::read_json_file(hyp_file));
    if (tol <= 0.0) tol = bld::default_tolerance(gt.baselines);
    bld::EvalReport rep = bld::match_baselines(gt.baselines, hyp.baselines, tol);
    json page{{"gt", gt_file},       {"hyp", hyp_file},     {"tolerance", tol},
              {"precision", rep.precision}, {"recall", rep.recall}, {"f_value", rep.f_value}};
    json report = bld::report_to_json(rep.precision, rep.recall, rep.f_value,
                                      json::array({page}));
    if (out.empty())
        std::cout << report.dump(2) << "\n";
    else
        bld::write_text_file_atomic(out, report.dump(2) + "\n");
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-stage baseline detection: pixel labeling plus superpixel clustering"};
    app.require_subcommand(1);

    // detect
    auto* detect = app.add_subcommand("detect", "detect baselines from maps or an image");
    std::vector<std::string> maps_files;
    std::string image_file, weights_file, variant = "ARU", regions_file, out = "baselines.json";
    std::string overlay;
    bool no_separator = false;
    int threads = 1;
    ConfigFlags detect_cfg;
    detect->add_option("--maps", maps_files, "confidence-map file(s)");
    detect->add_option("--image", image_file, "input page image (PNG/PGM)");
    detect->add_option("--weights", weights_file, "network weights");
    detect->add_option("--variant", variant, "network variant: U, RU, ARU");
    detect->add_option("--regions", regions_file, "JSON file with text regions");
    detect->add_option("--out", out, "output baseline JSON (file or directory)");
    detect->add_option("--overlay", overlay, "write an overlay image here");
    detect->add_flag("--no-separator", no_separator, "ignore the separator plane");
    detect->add_option("--threads", threads, "worker threads for multiple inputs");
    detect_cfg.attach(detect);

    // infer
    auto* infer = app.add_subcommand("infer", "run the pixel labeler, write confidence maps");
    std::vector<std::string> infer_images;
    std::string infer_weights, infer_variant = "ARU", infer_out = "maps.aruc";
    int infer_threads = 1;
    infer->add_option("--image", infer_images, "input image(s)")->required();
    infer->add_option("--weights", infer_weights, "network weights")->required();
    infer->add_option("--variant", infer_variant, "network variant: U, RU, ARU");
    infer->add_option("--out", infer_out, "output map file (or directory)");
    infer->add_option("--threads", infer_threads, "worker threads");

    // gtgen
    auto* gtgen = app.add_subcommand("gtgen", "pixel ground truth from baseline JSON");
    std::string gtgen_in, gtgen_out = "gt.aruc";
    gtgen->add_option("--baselines", gtgen_in, "baseline JSON")->required();
    gtgen->add_option("--out", gtgen_out, "output map file");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic page corpus");
    int pages = 1;
    uint64_t seed = 1;
    std::string style = "straight", synth_out = "synth", deform_kind = "none";
    double blur = 1.5, noise = 0.0, magnitude = 0.0;
    ConfigFlags synth_cfg;
    synth->add_option("--pages", pages, "number of pages");
    synth->add_option("--seed", seed, "corpus seed");
    synth->add_option("--style", style, "straight, curved, rotated or mixed");
    synth->add_option("--blur", blur, "oracle map blur sigma");
    synth->add_option("--noise", noise, "oracle map noise amplitude");
    synth->add_option("--deform", deform_kind, "none, affine, elastic or rotation");
    synth->add_option("--magnitude", magnitude, "deformation magnitude");
    synth->add_option("--out", synth_out, "output directory");
    synth_cfg.attach(synth);

    // eval
    auto* eval = app.add_subcommand("eval", "score hypothesis baselines against ground truth");
    std::string eval_gt, eval_hyp, eval_out;
    double tol = 0.0;
    eval->add_option("--gt", eval_gt, "ground truth baseline JSON")->required();
    eval->add_option("--hyp", eval_hyp, "hypothesis baseline JSON")->required();
    eval->add_option("--tol", tol, "matching tolerance in px (default: derived)");
    eval->add_option("--out", eval_out, "report JSON (stdout when omitted)");

    try {
        app.parse(argc, argv);
        if (detect->parsed()) {
            const bool have_image = !image_file.empty();
            const bool have_maps = !maps_files.empty();
            if (have_image == have_maps || (have_image && weights_file.empty())) {
                std::cerr << "detect: supply exactly one of --maps or --image with --weights\n";
                return kExitInput;
            }
            return cmd_detect(maps_files, image_file, weights_file, variant, regions_file,
                              detect_cfg, out, overlay, no_separator, threads);
        }
        if (infer->parsed())
            return cmd_infer(infer_images, infer_weights, infer_variant, infer_out,
                             infer_threads);
        if (gtgen->parsed()) return cmd_gtgen(gtgen_in, gtgen_out);
        if (synth->parsed())
            return cmd_synth(pages, seed, style, blur, noise, deform_kind, magnitude,
                             synth_cfg, synth_out);
        if (eval->parsed()) return cmd_eval(eval_gt, eval_hyp, tol, eval_out);
        return kExitInput;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    } catch (const bld::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFormat;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
}
