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

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bld/core.hpp"
#include "bld/groundtruth.hpp"

namespace bld {

// Confidence-map container: magic "ARUC", little-endian u32 height, width,
// channels, then channel-planar row-major little-endian f32 values.

namespace detail {

inline void put_u32_f(std::ofstream& f, uint32_t v) {
    const uint8_t b[4] = {static_cast<uint8_t>(v & 0xff), static_cast<uint8_t>((v >> 8) & 0xff),
                          static_cast<uint8_t>((v >> 16) & 0xff),
                          static_cast<uint8_t>((v >> 24) & 0xff)};
    f.write(reinterpret_cast<const char*>(b), 4);
}

inline uint32_t get_u32_f(std::ifstream& f, const std::string& path) {
    uint8_t b[4];
    if (!f.read(reinterpret_cast<char*>(b), 4))
        throw FormatError("truncated map file: " + path);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

inline void write_plane(std::ofstream& f, const GrayImage& g) {
    for (double v : g.data) put_u32_f(f, std::bit_cast<uint32_t>(static_cast<float>(v)));
}

inline GrayImage read_plane(std::ifstream& f, int h, int w, const std::string& path) {
    GrayImage g(h, w);
    for (auto& v : g.data) v = std::bit_cast<float>(get_u32_f(f, path));
    return g;
}

} // namespace detail

inline void write_maps_file(const std::string& path, const ConfidenceMaps& maps) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open for writing: " + tmp);
        f.write("ARUC", 4);
        detail::put_u32_f(f, static_cast<uint32_t>(maps.height()));
        detail::put_u32_f(f, static_cast<uint32_t>(maps.width()));
        detail::put_u32_f(f, maps.other ? 3u : 2u);
        detail::write_plane(f, maps.baseline);
        detail::write_plane(f, maps.separator);
        if (maps.other) detail::write_plane(f, *maps.other);
        if (!f) throw std::runtime_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

inline ConfidenceMaps read_maps_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    char magic[4];
    if (!f.read(magic, 4) || std::string(magic, 4) != "ARUC")
        throw FormatError("bad magic: not a confidence-map file: " + path);
    const int h = static_cast<int>(detail::get_u32_f(f, path));
    const int w = static_cast<int>(detail::get_u32_f(f, path));
    const uint32_t channels = detail::get_u32_f(f, path);
    if (h < 1 || w < 1 || channels < 2 || channels > 3)
        throw FormatError("unsupported map header in " + path);
    ConfidenceMaps maps;
    maps.baseline = detail::read_plane(f, h, w, path);
    maps.separator = detail::read_plane(f, h, w, path);
    if (channels == 3) maps.other = detail::read_plane(f, h, w, path);
    return maps;
}

inline ConfidenceMaps maps_from_pixel_gt(const PixelGT& gt) {
    ConfidenceMaps maps;
    maps.baseline = gt.plane(PixelGT::kBaseline);
    maps.separator = gt.plane(PixelGT::kSeparator);
    maps.other = gt.plane(PixelGT::kOther);
    return maps;
}

// ---------------------------------------------------------------------------
// JSON interchange

inline nlohmann::json config_to_json(const PipelineConfig& cfg) {
    return {{"bin_threshold", cfg.bin_threshold},
            {"min_sp_distance", cfg.min_sp_distance},
            {"diameters", cfg.diameters},
            {"harmonics", cfg.harmonics},
            {"sigma", cfg.sigma},
            {"alpha", cfg.alpha},
            {"beta", cfg.beta},
            {"gamma", cfg.gamma},
            {"delta", cfg.delta},
            {"eta", cfg.eta},
            {"reg_degree", cfg.reg_degree},
            {"min_sps_per_baseline", cfg.min_sps_per_baseline},
            {"data_cost_cap", cfg.data_cost_cap},
            {"connectivity_literal", cfg.connectivity_literal}};
}

inline PipelineConfig config_from_json(const nlohmann::json& j) {
    PipelineConfig cfg;
    cfg.bin_threshold = j.value("bin_threshold", cfg.bin_threshold);
    cfg.min_sp_distance = j.value("min_sp_distance", cfg.min_sp_distance);
    if (j.contains("diameters")) {
        auto d = j.at("diameters").get<std::vector<int>>();
        if (d.size() != cfg.diameters.size())
            throw std::invalid_argument("config: diameters must have 4 entries");
        std::copy(d.begin(), d.end(), cfg.diameters.begin());
    }
    if (j.contains("harmonics")) {
        auto k = j.at("harmonics").get<std::vector<int>>();
        if (k.size() != cfg.harmonics.size())
            throw std::invalid_argument("config: harmonics must have 3 entries");
        std::copy(k.begin(), k.end(), cfg.harmonics.begin());
    }
    cfg.sigma = j.value("sigma", cfg.sigma);
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.beta = j.value("beta", cfg.beta);
    cfg.gamma = j.value("gamma", cfg.gamma);
    cfg.delta = j.value("delta", cfg.delta);
    cfg.eta = j.value("eta", cfg.eta);
    cfg.reg_degree = j.value("reg_degree", cfg.reg_degree);
    cfg.min_sps_per_baseline = j.value("min_sps_per_baseline", cfg.min_sps_per_baseline);
    cfg.data_cost_cap = j.value("data_cost_cap", cfg.data_cost_cap);
    cfg.connectivity_literal = j.value("connectivity_literal", cfg.connectivity_literal);
    cfg.validate();
    return cfg;
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

/// Configuration file: either simple key=value lines ('#' starts a comment)
/// or a JSON document — a bare config object, or any output file carrying a
/// "config" snapshot, so a run can be reproduced from its own output.
inline PipelineConfig apply_config_file(PipelineConfig cfg, const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    {
        char first = 0;
        f >> std::ws;
        f.get(first);
        if (first == '{') {
            nlohmann::json doc = read_json_file(path);
            if (doc.contains("config")) doc = doc.at("config");
            nlohmann::json merged = config_to_json(cfg);
            merged.update(doc);
            return config_from_json(merged);
        }
        f.clear();
        f.seekg(0);
    }
    nlohmann::json j = config_to_json(cfg);
    std::string line;
    while (std::getline(f, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) continue;
        if (!j.contains(key)) throw std::runtime_error("unknown config key: " + key);
        if (key == "diameters" || key == "harmonics") {
            std::vector<int> vals;
            std::stringstream ss(value);
            std::string tok;
            while (std::getline(ss, tok, ',')) vals.push_back(std::stoi(tok));
            j[key] = vals;
        } else if (key == "connectivity_literal") {
            j[key] = (value == "1" || value == "true");
        } else if (key == "reg_degree" || key == "min_sps_per_baseline") {
            j[key] = std::stoi(value);
        } else {
            j[key] = std::stod(value);
        }
    }
    return config_from_json(j);
}

inline nlohmann::json chains_to_json(const std::vector<PolyChain>& chains) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : chains) {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : c.points) pts.push_back({p.x, p.y});
        arr.push_back(std::move(pts));
    }
    return arr;
}

inline std::vector<PolyChain> chains_from_json(const nlohmann::json& arr) {
    std::vector<PolyChain> chains;
    for (const auto& pts : arr) {
        std::vector<Point> points;
        for (const auto& p : pts)
            points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        chains.push_back(PolyChain(std::move(points)));
    }
    return chains;
}

struct BaselineDocument {
    int width = 0;
    int height = 0;
    std::vector<PolyChain> baselines;
    std::optional<std::vector<Region>> regions;
};

inline nlohmann::json baselines_to_json(const BaselineDocument& doc,
                                        const PipelineConfig* cfg = nullptr) {
    nlohmann::json j{{"width", doc.width},
                     {"height", doc.height},
                     {"baselines", chains_to_json(doc.baselines)}};
    if (doc.regions) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : *doc.regions) {
            nlohmann::json pts = nlohmann::json::array();
            for (const auto& p : r.boundary.points) pts.push_back({p.x, p.y});
            arr.push_back(std::move(pts));
        }
        j["regions"] = std::move(arr);
    }
    if (cfg) j["config"] = config_to_json(*cfg);
    return j;
}

inline BaselineDocument baselines_from_json(const nlohmann::json& j) {
    BaselineDocument doc;
    doc.width = j.at("width").get<int>();
    doc.height = j.at("height").get<int>();
    doc.baselines = chains_from_json(j.at("baselines"));
    if (j.contains("regions")) {
        std::vector<Region> regions;
        for (const auto& pts : j.at("regions")) {
            std::vector<Point> points;
            for (const auto& p : pts)
                points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
            regions.push_back(Region(PolyChain(std::move(points))));
        }
        doc.regions = std::move(regions);
    }
    return doc;
}

inline nlohmann::json report_to_json(double precision, double recall, double f_value,
                                     const nlohmann::json& per_page = nlohmann::json::array()) {
    return {{"precision", precision}, {"recall", recall}, {"f_value", f_value},
            {"pages", per_page}};
}

/// Atomic write: stage to a temp file in the same directory, then rename.
inline void write_text_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open for writing: " + tmp);
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!f) throw std::runtime_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

} // namespace bld
