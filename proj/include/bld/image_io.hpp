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

#include <png.h>

#include <cstdint>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "bld/core.hpp"

namespace bld {

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline GrayImage from_bytes(const std::vector<uint8_t>& bytes, int h, int w, double maxval) {
    GrayImage img(h, w);
    for (size_t i = 0; i < bytes.size(); ++i) img.data[i] = bytes[i] / maxval;
    return img;
}

inline GrayImage read_pgm(std::FILE* f, const std::string& path) {
    auto next_token = [&]() {
        std::string tok;
        int c;
        while ((c = std::fgetc(f)) != EOF) {
            if (c == '#') { // comment to end of line
                while ((c = std::fgetc(f)) != EOF && c != '\n') {}
                continue;
            }
            if (std::isspace(c)) {
                if (!tok.empty()) break;
                continue;
            }
            tok.push_back(static_cast<char>(c));
        }
        if (tok.empty()) throw std::runtime_error("truncated PGM header: " + path);
        return tok;
    };
    const std::string magic = next_token();
    if (magic != "P5" && magic != "P2")
        throw std::runtime_error("unsupported PGM magic in " + path);
    const int w = std::stoi(next_token());
    const int h = std::stoi(next_token());
    const int maxval = std::stoi(next_token());
    if (w < 1 || h < 1 || maxval < 1 || maxval > 255)
        throw std::runtime_error("unsupported PGM header in " + path);

    GrayImage img(h, w);
    if (magic == "P5") {
        std::vector<uint8_t> bytes(static_cast<size_t>(h) * w);
        if (std::fread(bytes.data(), 1, bytes.size(), f) != bytes.size())
            throw std::runtime_error("truncated PGM payload: " + path);
        return from_bytes(bytes, h, w, maxval);
    }
    for (auto& v : img.data) {
        int value = 0;
        if (std::fscanf(f, "%d", &value) != 1)
            throw std::runtime_error("truncated PGM payload: " + path);
        v = static_cast<double>(value) / maxval;
    }
    return img;
}

inline GrayImage read_png(std::FILE* f, const std::string& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("png init failed");
    }
    std::vector<uint8_t> pixels;
    std::vector<png_bytep> rows;
    int w = 0, h = 0;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("failed to decode PNG: " + path);
    }
    png_init_io(png, f);
    png_read_info(png, info);
    w = static_cast<int>(png_get_image_width(png, info));
    h = static_cast<int>(png_get_image_height(png, info));
    const png_byte color = png_get_color_type(png, info);
    const png_byte depth = png_get_bit_depth(png, info);

    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
        color == PNG_COLOR_TYPE_PALETTE)
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    png_read_update_info(png, info);

    pixels.resize(static_cast<size_t>(h) * w);
    rows.resize(h);
    for (int y = 0; y < h; ++y) rows[y] = pixels.data() + static_cast<size_t>(y) * w;
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);
    return from_bytes(pixels, h, w, 255.0);
}

} // namespace detail

/// Read an 8-bit grayscale raster (PNG or PGM, sniffed by magic bytes);
/// intensities map to [0,1] by /255.
inline GrayImage read_gray_image(const std::string& path) {
    detail::FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw std::runtime_error("cannot open: " + path);
    uint8_t magic[2] = {0, 0};
    if (std::fread(magic, 1, 2, f.get()) != 2)
        throw std::runtime_error("cannot read header: " + path);
    std::rewind(f.get());
    if (magic[0] == 'P' && (magic[1] == '5' || magic[1] == '2'))
        return detail::read_pgm(f.get(), path);
    if (magic[0] == 0x89 && magic[1] == 'P') return detail::read_png(f.get(), path);
    throw std::runtime_error("unsupported image format: " + path);
}

inline void write_pgm(const std::string& path, const GrayImage& img) {
    detail::FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    std::fprintf(f.get(), "P5\n%d %d\n255\n", img.width, img.height);
    std::vector<uint8_t> bytes(img.data.size());
    for (size_t i = 0; i < img.data.size(); ++i)
        bytes[i] = static_cast<uint8_t>(
            std::lround(std::clamp(img.data[i], 0.0, 1.0) * 255.0));
    if (std::fwrite(bytes.data(), 1, bytes.size(), f.get()) != bytes.size())
        throw std::runtime_error("write failed: " + path);
}

inline void write_png(const std::string& path, const GrayImage& img) {
    detail::FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("png init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("failed to encode PNG: " + path);
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<uint8_t> row(img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            row[x] = static_cast<uint8_t>(
                std::lround(std::clamp(img.at(y, x), 0.0, 1.0) * 255.0));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace bld
