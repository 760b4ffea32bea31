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
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bld/core.hpp"
#include "bld/npl.hpp"

namespace bld {

// Weights container format: magic "ARUW", little-endian u32 tensor count,
// then per tensor: u32 name length, UTF-8 name, u32 rank, rank x u32 dims,
// row-major little-endian f32 payload. Tensors are sorted by name.

namespace detail {

inline void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 24) & 0xff));
}

inline void put_f32(std::vector<uint8_t>& out, float f) {
    put_u32(out, std::bit_cast<uint32_t>(f));
}

class ByteReader {
public:
    ByteReader(const uint8_t* data, size_t size) : data_(data), size_(size) {}

    uint32_t u32() {
        need(4);
        uint32_t v = static_cast<uint32_t>(data_[pos_]) |
                     (static_cast<uint32_t>(data_[pos_ + 1]) << 8) |
                     (static_cast<uint32_t>(data_[pos_ + 2]) << 16) |
                     (static_cast<uint32_t>(data_[pos_ + 3]) << 24);
        pos_ += 4;
        return v;
    }

    float f32() { return std::bit_cast<float>(u32()); }

    std::string str(size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
        pos_ += n;
        return s;
    }

    bool done() const { return pos_ == size_; }

private:
    void need(size_t n) const {
        if (pos_ + n > size_)
            throw FormatError("truncated weights payload");
    }

    const uint8_t* data_;
    size_t size_;
    size_t pos_ = 0;
};

} // namespace detail

inline std::vector<uint8_t> save_weights(const WeightStore& ws) {
    std::vector<uint8_t> out{'A', 'R', 'U', 'W'};
    detail::put_u32(out, static_cast<uint32_t>(ws.params.size()));
    for (const auto& [name, p] : ws.params) { // std::map iterates sorted by name
        detail::put_u32(out, static_cast<uint32_t>(name.size()));
        out.insert(out.end(), name.begin(), name.end());
        detail::put_u32(out, static_cast<uint32_t>(p.dims.size()));
        for (uint32_t d : p.dims) detail::put_u32(out, d);
        for (float f : p.v) detail::put_f32(out, f);
    }
    return out;
}

inline WeightStore load_weights(const uint8_t* data, size_t size) {
    detail::ByteReader r(data, size);
    if (r.str(4) != "ARUW")
        throw FormatError("bad magic: not a weights file");
    const uint32_t count = r.u32();
    WeightStore ws;
    for (uint32_t i = 0; i < count; ++i) {
        const uint32_t name_len = r.u32();
        std::string name = r.str(name_len);
        Param p;
        const uint32_t rank = r.u32();
        size_t total = 1;
        for (uint32_t d = 0; d < rank; ++d) {
            p.dims.push_back(r.u32());
            total *= p.dims.back();
        }
        p.v.resize(total);
        for (size_t j = 0; j < total; ++j) p.v[j] = r.f32();
        if (!ws.params.emplace(std::move(name), std::move(p)).second)
            throw FormatError("duplicate tensor name in weights file");
    }
    if (!r.done())
        throw FormatError("trailing bytes after weights payload");
    return ws;
}

inline WeightStore load_weights(const std::vector<uint8_t>& bytes) {
    return load_weights(bytes.data(), bytes.size());
}

inline void save_weights_file(const std::string& path, const WeightStore& ws) {
    auto bytes = save_weights(ws);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

inline WeightStore load_weights_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());
    return load_weights(bytes);
}

} // namespace bld
