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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bld {

/// Dense feature map, row-major (y, x, channel) with channel fastest.
struct Tensor3 {
    int h = 0;
    int w = 0;
    int c = 0;
    std::vector<float> v;

    Tensor3() = default;
    Tensor3(int h_, int w_, int c_, float fill = 0.0f)
        : h(h_), w(w_), c(c_), v(static_cast<size_t>(h_) * w_ * c_, fill) {
        if (h_ < 1 || w_ < 1 || c_ < 1) throw std::invalid_argument("Tensor3: dims must be >= 1");
    }

    float& at(int y, int x, int ch) { return v[(static_cast<size_t>(y) * w + x) * c + ch]; }
    float at(int y, int x, int ch) const { return v[(static_cast<size_t>(y) * w + x) * c + ch]; }

    float* row(int y, int x) { return v.data() + (static_cast<size_t>(y) * w + x) * c; }
    const float* row(int y, int x) const { return v.data() + (static_cast<size_t>(y) * w + x) * c; }
};

/// Convolution kernel, (ky, kx, in-channel, out-channel) with out fastest.
struct Tensor4 {
    int kh = 0;
    int kw = 0;
    int ci = 0;
    int co = 0;
    std::vector<float> v;

    Tensor4() = default;
    Tensor4(int kh_, int kw_, int ci_, int co_, float fill = 0.0f)
        : kh(kh_), kw(kw_), ci(ci_), co(co_),
          v(static_cast<size_t>(kh_) * kw_ * ci_ * co_, fill) {
        if (kh_ < 1 || kw_ < 1 || ci_ < 1 || co_ < 1)
            throw std::invalid_argument("Tensor4: dims must be >= 1");
    }

    float& at(int ky, int kx, int i, int o) {
        return v[((static_cast<size_t>(ky) * kw + kx) * ci + i) * co + o];
    }
    float at(int ky, int kx, int i, int o) const {
        return v[((static_cast<size_t>(ky) * kw + kx) * ci + i) * co + o];
    }
};

inline std::string shape_str(const Tensor3& t) {
    return std::to_string(t.h) + "x" + std::to_string(t.w) + "x" + std::to_string(t.c);
}

} // namespace bld
