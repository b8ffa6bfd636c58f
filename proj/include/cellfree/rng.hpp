// SPDX-License-Identifier: Apache-2.0
//
// cellfree-sim: link-level simulator for the cell-free massive MIMO downlink
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>

namespace cellfree {

/// Philox4x32-10 counter-based block cipher (Salmon et al., "Parallel random
/// numbers: as easy as 1, 2, 3"). Stateless: the same (counter, key) pair
/// always yields the same 128-bit block, which is what makes drop-level
/// parallelism deterministic regardless of worker count.
struct Philox4x32 {
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
            const std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
            ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0],
                   std::uint32_t(p1),
                   std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1],
                   std::uint32_t(p0)};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }
};

/// What a substream is used for. Folded into the counter so that streams for
/// different purposes never collide even when (drop, sample) coincide.
enum class StreamRole : std::uint32_t {
    generic = 0,
    geometry = 1,
    shadowing = 2,
    small_scale = 3,
    ul_noise = 4,
    dl_noise = 5,
};

/// One deterministic random substream, keyed by (seed, drop, sample, role).
/// Draws are sequential within the stream; distinct keys give statistically
/// independent streams. Sample indices are limited to 2^28 per drop.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint32_t drop, std::uint32_t sample, StreamRole role)
        : key_{std::uint32_t(seed & 0xFFFFFFFFu), std::uint32_t(seed >> 32)} {
        if (sample >= (1u << 28))
            throw std::invalid_argument("RngStream: sample index exceeds 2^28");
        hi2_ = sample | (std::uint32_t(role) << 28);
        hi3_ = drop;
    }

    std::uint32_t next_u32() {
        if (pos_ == 4)
            refill();
        return buf_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    /// Uniform double in [0, 1), 53-bit resolution.
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Standard normal via Box-Muller; pairs are cached.
    double next_normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        // 1 - u lies in (0, 1], keeping the log argument positive.
        const double u1 = 1.0 - next_double();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return r * std::cos(theta);
    }

    /// Circularly symmetric complex normal CN(0, 1): variance 1/2 per
    /// real and imaginary component.
    std::complex<double> next_cnormal() {
        const double re = next_normal();
        const double im = next_normal();
        return {re * M_SQRT1_2, im * M_SQRT1_2};
    }

  private:
    void refill() {
        buf_ = Philox4x32::block({std::uint32_t(ctr_ & 0xFFFFFFFFu),
                                  std::uint32_t(ctr_ >> 32), hi2_, hi3_},
                                 key_);
        ++ctr_;
        pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint32_t hi2_ = 0;
    std::uint32_t hi3_ = 0;
    std::uint64_t ctr_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace cellfree
