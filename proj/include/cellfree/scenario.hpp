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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "cellfree/channel.hpp"
#include "cellfree/matrix.hpp"
#include "cellfree/rng.hpp"

namespace cellfree {

inline constexpr double kBoltzmann = 1.380649e-23; // J/K
inline constexpr double kNoiseTemperature = 290.0; // K

/// Full scenario description: network size, geometry, radio constants,
/// frame structure and Monte Carlo sizing. All powers are in watts, all
/// SNR-like quantities derived from it are linear.
struct SystemConfig {
    int num_aps = 50;
    int num_users = 10;
    double area_side_m = 1000.0;
    double carrier_freq_hz = 1.9e9;
    double bandwidth_hz = 20e6;
    double noise_figure_db = 9.0;
    double shadow_sigma_db = 8.0;
    double ap_height_m = 15.0;
    double user_height_m = 1.65;
    int coherence_len = 200;  ///< tau, samples per coherence interval
    int ul_pilot_len = 10;    ///< tau_up
    int dl_pilot_len = 10;    ///< tau_dp
    double ap_power_w = 0.2;  ///< downlink data and downlink pilot power
    double user_power_w = 0.1; ///< uplink pilot power
    int num_drops = 200;
    int num_channel_samples = 1000;
    std::uint64_t rng_seed = 1;

    /// Throws std::invalid_argument listing every violated invariant.
    void validate() const {
        std::string err;
        auto fail = [&err](const std::string &msg) {
            if (!err.empty())
                err += "; ";
            err += msg;
        };
        if (!(num_aps > num_users))
            fail("num_aps must exceed num_users");
        if (num_users < 1)
            fail("num_users must be at least 1");
        if (ul_pilot_len < num_users)
            fail("ul_pilot_len must be >= num_users (orthonormal pilots)");
        if (dl_pilot_len < num_users)
            fail("dl_pilot_len must be >= num_users (orthonormal pilots)");
        if (ul_pilot_len + dl_pilot_len >= coherence_len)
            fail("ul_pilot_len + dl_pilot_len must be < coherence_len");
        if (!(area_side_m > 0.0))
            fail("area_side must be positive");
        if (!(bandwidth_hz > 0.0))
            fail("bandwidth must be positive");
        if (!(carrier_freq_hz > 0.0))
            fail("carrier_freq must be positive");
        if (!(ap_power_w > 0.0))
            fail("ap_power must be positive");
        if (!(user_power_w > 0.0))
            fail("user_power must be positive");
        if (!(ap_height_m > 0.0))
            fail("ap_height must be positive");
        if (!(user_height_m > 0.0))
            fail("user_height must be positive");
        if (!(shadow_sigma_db >= 0.0))
            fail("shadow_sigma must be nonnegative");
        if (!std::isfinite(noise_figure_db))
            fail("noise_figure must be finite");
        if (num_drops < 1)
            fail("num_drops must be at least 1");
        if (num_channel_samples < 1)
            fail("num_channel_samples must be at least 1");
        if (!err.empty())
            throw std::invalid_argument("invalid config: " + err);
    }
};

/// Thermal noise power in watts: B * k_B * T0 * F, with T0 = 290 K and the
/// noise figure given in dB.
inline double noise_power(const SystemConfig &config) {
    if (!(config.bandwidth_hz > 0.0))
        throw std::invalid_argument("noise_power: bandwidth must be positive");
    if (!std::isfinite(config.noise_figure_db))
        throw std::invalid_argument("noise_power: noise figure must be finite");
    return config.bandwidth_hz * kBoltzmann * kNoiseTemperature *
           std::pow(10.0, config.noise_figure_db / 10.0);
}

/// Normalized transmit SNR (rho): radiated power over noise power.
inline double normalized_snr(double radiated_power_w, double noise_w) {
    if (!(noise_w > 0.0))
        throw std::invalid_argument("normalized_snr: noise power must be positive");
    if (radiated_power_w < 0.0)
        throw std::invalid_argument("normalized_snr: negative radiated power");
    return radiated_power_w / noise_w;
}

/// The three normalized SNRs the simulator runs on. Downlink pilots are
/// radiated at AP power, uplink pilots at user power.
struct NormalizedSnrs {
    double rho_d;
    double rho_up;
    double rho_dp;
};

inline NormalizedSnrs normalized_snrs(const SystemConfig &config) {
    const double noise = noise_power(config);
    return {normalized_snr(config.ap_power_w, noise), normalized_snr(config.user_power_w, noise),
            normalized_snr(config.ap_power_w, noise)};
}

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Minimum horizontal distance between p and q on the wrap-around torus:
/// per-axis displacement is folded into [0, side/2], which equals the
/// minimum over the nine translated images of q.
inline double wrapped_distance(const Point &p, const Point &q, double area_side_m) {
    double dx = std::abs(p.x - q.x);
    double dy = std::abs(p.y - q.y);
    dx = std::min(dx, area_side_m - dx);
    dy = std::min(dy, area_side_m - dy);
    return std::hypot(dx, dy);
}

/// One random network placement and its large-scale fading matrix.
struct Drop {
    std::vector<Point> ap_positions;
    std::vector<Point> user_positions;
    RealMatrix beta; // M x K, linear gains
};

inline PathLossParams default_path_loss(const SystemConfig &config) {
    return make_path_loss_params(config.carrier_freq_hz, config.ap_height_m,
                                 config.user_height_m);
}

/// Uniform AP and user placement on the square plus the resulting beta.
/// Deterministic in (config.rng_seed, drop_index); geometry and shadowing
/// use separate substreams.
inline Drop generate_drop(const SystemConfig &config, const PathLossParams &params,
                          std::uint32_t drop_index) {
    Drop drop;
    const std::size_t num_aps = std::size_t(config.num_aps);
    const std::size_t num_users = std::size_t(config.num_users);
    RngStream geom(config.rng_seed, drop_index, 0, StreamRole::geometry);
    drop.ap_positions.resize(num_aps);
    for (auto &p : drop.ap_positions)
        p = {geom.uniform(0.0, config.area_side_m), geom.uniform(0.0, config.area_side_m)};
    drop.user_positions.resize(num_users);
    for (auto &p : drop.user_positions)
        p = {geom.uniform(0.0, config.area_side_m), geom.uniform(0.0, config.area_side_m)};

    RealMatrix distances(num_aps, num_users);
    for (std::size_t m = 0; m < num_aps; ++m)
        for (std::size_t k = 0; k < num_users; ++k)
            distances(m, k) =
                wrapped_distance(drop.ap_positions[m], drop.user_positions[k], config.area_side_m);

    RngStream shadowing(config.rng_seed, drop_index, 0, StreamRole::shadowing);
    drop.beta = large_scale_from_distances(distances, params, config.shadow_sigma_db, shadowing);
    return drop;
}

inline Drop generate_drop(const SystemConfig &config, std::uint32_t drop_index) {
    return generate_drop(config, default_path_loss(config), drop_index);
}

/// Canonical textual form of a config, used for fingerprinting runs.
inline std::string config_canonical_string(const SystemConfig &c) {
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    std::string s;
    s += "num_aps=" + std::to_string(c.num_aps);
    s += ";num_users=" + std::to_string(c.num_users);
    s += ";area_side=" + num(c.area_side_m);
    s += ";carrier_freq=" + num(c.carrier_freq_hz);
    s += ";bandwidth=" + num(c.bandwidth_hz);
    s += ";noise_figure=" + num(c.noise_figure_db);
    s += ";shadow_sigma=" + num(c.shadow_sigma_db);
    s += ";ap_height=" + num(c.ap_height_m);
    s += ";user_height=" + num(c.user_height_m);
    s += ";coherence_len=" + std::to_string(c.coherence_len);
    s += ";ul_pilot_len=" + std::to_string(c.ul_pilot_len);
    s += ";dl_pilot_len=" + std::to_string(c.dl_pilot_len);
    s += ";ap_power=" + num(c.ap_power_w);
    s += ";user_power=" + num(c.user_power_w);
    s += ";num_drops=" + std::to_string(c.num_drops);
    s += ";num_channel_samples=" + std::to_string(c.num_channel_samples);
    s += ";rng_seed=" + std::to_string(c.rng_seed);
    return s;
}

inline std::uint64_t fnv1a64(const std::string &text) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char ch : text) {
        hash ^= ch;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

inline std::string config_fingerprint(const SystemConfig &c) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config_canonical_string(c))));
    return buf;
}

} // namespace cellfree
