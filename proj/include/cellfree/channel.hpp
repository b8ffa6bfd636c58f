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

#include <cmath>
#include <stdexcept>

#include "cellfree/matrix.hpp"
#include "cellfree/rng.hpp"

namespace cellfree {

/// Three-slope path loss model parameters. The fixed loss is the
/// Hata-COST231 constant evaluated at the carrier frequency and the
/// AP / user antenna heights.
struct PathLossParams {
    double d0_m = 10.0;  ///< inner breakpoint
    double d1_m = 50.0;  ///< outer breakpoint; shadowing applies beyond it
    double fixed_loss_db = 0.0;
};

inline bool hata_frequency_in_range(double carrier_freq_hz) {
    return carrier_freq_hz >= 150e6 && carrier_freq_hz <= 2e9;
}

/// Hata-COST231 fixed loss constant (dB). Valid for carriers between
/// 150 MHz and 2 GHz; callers that accept configs should warn outside
/// that range.
inline double hata_fixed_loss(double carrier_freq_hz, double ap_height_m, double user_height_m) {
    if (ap_height_m <= 0.0)
        throw std::invalid_argument("hata_fixed_loss: AP height must be positive");
    if (user_height_m < 0.0)
        throw std::invalid_argument("hata_fixed_loss: user height must be nonnegative");
    const double f_mhz = carrier_freq_hz / 1e6;
    const double lf = std::log10(f_mhz);
    return 46.3 + 33.9 * lf - 13.82 * std::log10(ap_height_m) -
           (1.1 * lf - 0.7) * user_height_m + (1.56 * lf - 0.8);
}

inline PathLossParams make_path_loss_params(double carrier_freq_hz, double ap_height_m,
                                            double user_height_m, double d0_m = 10.0,
                                            double d1_m = 50.0) {
    if (!(d0_m > 0.0) || !(d1_m > d0_m))
        throw std::invalid_argument("make_path_loss_params: need 0 < d0 < d1");
    PathLossParams p;
    p.d0_m = d0_m;
    p.d1_m = d1_m;
    p.fixed_loss_db = hata_fixed_loss(carrier_freq_hz, ap_height_m, user_height_m);
    return p;
}

/// Three-slope path loss in dB (a negative gain). 35 dB/decade beyond d1,
/// 20 dB/decade between d0 and d1, flat below d0; continuous at d1.
inline double path_loss_db(double distance_m, const PathLossParams &params) {
    if (distance_m < 0.0)
        throw std::invalid_argument("path_loss_db: negative distance");
    const double d_km = distance_m / 1000.0;
    const double d0_km = params.d0_m / 1000.0;
    const double d1_km = params.d1_m / 1000.0;
    if (distance_m > params.d1_m)
        return -params.fixed_loss_db - 35.0 * std::log10(d_km);
    if (distance_m > params.d0_m)
        return -params.fixed_loss_db - 15.0 * std::log10(d1_km) - 20.0 * std::log10(d_km);
    return -params.fixed_loss_db - 15.0 * std::log10(d1_km) - 20.0 * std::log10(d0_km);
}

inline double path_loss_linear(double distance_m, const PathLossParams &params) {
    return std::pow(10.0, path_loss_db(distance_m, params) / 10.0);
}

/// Large-scale gains beta from AP-user distances: linear path loss with
/// log-normal shadowing of standard deviation sigma_sh dB. Shadowing is
/// applied only beyond the outer breakpoint d1, where the slope model holds.
inline RealMatrix large_scale_from_distances(const RealMatrix &distances_m,
                                             const PathLossParams &params, double sigma_sh_db,
                                             RngStream &shadowing) {
    RealMatrix beta(distances_m.rows(), distances_m.cols());
    for (std::size_t m = 0; m < distances_m.rows(); ++m) {
        for (std::size_t k = 0; k < distances_m.cols(); ++k) {
            const double d = distances_m(m, k);
            const double z = shadowing.next_normal();
            double gain = path_loss_linear(d, params);
            if (d > params.d1_m)
                gain *= std::pow(10.0, sigma_sh_db * z / 10.0);
            beta(m, k) = gain;
        }
    }
    return beta;
}

/// i.i.d. CN(0,1) Rayleigh fading block, written in place.
inline void draw_small_scale(RngStream &rng, std::size_t num_aps, std::size_t num_users,
                             ComplexMatrix &out) {
    if (num_aps == 0 || num_users == 0)
        throw std::invalid_argument("draw_small_scale: empty dimensions");
    if (out.rows() != num_aps || out.cols() != num_users)
        out.resize(num_aps, num_users);
    for (auto &h : out)
        h = rng.next_cnormal();
}

inline ComplexMatrix draw_small_scale(RngStream &rng, std::size_t num_aps,
                                      std::size_t num_users) {
    ComplexMatrix h;
    draw_small_scale(rng, num_aps, num_users, h);
    return h;
}

} // namespace cellfree
