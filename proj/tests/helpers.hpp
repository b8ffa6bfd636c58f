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

#include <cstdint>
#include <vector>

#include "cellfree/cellfree.hpp"

namespace testutil {

using namespace cellfree;

/// A self-contained (beta, gamma, eta) instance with its SNR parameters.
struct Instance {
    RealMatrix beta;
    RealMatrix gamma;
    RealMatrix eta;
    double tau_up = 0.0;
    double rho_up = 0.0;
    double tau_dp = 0.0;
    double rho_dp = 0.0;
    double rho_d = 0.0;
};

/// Random instance with spread-out large-scale gains and a feasible,
/// generally non-uniform eta. Deterministic in the seed.
inline Instance make_instance(std::size_t num_aps, std::size_t num_users, std::uint64_t seed,
                              bool uniform_power = false) {
    RngStream rng(seed, 0, 0, StreamRole::generic);
    Instance inst;
    inst.beta.resize(num_aps, num_users);
    for (auto &b : inst.beta)
        b = std::pow(10.0, rng.uniform(-3.0, 0.0));
    inst.tau_up = double(num_users);
    inst.rho_up = std::pow(10.0, rng.uniform(0.5, 2.0));
    inst.tau_dp = double(num_users);
    inst.rho_d = std::pow(10.0, rng.uniform(0.5, 2.0));
    inst.rho_dp = inst.rho_d;
    const EstimationStats stats = EstimationStats::make(inst.beta, inst.tau_up, inst.rho_up);
    inst.gamma = stats.gamma;
    if (uniform_power) {
        inst.eta = uniform_eta(inst.gamma).eta;
    } else {
        inst.eta.resize(num_aps, num_users);
        for (std::size_t m = 0; m < num_aps; ++m) {
            double load = 0.0;
            for (std::size_t k = 0; k < num_users; ++k) {
                inst.eta(m, k) = rng.uniform(0.1, 1.0);
                load += inst.eta(m, k) * inst.gamma(m, k);
            }
            const double budget = rng.uniform(0.5, 1.0);
            for (std::size_t k = 0; k < num_users; ++k)
                inst.eta(m, k) *= budget / load;
        }
    }
    return inst;
}

/// Joint Monte Carlo samples of the effective gains for a fixed instance:
/// diagonal gains, downlink pilot noise, and the per-user signal and
/// interference powers of the full gain matrix.
struct GainSamples {
    ComplexMatrix akk;         // n x K
    ComplexMatrix pilot_noise; // n x K
    RealMatrix signal_power;   // n x K, |a_kk|^2
    RealMatrix interference;   // n x K, sum_{k' != k} |a_kk'|^2
};

inline GainSamples sample_gains(const Instance &inst, std::size_t num_samples,
                                std::uint64_t seed, std::uint32_t drop_index = 0) {
    const std::size_t num_aps = inst.beta.rows();
    const std::size_t num_users = inst.beta.cols();
    const EstimationStats stats = EstimationStats::make(inst.beta, inst.tau_up, inst.rho_up);

    GainSamples out;
    out.akk.resize(num_samples, num_users);
    out.pilot_noise.resize(num_samples, num_users);
    out.signal_power.resize(num_samples, num_users);
    out.interference.resize(num_samples, num_users);

    RealMatrix sqrt_beta(num_aps, num_users);
    for (std::size_t i = 0; i < inst.beta.size(); ++i)
        sqrt_beta.data()[i] = std::sqrt(inst.beta.data()[i]);

    ComplexMatrix g(num_aps, num_users), a, weights;
    ChannelRealization real;
    for (std::size_t s = 0; s < num_samples; ++s) {
        RngStream fading(seed, drop_index, std::uint32_t(s), StreamRole::small_scale);
        for (std::size_t i = 0; i < g.size(); ++i)
            g.data()[i] = sqrt_beta.data()[i] * fading.next_cnormal();
        RngStream ul_noise(seed, drop_index, std::uint32_t(s), StreamRole::ul_noise);
        simulate_uplink_estimates(g, stats, ul_noise, real);
        effective_gains(real, inst.eta, a, weights);
        RngStream dl_noise(seed, drop_index, std::uint32_t(s), StreamRole::dl_noise);
        for (std::size_t k = 0; k < num_users; ++k) {
            const Complex *arow = a.row(k);
            double own = 0.0, other = 0.0;
            for (std::size_t kp = 0; kp < num_users; ++kp) {
                const double p = std::norm(arow[kp]);
                if (kp == k)
                    own = p;
                else
                    other += p;
            }
            out.akk(s, k) = arow[k];
            out.signal_power(s, k) = own;
            out.interference(s, k) = other;
            out.pilot_noise(s, k) = dl_noise.next_cnormal();
        }
    }
    return out;
}

/// Small valid config for fast smoke runs.
inline SystemConfig tiny_config() {
    SystemConfig config;
    config.num_aps = 4;
    config.num_users = 2;
    config.ul_pilot_len = 2;
    config.dl_pilot_len = 2;
    config.num_drops = 2;
    config.num_channel_samples = 20;
    config.rng_seed = 42;
    return config;
}

} // namespace testutil
