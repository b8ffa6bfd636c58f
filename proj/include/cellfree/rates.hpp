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
#include <string>
#include <vector>

#include "cellfree/estimation.hpp"
#include "cellfree/matrix.hpp"

namespace cellfree {

/// What the user knows about its effective channel gain when decoding.
enum class CsiMode { statistical, beamforming_training, perfect };

inline const char *to_string(CsiMode mode) {
    switch (mode) {
    case CsiMode::statistical:
        return "statistical";
    case CsiMode::beamforming_training:
        return "beamforming_training";
    case CsiMode::perfect:
        return "perfect";
    }
    return "unknown";
}

inline CsiMode csi_mode_from_string(const std::string &name) {
    if (name == "statistical")
        return CsiMode::statistical;
    if (name == "beamforming_training")
        return CsiMode::beamforming_training;
    if (name == "perfect")
        return CsiMode::perfect;
    throw std::invalid_argument("unknown CSI mode: " + name);
}

inline const std::vector<CsiMode> kAllCsiModes = {
    CsiMode::statistical, CsiMode::beamforming_training, CsiMode::perfect};

/// Per-user statistical-CSI SINR:
///   rho_d (sum_m sqrt(eta_mk) gamma_mk)^2 / (rho_d sum_k' varsigma_kk' + 1)
/// where the interference sum runs over all k' including k.
inline std::vector<double> statistical_sinr(const GainMoments &moments, double rho_d) {
    const std::size_t num_users = moments.mean_akk.size();
    std::vector<double> sinr(num_users);
    for (std::size_t k = 0; k < num_users; ++k) {
        double interference = 0.0;
        for (std::size_t kp = 0; kp < num_users; ++kp)
            interference += moments.varsigma(k, kp);
        const double mean = moments.mean_akk[k];
        sinr[k] = rho_d * mean * mean / (rho_d * interference + 1.0);
    }
    return sinr;
}

inline std::vector<double> statistical_sinr(const RealMatrix &beta, const RealMatrix &gamma,
                                            const RealMatrix &eta, double rho_d) {
    return statistical_sinr(gain_moments(beta, gamma, eta, 0.0, 0.0), rho_d);
}

/// Gross spectral efficiency with statistical CSI at the users. Closed form,
/// no channel sampling involved.
inline std::vector<double> se_statistical(const GainMoments &moments, double rho_d) {
    std::vector<double> se = statistical_sinr(moments, rho_d);
    for (double &v : se)
        v = std::log2(1.0 + v);
    return se;
}

inline std::vector<double> se_statistical(const RealMatrix &beta, const RealMatrix &gamma,
                                          const RealMatrix &eta, double rho_d) {
    return se_statistical(gain_moments(beta, gamma, eta, 0.0, 0.0), rho_d);
}

/// Monte Carlo estimate of a per-user spectral efficiency together with the
/// standard error of the sample mean.
struct MonteCarloSe {
    std::vector<double> se;
    std::vector<double> std_error;
};

/// Gross SE with beamforming training. The expectation is over the LMMSE
/// gain estimate a_hat only; each joint sample combines one effective gain
/// a_kk with one projected pilot noise draw. With rho_dp = 0 the estimate
/// degenerates to the prior mean and the result equals se_statistical.
inline MonteCarloSe se_beamforming_training(const GainMoments &moments, double rho_d,
                                            const ComplexMatrix &akk_samples,
                                            const ComplexMatrix &pilot_noise) {
    if (akk_samples.rows() == 0)
        throw std::invalid_argument("se_beamforming_training: need at least one realization");
    if (!akk_samples.same_shape(pilot_noise))
        throw std::invalid_argument("se_beamforming_training: sample shape mismatch");
    const std::size_t num_samples = akk_samples.rows();
    const std::size_t num_users = akk_samples.cols();
    if (num_users != moments.mean_akk.size())
        throw std::invalid_argument("se_beamforming_training: user count mismatch");

    MonteCarloSe out;
    out.se.assign(num_users, 0.0);
    out.std_error.assign(num_users, 0.0);
    for (std::size_t k = 0; k < num_users; ++k) {
        const double denom = rho_d * moments.err_var[k] + rho_d * moments.cross_interference(k) + 1.0;
        double sum = 0.0, sum_sq = 0.0;
        for (std::size_t s = 0; s < num_samples; ++s) {
            const Complex y_check = downlink_pilot_observation(
                akk_samples(s, k), moments.tau_dp, moments.rho_dp, pilot_noise(s, k));
            const Complex a_hat = lmmse_effective_gain(y_check, moments, k);
            const double term = std::log2(1.0 + rho_d * std::norm(a_hat) / denom);
            sum += term;
            sum_sq += term * term;
        }
        const double mean = sum / double(num_samples);
        out.se[k] = mean;
        if (num_samples > 1) {
            const double var = std::max(0.0, sum_sq / double(num_samples) - mean * mean);
            out.std_error[k] = std::sqrt(var / double(num_samples - 1));
        }
    }
    return out;
}

/// Gross SE with a genie-aided user that knows the effective gains exactly.
/// Inputs are per-sample reductions of the gain matrix: signal_power(s, k) =
/// |a_kk|^2 and interference(s, k) = sum_{k' != k} |a_kk'|^2.
inline MonteCarloSe se_perfect(const RealMatrix &signal_power, const RealMatrix &interference,
                               double rho_d) {
    if (signal_power.rows() == 0)
        throw std::invalid_argument("se_perfect: need at least one realization");
    if (!signal_power.same_shape(interference))
        throw std::invalid_argument("se_perfect: sample shape mismatch");
    const std::size_t num_samples = signal_power.rows();
    const std::size_t num_users = signal_power.cols();
    MonteCarloSe out;
    out.se.assign(num_users, 0.0);
    out.std_error.assign(num_users, 0.0);
    for (std::size_t k = 0; k < num_users; ++k) {
        double sum = 0.0, sum_sq = 0.0;
        for (std::size_t s = 0; s < num_samples; ++s) {
            const double term =
                std::log2(1.0 + rho_d * signal_power(s, k) / (rho_d * interference(s, k) + 1.0));
            sum += term;
            sum_sq += term * term;
        }
        const double mean = sum / double(num_samples);
        out.se[k] = mean;
        if (num_samples > 1) {
            const double var = std::max(0.0, sum_sq / double(num_samples) - mean * mean);
            out.std_error[k] = std::sqrt(var / double(num_samples - 1));
        }
    }
    return out;
}

/// Pilot overhead charged to a CSI mode: statistical and perfect CSI spend
/// the uplink training only; beamforming training additionally spends the
/// downlink pilots.
inline int overhead_samples(CsiMode mode, int tau_up, int tau_dp) {
    return mode == CsiMode::beamforming_training ? tau_up + tau_dp : tau_up;
}

/// Net throughput in bit/s: B (1 - tau_oh / tau) / 2 per-user, applied
/// elementwise to the gross spectral efficiencies.
inline std::vector<double> net_throughput(const std::vector<double> &gross_se, double bandwidth_hz,
                                          int tau, int tau_oh) {
    if (tau_oh < 0 || tau_oh >= tau)
        throw std::invalid_argument("net_throughput: need 0 <= tau_oh < tau");
    const double factor = bandwidth_hz * (1.0 - double(tau_oh) / double(tau)) / 2.0;
    std::vector<double> out(gross_se.size());
    for (std::size_t k = 0; k < gross_se.size(); ++k)
        out[k] = factor * gross_se[k];
    return out;
}

/// Per-drop rate summary for one CSI mode.
struct RateReport {
    CsiMode mode = CsiMode::statistical;
    std::vector<double> gross_se;      // bit/s/Hz per channel use
    std::vector<double> net_throughput; // bit/s
    std::vector<double> mc_std_error;  // standard error of gross_se (0 for closed form)
    int tau_oh = 0;
};

} // namespace cellfree
