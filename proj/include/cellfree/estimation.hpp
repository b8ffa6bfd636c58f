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
#include <vector>

#include "cellfree/matrix.hpp"
#include "cellfree/rng.hpp"

namespace cellfree {

/// MMSE scaling factors c_mk = sqrt(tau_up * rho_up) * beta / (tau_up * rho_up * beta + 1).
inline RealMatrix mmse_scale(const RealMatrix &beta, double tau_up, double rho_up) {
    const double trp = tau_up * rho_up;
    if (!(trp > 0.0))
        throw std::invalid_argument("mmse_scale: tau_up * rho_up must be positive");
    const double root = std::sqrt(trp);
    RealMatrix c(beta.rows(), beta.cols());
    for (std::size_t i = 0; i < beta.size(); ++i)
        c.data()[i] = root * beta.data()[i] / (trp * beta.data()[i] + 1.0);
    return c;
}

/// Channel estimate variances gamma_mk = sqrt(tau_up * rho_up) * beta * c.
inline RealMatrix estimate_variance(const RealMatrix &beta, const RealMatrix &c, double tau_up,
                                    double rho_up) {
    require_same_shape(beta, c, "estimate_variance");
    const double root = std::sqrt(tau_up * rho_up);
    RealMatrix gamma(beta.rows(), beta.cols());
    for (std::size_t i = 0; i < beta.size(); ++i)
        gamma.data()[i] = root * beta.data()[i] * c.data()[i];
    return gamma;
}

/// Uplink training statistics for a fixed large-scale realization.
struct EstimationStats {
    RealMatrix c;     // M x K
    RealMatrix gamma; // M x K
    double tau_up = 0.0;
    double rho_up = 0.0;

    static EstimationStats make(const RealMatrix &beta, double tau_up, double rho_up) {
        EstimationStats s;
        s.c = mmse_scale(beta, tau_up, rho_up);
        s.gamma = estimate_variance(beta, s.c, tau_up, rho_up);
        s.tau_up = tau_up;
        s.rho_up = rho_up;
        return s;
    }
};

/// True channels, their MMSE estimates and the estimation errors for one
/// small-scale realization; g = g_hat + g_tilde elementwise.
struct ChannelRealization {
    ComplexMatrix g;
    ComplexMatrix g_hat;
    ComplexMatrix g_tilde;
};

/// Per-AP MMSE estimation from the projected uplink pilot observation.
/// Pilot waveforms are never materialized: after the orthonormal projection
/// the observation is sqrt(tau_up rho_up) g + nu with nu ~ CN(0,1), so one
/// complex noise draw per (m, k) is a sufficient statistic.
inline void simulate_uplink_estimates(const ComplexMatrix &g, const EstimationStats &stats,
                                      RngStream &noise, ChannelRealization &out) {
    if (!g.same_shape(stats.c))
        throw std::invalid_argument("simulate_uplink_estimates: shape mismatch");
    const double root = std::sqrt(stats.tau_up * stats.rho_up);
    out.g = g;
    if (!out.g_hat.same_shape(g))
        out.g_hat.resize(g.rows(), g.cols());
    if (!out.g_tilde.same_shape(g))
        out.g_tilde.resize(g.rows(), g.cols());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Complex nu = noise.next_cnormal();
        const Complex hat = stats.c.data()[i] * (root * g.data()[i] + nu);
        out.g_hat.data()[i] = hat;
        out.g_tilde.data()[i] = g.data()[i] - hat;
    }
}

inline ChannelRealization simulate_uplink_estimates(const ComplexMatrix &g,
                                                    const EstimationStats &stats,
                                                    RngStream &noise) {
    ChannelRealization real;
    simulate_uplink_estimates(g, stats, noise, real);
    return real;
}

/// Effective downlink gains a_kk' = sum_m sqrt(eta_mk') g_mk conj(g_hat_mk').
struct EffectiveGains {
    ComplexMatrix a; // K x K, row = observing user k, column = beamformed user k'
};

inline void effective_gains(const ChannelRealization &real, const RealMatrix &eta,
                            ComplexMatrix &a, ComplexMatrix &weights) {
    if (eta.rows() != real.g.rows() || eta.cols() != real.g.cols())
        throw std::invalid_argument("effective_gains: eta shape mismatch");
    const std::size_t num_aps = real.g.rows();
    const std::size_t num_users = real.g.cols();
    if (weights.rows() != num_aps || weights.cols() != num_users)
        weights.resize(num_aps, num_users);
    for (std::size_t i = 0; i < weights.size(); ++i)
        weights.data()[i] = std::sqrt(eta.data()[i]) * std::conj(real.g_hat.data()[i]);
    if (a.rows() != num_users || a.cols() != num_users)
        a.resize(num_users, num_users);
    a.fill(Complex{});
    for (std::size_t m = 0; m < num_aps; ++m) {
        const Complex *grow = real.g.row(m);
        const Complex *wrow = weights.row(m);
        for (std::size_t k = 0; k < num_users; ++k) {
            Complex *arow = a.row(k);
            const Complex gmk = grow[k];
            for (std::size_t kp = 0; kp < num_users; ++kp)
                arow[kp] += gmk * wrow[kp];
        }
    }
}

inline EffectiveGains effective_gains(const ChannelRealization &real, const RealMatrix &eta) {
    EffectiveGains gains;
    ComplexMatrix weights;
    effective_gains(real, eta, gains.a, weights);
    return gains;
}

/// Diagonal gains a_kk only; enough for beamforming-training evaluation.
inline std::vector<Complex> effective_gain_diag(const ChannelRealization &real,
                                                const RealMatrix &eta) {
    const std::size_t num_aps = real.g.rows();
    const std::size_t num_users = real.g.cols();
    std::vector<Complex> diag(num_users, Complex{});
    for (std::size_t m = 0; m < num_aps; ++m) {
        const Complex *grow = real.g.row(m);
        const Complex *hrow = real.g_hat.row(m);
        const double *erow = eta.row(m);
        for (std::size_t k = 0; k < num_users; ++k)
            diag[k] += std::sqrt(erow[k]) * grow[k] * std::conj(hrow[k]);
    }
    return diag;
}

/// Closed-form moments of the effective gains:
///   mean_akk[k]      = sum_m sqrt(eta_mk) gamma_mk
///   varsigma[k][k']  = sum_m eta_mk' beta_mk gamma_mk'   (= Var{a_kk} on the diagonal)
///   err_var[k]       = varsigma_kk / (tau_dp rho_dp varsigma_kk + 1)
struct GainMoments {
    std::vector<double> mean_akk;
    RealMatrix varsigma; // K x K
    std::vector<double> err_var;
    double tau_dp = 0.0;
    double rho_dp = 0.0;

    /// Interference power sum_{k' != k} varsigma_kk'.
    double cross_interference(std::size_t k) const {
        double sum = 0.0;
        for (std::size_t kp = 0; kp < varsigma.cols(); ++kp)
            if (kp != k)
                sum += varsigma(k, kp);
        return sum;
    }
};

inline GainMoments gain_moments(const RealMatrix &beta, const RealMatrix &gamma,
                                const RealMatrix &eta, double tau_dp, double rho_dp) {
    require_same_shape(beta, gamma, "gain_moments");
    require_same_shape(beta, eta, "gain_moments");
    const std::size_t num_aps = beta.rows();
    const std::size_t num_users = beta.cols();
    GainMoments mom;
    mom.tau_dp = tau_dp;
    mom.rho_dp = rho_dp;
    mom.mean_akk.assign(num_users, 0.0);
    mom.varsigma.resize(num_users, num_users);
    for (std::size_t m = 0; m < num_aps; ++m) {
        const double *brow = beta.row(m);
        const double *grow = gamma.row(m);
        const double *erow = eta.row(m);
        for (std::size_t k = 0; k < num_users; ++k) {
            mom.mean_akk[k] += std::sqrt(erow[k]) * grow[k];
            const double bmk = brow[k];
            for (std::size_t kp = 0; kp < num_users; ++kp)
                mom.varsigma(k, kp) += erow[kp] * bmk * grow[kp];
        }
    }
    mom.err_var.assign(num_users, 0.0);
    const double trp = tau_dp * rho_dp;
    for (std::size_t k = 0; k < num_users; ++k) {
        const double vs = mom.varsigma(k, k);
        mom.err_var[k] = vs / (trp * vs + 1.0);
    }
    return mom;
}

/// Projected downlink pilot observation y_check = sqrt(tau_dp rho_dp) a_kk + n,
/// n ~ CN(0,1). The beamformed pilot vector is collapsed to its orthonormal
/// projection, which is exact for mutually orthonormal pilot sequences.
inline Complex downlink_pilot_observation(Complex a_kk, double tau_dp, double rho_dp,
                                          Complex noise_sample) {
    const double trp = tau_dp * rho_dp;
    if (trp < 0.0)
        throw std::invalid_argument("downlink_pilot_observation: tau_dp * rho_dp negative");
    return std::sqrt(trp) * a_kk + noise_sample;
}

inline Complex downlink_pilot_observation(Complex a_kk, double tau_dp, double rho_dp,
                                          RngStream &noise) {
    return downlink_pilot_observation(a_kk, tau_dp, rho_dp, noise.next_cnormal());
}

/// Linear MMSE estimate of the effective gain a_kk from the projected
/// downlink pilot observation:
///   a_hat = (sqrt(tau_dp rho_dp) varsigma_kk y_check + sum_m sqrt(eta_mk) gamma_mk)
///           / (tau_dp rho_dp varsigma_kk + 1)
/// With rho_dp = 0 this falls back to the prior mean.
inline Complex lmmse_effective_gain(Complex y_check, const GainMoments &moments, std::size_t k) {
    const double trp = moments.tau_dp * moments.rho_dp;
    const double vs = moments.varsigma(k, k);
    return (std::sqrt(trp) * vs * y_check + moments.mean_akk[k]) / (trp * vs + 1.0);
}

} // namespace cellfree
