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
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "cellfree/estimation.hpp"
#include "cellfree/matrix.hpp"
#include "cellfree/power_control.hpp"
#include "cellfree/rates.hpp"
#include "cellfree/rng.hpp"
#include "cellfree/scenario.hpp"
#include "cellfree/version.hpp"

namespace cellfree {

enum class PcPolicy { uniform, maxmin };

inline const char *to_string(PcPolicy policy) {
    return policy == PcPolicy::uniform ? "uniform" : "maxmin";
}

inline PcPolicy pc_policy_from_string(const std::string &name) {
    if (name == "uniform")
        return PcPolicy::uniform;
    if (name == "maxmin")
        return PcPolicy::maxmin;
    throw std::invalid_argument("unknown power control policy: " + name);
}

/// Everything one placement produced: the coefficients in force and one
/// rate report per requested CSI mode.
struct DropEvaluation {
    std::uint32_t drop_index = 0;
    RealMatrix eta;
    double power_margin = 0.0; // min over APs of 1 - sum_k eta gamma
    std::vector<RateReport> reports;

    const RateReport &report(CsiMode mode) const {
        for (const auto &r : reports)
            if (r.mode == mode)
                return r;
        throw std::out_of_range("DropEvaluation: mode not evaluated");
    }
};

struct ExperimentMetadata {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string version;
};

struct ExperimentResult {
    SystemConfig config;
    std::vector<CsiMode> modes;
    PcPolicy policy = PcPolicy::uniform;
    std::vector<DropEvaluation> drops;
    ExperimentMetadata metadata;

    /// Net throughput samples for a mode, pooled over drops and users in
    /// (drop, user) order.
    std::vector<double> net_samples(CsiMode mode) const {
        std::vector<double> out;
        out.reserve(drops.size() * std::size_t(config.num_users));
        for (const auto &d : drops) {
            const auto &r = d.report(mode);
            out.insert(out.end(), r.net_throughput.begin(), r.net_throughput.end());
        }
        return out;
    }
};

/// Evaluates one drop: geometry, large-scale fading, uplink training
/// statistics, power control, then the per-user rates for every requested
/// CSI mode. Deterministic in (config.rng_seed, drop_index); channel
/// sampling uses one substream per (drop, sample, role).
inline DropEvaluation evaluate_drop(const SystemConfig &config, const PathLossParams &params,
                                    const NormalizedSnrs &snrs, std::uint32_t drop_index,
                                    const std::vector<CsiMode> &modes, PcPolicy policy,
                                    const MaxMinOptions &maxmin_opts = {}) {
    const std::size_t num_aps = std::size_t(config.num_aps);
    const std::size_t num_users = std::size_t(config.num_users);
    const Drop drop = generate_drop(config, params, drop_index);
    const EstimationStats stats =
        EstimationStats::make(drop.beta, double(config.ul_pilot_len), snrs.rho_up);

    DropEvaluation eval;
    eval.drop_index = drop_index;
    if (policy == PcPolicy::maxmin)
        eval.eta = maxmin_eta(drop.beta, stats.gamma, snrs.rho_d, maxmin_opts).coeffs.eta;
    else
        eval.eta = uniform_eta(stats.gamma).eta;

    const PowerCheck check = check_power_constraint(eval.eta, stats.gamma);
    eval.power_margin = check.min_margin;
    if (!check.ok) {
        char msg[64];
        std::snprintf(msg, sizeof(msg), "power constraint violated (margin %.3e)",
                      check.min_margin);
        throw std::runtime_error(msg);
    }

    const GainMoments moments = gain_moments(drop.beta, stats.gamma, eval.eta,
                                             double(config.dl_pilot_len), snrs.rho_dp);

    bool need_bt = false, need_perfect = false;
    for (CsiMode mode : modes) {
        need_bt |= mode == CsiMode::beamforming_training;
        need_perfect |= mode == CsiMode::perfect;
    }

    ComplexMatrix akk_samples, pilot_noise;
    RealMatrix signal_power, interference;
    if (need_bt || need_perfect) {
        const std::size_t n = std::size_t(config.num_channel_samples);
        if (need_bt) {
            akk_samples.resize(n, num_users);
            pilot_noise.resize(n, num_users);
        }
        if (need_perfect) {
            signal_power.resize(n, num_users);
            interference.resize(n, num_users);
        }
        RealMatrix sqrt_beta(num_aps, num_users);
        for (std::size_t i = 0; i < sqrt_beta.size(); ++i)
            sqrt_beta.data()[i] = std::sqrt(drop.beta.data()[i]);

        ComplexMatrix g(num_aps, num_users), a, weights;
        ChannelRealization real;
        for (std::size_t s = 0; s < n; ++s) {
            RngStream fading(config.rng_seed, drop_index, std::uint32_t(s),
                             StreamRole::small_scale);
            for (std::size_t i = 0; i < g.size(); ++i)
                g.data()[i] = sqrt_beta.data()[i] * fading.next_cnormal();
            RngStream ul_noise(config.rng_seed, drop_index, std::uint32_t(s),
                               StreamRole::ul_noise);
            simulate_uplink_estimates(g, stats, ul_noise, real);

            if (need_perfect) {
                effective_gains(real, eval.eta, a, weights);
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
                    signal_power(s, k) = own;
                    interference(s, k) = other;
                    if (need_bt)
                        akk_samples(s, k) = arow[k];
                }
            } else if (need_bt) {
                const std::vector<Complex> diag = effective_gain_diag(real, eval.eta);
                for (std::size_t k = 0; k < num_users; ++k)
                    akk_samples(s, k) = diag[k];
            }
            if (need_bt) {
                RngStream dl_noise(config.rng_seed, drop_index, std::uint32_t(s),
                                   StreamRole::dl_noise);
                for (std::size_t k = 0; k < num_users; ++k)
                    pilot_noise(s, k) = dl_noise.next_cnormal();
            }
        }
    }

    for (CsiMode mode : modes) {
        RateReport report;
        report.mode = mode;
        report.tau_oh = overhead_samples(mode, config.ul_pilot_len, config.dl_pilot_len);
        switch (mode) {
        case CsiMode::statistical:
            report.gross_se = se_statistical(moments, snrs.rho_d);
            report.mc_std_error.assign(num_users, 0.0);
            break;
        case CsiMode::beamforming_training: {
            MonteCarloSe mc = se_beamforming_training(moments, snrs.rho_d, akk_samples, pilot_noise);
            report.gross_se = std::move(mc.se);
            report.mc_std_error = std::move(mc.std_error);
            break;
        }
        case CsiMode::perfect: {
            MonteCarloSe mc = se_perfect(signal_power, interference, snrs.rho_d);
            report.gross_se = std::move(mc.se);
            report.mc_std_error = std::move(mc.std_error);
            break;
        }
        }
        report.net_throughput = net_throughput(report.gross_se, config.bandwidth_hz,
                                               config.coherence_len, report.tau_oh);
        eval.reports.push_back(std::move(report));
    }
    return eval;
}

/// Runs num_drops placements, optionally in parallel. Results are
/// bit-identical for a fixed seed regardless of the worker count: every
/// random draw is keyed by (seed, drop, sample, role), never by thread.
/// A failing drop aborts the whole run with its index attached.
inline ExperimentResult run_experiment(const SystemConfig &config,
                                       const std::vector<CsiMode> &modes, PcPolicy policy,
                                       int num_threads = 0,
                                       const MaxMinOptions &maxmin_opts = {}) {
    config.validate();
    if (modes.empty())
        throw std::invalid_argument("run_experiment: no CSI modes requested");

    ExperimentResult result;
    result.config = config;
    result.modes = modes;
    result.policy = policy;
    result.metadata = {config_fingerprint(config), config.rng_seed, kVersion};
    result.drops.resize(std::size_t(config.num_drops));

    const PathLossParams params = default_path_loss(config);
    const NormalizedSnrs snrs = normalized_snrs(config);

    unsigned workers = num_threads > 0 ? unsigned(num_threads)
                                       : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, unsigned(config.num_drops));

    std::atomic<std::uint32_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::string error_message;

    auto work = [&]() {
        for (;;) {
            const std::uint32_t i = next.fetch_add(1);
            if (i >= std::uint32_t(config.num_drops) || failed.load())
                return;
            try {
                result.drops[i] =
                    evaluate_drop(config, params, snrs, i, modes, policy, maxmin_opts);
            } catch (const std::exception &ex) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true))
                    error_message = "drop " + std::to_string(i) + ": " + ex.what();
                return;
            }
        }
    };

    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(work);
        for (auto &t : pool)
            t.join();
    }
    if (failed.load())
        throw std::runtime_error("run_experiment failed at " + error_message);
    return result;
}

/// Order statistic with linear interpolation between closest ranks
/// (rank h = p (n - 1), zero-based).
inline double percentile(const std::vector<double> &samples, double p) {
    if (samples.empty())
        throw std::invalid_argument("percentile: empty sample set");
    if (p < 0.0 || p > 1.0)
        throw std::invalid_argument("percentile: p must be in [0, 1]");
    std::vector<double> sorted(samples);
    std::sort(sorted.begin(), sorted.end());
    const double h = p * double(sorted.size() - 1);
    const std::size_t lo = std::size_t(h);
    if (lo + 1 >= sorted.size())
        return sorted.back();
    const double frac = h - double(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

/// Right-continuous empirical CDF over a sample set.
struct CdfSummary {
    std::vector<double> sorted;

    double cdf(double x) const {
        const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
        return double(it - sorted.begin()) / double(sorted.size());
    }

    double percentile(double p) const { return cellfree::percentile(sorted, p); }
    double p05() const { return percentile(0.05); }
    double median() const { return percentile(0.5); }

    /// Unique (value, cdf) pairs; the last ordinate is exactly 1.
    std::vector<std::pair<double, double>> points() const {
        std::vector<std::pair<double, double>> pts;
        const std::size_t n = sorted.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (i + 1 < n && sorted[i + 1] == sorted[i])
                continue;
            pts.emplace_back(sorted[i], double(i + 1) / double(n));
        }
        return pts;
    }
};

inline CdfSummary empirical_cdf(const std::vector<double> &samples) {
    if (samples.empty())
        throw std::invalid_argument("empirical_cdf: empty sample set");
    CdfSummary summary;
    summary.sorted = samples;
    std::sort(summary.sorted.begin(), summary.sorted.end());
    return summary;
}

inline double normal_cdf(double x, double mean, double stddev) {
    return 0.5 * std::erfc(-(x - mean) / (stddev * M_SQRT2));
}

/// One-sample Kolmogorov-Smirnov distance against a reference CDF.
template <typename Cdf>
inline double ks_statistic(std::vector<double> samples, Cdf &&reference) {
    if (samples.empty())
        throw std::invalid_argument("ks_statistic: empty sample set");
    std::sort(samples.begin(), samples.end());
    const double n = double(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = reference(samples[i]);
        d = std::max(d, std::max(f - double(i) / n, double(i + 1) / n - f));
    }
    return d;
}

/// Gaussian-approximation diagnostic for the effective gains: how far the
/// empirical distributions of a_kk and a_kk' sit from their large-M
/// references N(sum sqrt(eta) gamma, sum eta gamma^2) and CN(0, varsigma).
struct GaussianityReport {
    std::vector<double> ks_akk;      // per user, Re(a_kk) vs its normal reference
    RealMatrix ks_cross;             // (k, k'), k' != k: max of Re/Im marginal KS
    std::vector<double> im_re_ratio; // mean |Im a_kk| / mean |Re a_kk|
    std::vector<double> ref_mean;    // sum_m sqrt(eta) gamma
    std::vector<double> ref_var;     // sum_m eta gamma^2
    RealMatrix varsigma;
    int num_samples = 0;
    // Raw samples for plotting, filled when collect_samples is set:
    std::vector<double> akk_re_samples;  // Re(a_00)
    std::vector<Complex> cross_samples;  // a_01 (empty when K < 2)
};

inline GaussianityReport gaussianity_diagnostic(const RealMatrix &beta, double tau_up,
                                                double rho_up, const RealMatrix &eta,
                                                int num_samples, std::uint64_t seed,
                                                std::uint32_t drop_index = 0,
                                                bool collect_samples = false) {
    if (num_samples < 1)
        throw std::invalid_argument("gaussianity_diagnostic: need at least one sample");
    const std::size_t num_aps = beta.rows();
    const std::size_t num_users = beta.cols();
    const EstimationStats stats = EstimationStats::make(beta, tau_up, rho_up);
    const GainMoments moments = gain_moments(beta, stats.gamma, eta, 0.0, 0.0);

    GaussianityReport report;
    report.num_samples = num_samples;
    report.varsigma = moments.varsigma;
    report.ref_mean = moments.mean_akk;
    report.ref_var.assign(num_users, 0.0);
    for (std::size_t m = 0; m < num_aps; ++m)
        for (std::size_t k = 0; k < num_users; ++k)
            report.ref_var[k] += eta(m, k) * stats.gamma(m, k) * stats.gamma(m, k);

    const std::size_t n = std::size_t(num_samples);
    std::vector<std::vector<double>> akk_re(num_users), akk_im(num_users);
    Matrix<std::vector<double>> cross_re(num_users, num_users), cross_im(num_users, num_users);
    for (std::size_t k = 0; k < num_users; ++k) {
        akk_re[k].reserve(n);
        akk_im[k].reserve(n);
        for (std::size_t kp = 0; kp < num_users; ++kp) {
            if (kp == k)
                continue;
            cross_re(k, kp).reserve(n);
            cross_im(k, kp).reserve(n);
        }
    }

    RealMatrix sqrt_beta(num_aps, num_users);
    for (std::size_t i = 0; i < beta.size(); ++i)
        sqrt_beta.data()[i] = std::sqrt(beta.data()[i]);

    ComplexMatrix g(num_aps, num_users), a, weights;
    ChannelRealization real;
    for (std::size_t s = 0; s < n; ++s) {
        RngStream fading(seed, drop_index, std::uint32_t(s), StreamRole::small_scale);
        for (std::size_t i = 0; i < g.size(); ++i)
            g.data()[i] = sqrt_beta.data()[i] * fading.next_cnormal();
        RngStream ul_noise(seed, drop_index, std::uint32_t(s), StreamRole::ul_noise);
        simulate_uplink_estimates(g, stats, ul_noise, real);
        effective_gains(real, eta, a, weights);
        for (std::size_t k = 0; k < num_users; ++k) {
            const Complex *arow = a.row(k);
            akk_re[k].push_back(arow[k].real());
            akk_im[k].push_back(arow[k].imag());
            for (std::size_t kp = 0; kp < num_users; ++kp) {
                if (kp == k)
                    continue;
                cross_re(k, kp).push_back(arow[kp].real());
                cross_im(k, kp).push_back(arow[kp].imag());
            }
        }
    }

    report.ks_akk.assign(num_users, 0.0);
    report.im_re_ratio.assign(num_users, 0.0);
    report.ks_cross.resize(num_users, num_users);
    for (std::size_t k = 0; k < num_users; ++k) {
        const double mean = report.ref_mean[k];
        const double sd = std::sqrt(report.ref_var[k]);
        report.ks_akk[k] =
            ks_statistic(akk_re[k], [&](double x) { return normal_cdf(x, mean, sd); });
        double abs_re = 0.0, abs_im = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            abs_re += std::abs(akk_re[k][s]);
            abs_im += std::abs(akk_im[k][s]);
        }
        report.im_re_ratio[k] = abs_re > 0.0 ? abs_im / abs_re : 0.0;
        for (std::size_t kp = 0; kp < num_users; ++kp) {
            if (kp == k)
                continue;
            const double sd_c = std::sqrt(moments.varsigma(k, kp) / 2.0);
            const double ks_re = ks_statistic(cross_re(k, kp),
                                              [&](double x) { return normal_cdf(x, 0.0, sd_c); });
            const double ks_im = ks_statistic(cross_im(k, kp),
                                              [&](double x) { return normal_cdf(x, 0.0, sd_c); });
            report.ks_cross(k, kp) = std::max(ks_re, ks_im);
        }
    }

    if (collect_samples) {
        report.akk_re_samples = akk_re[0];
        if (num_users > 1) {
            report.cross_samples.resize(n);
            for (std::size_t s = 0; s < n; ++s)
                report.cross_samples[s] = {cross_re(0, 1)[s], cross_im(0, 1)[s]};
        }
    }
    return report;
}

inline GaussianityReport gaussianity_diagnostic(const SystemConfig &config, const Drop &drop,
                                                const RealMatrix &eta, int num_samples,
                                                std::uint32_t drop_index = 0,
                                                bool collect_samples = false) {
    const NormalizedSnrs snrs = normalized_snrs(config);
    return gaussianity_diagnostic(drop.beta, double(config.ul_pilot_len), snrs.rho_up, eta,
                                  num_samples, config.rng_seed, drop_index, collect_samples);
}

} // namespace cellfree
