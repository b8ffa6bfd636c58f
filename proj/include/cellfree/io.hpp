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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cellfree/montecarlo.hpp"

namespace cellfree {

using json = nlohmann::json;

/// Run options that live next to the scenario in the config file; every CLI
/// flag has a config-file equivalent and flags override file values.
struct RunOptions {
    std::vector<CsiMode> modes = kAllCsiModes;
    PcPolicy policy = PcPolicy::maxmin;
    int threads = 0; // 0 = hardware concurrency
    std::string out_dir = "out";
};

struct LoadedConfig {
    SystemConfig config;
    RunOptions options;
};

inline json config_to_json(const SystemConfig &c) {
    return json{{"num_aps", c.num_aps},
                {"num_users", c.num_users},
                {"area_side", c.area_side_m},
                {"carrier_freq", c.carrier_freq_hz},
                {"bandwidth", c.bandwidth_hz},
                {"noise_figure", c.noise_figure_db},
                {"shadow_sigma", c.shadow_sigma_db},
                {"ap_height", c.ap_height_m},
                {"user_height", c.user_height_m},
                {"coherence_len", c.coherence_len},
                {"ul_pilot_len", c.ul_pilot_len},
                {"dl_pilot_len", c.dl_pilot_len},
                {"ap_power", c.ap_power_w},
                {"user_power", c.user_power_w},
                {"num_drops", c.num_drops},
                {"num_channel_samples", c.num_channel_samples},
                {"rng_seed", c.rng_seed}};
}

inline std::vector<CsiMode> parse_modes(const std::vector<std::string> &names) {
    if (names.empty())
        throw std::invalid_argument("empty mode list");
    std::vector<CsiMode> modes;
    for (const auto &name : names) {
        const CsiMode mode = csi_mode_from_string(name);
        if (std::find(modes.begin(), modes.end(), mode) == modes.end())
            modes.push_back(mode);
    }
    return modes;
}

/// Loads a JSON config. Scenario keys mirror the SystemConfig field names;
/// pilot lengths default to num_users when omitted. Unknown keys are
/// rejected so typos cannot silently fall back to defaults.
inline LoadedConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error &ex) {
        throw std::runtime_error("config parse error in " + path + ": " + ex.what());
    }
    if (!j.is_object())
        throw std::runtime_error("config must be a JSON object: " + path);

    static const std::vector<std::string> known = {
        "num_aps",    "num_users",     "area_side",     "carrier_freq",
        "bandwidth",  "noise_figure",  "shadow_sigma",  "ap_height",
        "user_height", "coherence_len", "ul_pilot_len",  "dl_pilot_len",
        "ap_power",   "user_power",    "num_drops",     "num_channel_samples",
        "rng_seed",   "modes",         "power_control", "threads",
        "out_dir"};
    for (const auto &item : j.items())
        if (std::find(known.begin(), known.end(), item.key()) == known.end())
            throw std::runtime_error("unknown config key: " + item.key());

    LoadedConfig loaded;
    SystemConfig &c = loaded.config;
    auto get = [&j](const char *key, auto &value) {
        if (j.contains(key))
            value = j.at(key).get<std::decay_t<decltype(value)>>();
    };
    get("num_aps", c.num_aps);
    get("num_users", c.num_users);
    get("area_side", c.area_side_m);
    get("carrier_freq", c.carrier_freq_hz);
    get("bandwidth", c.bandwidth_hz);
    get("noise_figure", c.noise_figure_db);
    get("shadow_sigma", c.shadow_sigma_db);
    get("ap_height", c.ap_height_m);
    get("user_height", c.user_height_m);
    get("coherence_len", c.coherence_len);
    c.ul_pilot_len = j.contains("ul_pilot_len") ? j.at("ul_pilot_len").get<int>() : c.num_users;
    c.dl_pilot_len = j.contains("dl_pilot_len") ? j.at("dl_pilot_len").get<int>() : c.num_users;
    get("ap_power", c.ap_power_w);
    get("user_power", c.user_power_w);
    get("num_drops", c.num_drops);
    get("num_channel_samples", c.num_channel_samples);
    get("rng_seed", c.rng_seed);

    if (j.contains("modes"))
        loaded.options.modes = parse_modes(j.at("modes").get<std::vector<std::string>>());
    if (j.contains("power_control"))
        loaded.options.policy = pc_policy_from_string(j.at("power_control").get<std::string>());
    get("threads", loaded.options.threads);
    get("out_dir", loaded.options.out_dir);
    return loaded;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// One row per (drop, user, mode); gross SE in bit/s/Hz, throughput in bit/s.
inline void write_samples_csv(const std::string &path, const ExperimentResult &result) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << "drop,user,mode,gross_se_bit_per_cu,net_throughput_bit_per_s\n";
    for (const auto &drop : result.drops) {
        for (const auto &report : drop.reports) {
            for (std::size_t k = 0; k < report.gross_se.size(); ++k) {
                out << drop.drop_index << ',' << k << ',' << to_string(report.mode) << ','
                    << format_double(report.gross_se[k]) << ','
                    << format_double(report.net_throughput[k]) << '\n';
            }
        }
    }
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

struct SampleRow {
    std::uint32_t drop = 0;
    int user = 0;
    std::string mode;
    double gross_se = 0.0;
    double net_throughput = 0.0;
};

inline std::vector<SampleRow> read_samples_csv(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open samples file: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("empty samples file: " + path);
    if (line != "drop,user,mode,gross_se_bit_per_cu,net_throughput_bit_per_s")
        throw std::runtime_error("unexpected samples header in " + path);
    std::vector<SampleRow> rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::string field;
        SampleRow row;
        std::getline(ss, field, ',');
        row.drop = std::uint32_t(std::stoul(field));
        std::getline(ss, field, ',');
        row.user = std::stoi(field);
        std::getline(ss, row.mode, ',');
        std::getline(ss, field, ',');
        row.gross_se = std::stod(field);
        std::getline(ss, field, ',');
        row.net_throughput = std::stod(field);
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Percentile table plus the headline relative gains of beamforming
/// training over statistical CSI.
inline json summary_json(const ExperimentResult &result) {
    json modes = json::object();
    for (CsiMode mode : result.modes) {
        const auto samples = result.net_samples(mode);
        modes[to_string(mode)] = {{"p05_bit_per_s", percentile(samples, 0.05)},
                                  {"median_bit_per_s", percentile(samples, 0.5)}};
    }
    json out{{"modes", modes},
             {"config", config_to_json(result.config)},
             {"power_control", to_string(result.policy)},
             {"seed", result.metadata.seed},
             {"config_hash", result.metadata.config_hash},
             {"version", result.metadata.version}};
    const bool has_stat =
        std::find(result.modes.begin(), result.modes.end(), CsiMode::statistical) !=
        result.modes.end();
    const bool has_bt =
        std::find(result.modes.begin(), result.modes.end(), CsiMode::beamforming_training) !=
        result.modes.end();
    if (has_stat && has_bt) {
        const auto stat = result.net_samples(CsiMode::statistical);
        const auto bt = result.net_samples(CsiMode::beamforming_training);
        const double stat_p05 = percentile(stat, 0.05), stat_med = percentile(stat, 0.5);
        out["gains_bt_over_statistical"] = {
            {"p05", (percentile(bt, 0.05) - stat_p05) / stat_p05},
            {"median", (percentile(bt, 0.5) - stat_med) / stat_med}};
    }
    return out;
}

inline void write_json(const std::string &path, const json &j) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

inline void write_summary_json(const std::string &path, const ExperimentResult &result) {
    write_json(path, summary_json(result));
}

struct RunManifest {
    std::string config_path;
    std::string out_dir;
    std::string subcommand;
    json resolved_config;
    json resolved_options;
    std::uint64_t seed = 0;
    std::string version = kVersion;
};

inline void write_manifest_json(const std::string &path, const RunManifest &manifest) {
    write_json(path, json{{"config_path", manifest.config_path},
                          {"out_dir", manifest.out_dir},
                          {"subcommand", manifest.subcommand},
                          {"config", manifest.resolved_config},
                          {"options", manifest.resolved_options},
                          {"seed", manifest.seed},
                          {"version", manifest.version}});
}

inline void write_cdf_csv(const std::string &path,
                          const std::vector<std::pair<double, double>> &points) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << "net_throughput_bit_per_s,cdf\n";
    for (const auto &[value, prob] : points)
        out << format_double(value) << ',' << format_double(prob) << '\n';
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

/// Equal-width histogram; mass sums to exactly 1 over the bins.
struct Histogram {
    std::vector<double> centers;
    std::vector<double> mass;
    std::vector<double> empirical_pdf;
    double bin_width = 0.0;
};

inline Histogram build_histogram(const std::vector<double> &samples, int num_bins = 60) {
    if (samples.empty())
        throw std::invalid_argument("build_histogram: empty sample set");
    if (num_bins < 1)
        throw std::invalid_argument("build_histogram: need at least one bin");
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    double lo = *lo_it, hi = *hi_it;
    if (lo == hi) { // degenerate: widen artificially so every sample lands in one bin
        lo -= 0.5;
        hi += 0.5;
    }
    Histogram hist;
    hist.bin_width = (hi - lo) / num_bins;
    hist.centers.resize(num_bins);
    hist.mass.assign(num_bins, 0.0);
    for (int b = 0; b < num_bins; ++b)
        hist.centers[b] = lo + (b + 0.5) * hist.bin_width;
    const double unit = 1.0 / double(samples.size());
    for (double x : samples) {
        int b = int((x - lo) / hist.bin_width);
        b = std::clamp(b, 0, num_bins - 1);
        hist.mass[b] += unit;
    }
    hist.empirical_pdf.resize(num_bins);
    for (int b = 0; b < num_bins; ++b)
        hist.empirical_pdf[b] = hist.mass[b] / hist.bin_width;
    return hist;
}

inline double normal_pdf(double x, double mean, double stddev) {
    const double z = (x - mean) / stddev;
    return std::exp(-0.5 * z * z) / (stddev * std::sqrt(2.0 * M_PI));
}

inline void write_histogram_csv(const std::string &path, const Histogram &hist,
                                const std::vector<double> &reference_pdf) {
    if (reference_pdf.size() != hist.centers.size())
        throw std::invalid_argument("write_histogram_csv: reference size mismatch");
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << "bin_center,bin_width,mass,empirical_pdf,reference_pdf\n";
    for (std::size_t b = 0; b < hist.centers.size(); ++b)
        out << format_double(hist.centers[b]) << ',' << format_double(hist.bin_width) << ','
            << format_double(hist.mass[b]) << ',' << format_double(hist.empirical_pdf[b]) << ','
            << format_double(reference_pdf[b]) << '\n';
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

inline json gaussianity_json(const GaussianityReport &report) {
    json cross = json::array();
    for (std::size_t k = 0; k < report.ks_cross.rows(); ++k)
        for (std::size_t kp = 0; kp < report.ks_cross.cols(); ++kp)
            if (k != kp)
                cross.push_back({{"k", k},
                                 {"k_prime", kp},
                                 {"ks", report.ks_cross(k, kp)},
                                 {"varsigma", report.varsigma(k, kp)}});
    return json{{"num_samples", report.num_samples},
                {"ks_akk", report.ks_akk},
                {"im_re_ratio", report.im_re_ratio},
                {"ref_mean", report.ref_mean},
                {"ref_var", report.ref_var},
                {"cross", cross}};
}

} // namespace cellfree
