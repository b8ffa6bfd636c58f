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

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cellfree/cellfree.hpp"

namespace fs = std::filesystem;
using namespace cellfree;

namespace {

std::vector<std::string> split_csv_list(const std::string &text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            parts.push_back(item);
    return parts;
}

json options_to_json(const RunOptions &options) {
    std::vector<std::string> mode_names;
    for (CsiMode mode : options.modes)
        mode_names.emplace_back(to_string(mode));
    return json{{"modes", mode_names},
                {"power_control", to_string(options.policy)},
                {"threads", options.threads},
                {"out_dir", options.out_dir}};
}

struct RunFlags {
    std::string config_path;
    std::string modes;
    std::string power_control;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<int> drops;
    std::optional<int> samples;
};

void apply_overrides(LoadedConfig &loaded, const RunFlags &flags) {
    if (!flags.modes.empty())
        loaded.options.modes = parse_modes(split_csv_list(flags.modes));
    if (!flags.power_control.empty())
        loaded.options.policy = pc_policy_from_string(flags.power_control);
    if (!flags.out_dir.empty())
        loaded.options.out_dir = flags.out_dir;
    if (flags.seed)
        loaded.config.rng_seed = *flags.seed;
    if (flags.threads)
        loaded.options.threads = *flags.threads;
    if (flags.drops)
        loaded.config.num_drops = *flags.drops;
    if (flags.samples)
        loaded.config.num_channel_samples = *flags.samples;
}

void warn_if_model_out_of_range(const SystemConfig &config) {
    if (!hata_frequency_in_range(config.carrier_freq_hz))
        std::cerr << "warning: carrier frequency " << config.carrier_freq_hz
                  << " Hz is outside the 150 MHz - 2 GHz validity range of the path loss model\n";
}

int cmd_run(const RunFlags &flags) {
    LoadedConfig loaded = load_config(flags.config_path);
    apply_overrides(loaded, flags);
    loaded.config.validate();
    warn_if_model_out_of_range(loaded.config);

    const fs::path out_dir(loaded.options.out_dir);
    fs::create_directories(out_dir);

    const ExperimentResult result = run_experiment(loaded.config, loaded.options.modes,
                                                   loaded.options.policy, loaded.options.threads);

    write_samples_csv((out_dir / "samples.csv").string(), result);
    write_summary_json((out_dir / "summary.json").string(), result);

    RunManifest manifest;
    manifest.config_path = flags.config_path;
    manifest.out_dir = out_dir.string();
    manifest.subcommand = "run";
    manifest.resolved_config = config_to_json(loaded.config);
    manifest.resolved_options = options_to_json(loaded.options);
    manifest.seed = loaded.config.rng_seed;
    write_manifest_json((out_dir / "manifest.json").string(), manifest);

    std::cout << "wrote " << (out_dir / "samples.csv").string() << ", summary.json, manifest.json\n";
    return 0;
}

int cmd_cdf(const std::string &samples_path, const std::string &mode_name,
            const std::string &out_path) {
    const CsiMode mode = csi_mode_from_string(mode_name); // rejects unknown names
    const auto rows = read_samples_csv(samples_path);
    std::vector<double> values;
    for (const auto &row : rows)
        if (row.mode == to_string(mode))
            values.push_back(row.net_throughput);
    if (values.empty())
        throw std::runtime_error("no samples for mode '" + mode_name + "' in " + samples_path);
    const CdfSummary summary = empirical_cdf(values);
    write_cdf_csv(out_path, summary.points());
    std::cout << "wrote " << out_path << " (" << summary.points().size() << " points)\n";
    return 0;
}

int cmd_gaussianity(const RunFlags &flags, int num_samples, int num_bins) {
    LoadedConfig loaded = load_config(flags.config_path);
    apply_overrides(loaded, flags);
    loaded.config.validate();
    warn_if_model_out_of_range(loaded.config);
    if (num_samples < 10000)
        throw std::runtime_error("gaussianity needs at least 10000 samples");
    if (loaded.config.num_users < 2)
        throw std::runtime_error("gaussianity needs at least two users for the cross gain");

    const fs::path out_dir(loaded.options.out_dir);
    fs::create_directories(out_dir);

    const SystemConfig &config = loaded.config;
    const Drop drop = generate_drop(config, 0);
    const NormalizedSnrs snrs = normalized_snrs(config);
    const EstimationStats stats =
        EstimationStats::make(drop.beta, double(config.ul_pilot_len), snrs.rho_up);
    RealMatrix eta;
    if (loaded.options.policy == PcPolicy::maxmin)
        eta = maxmin_eta(drop.beta, stats.gamma, snrs.rho_d).coeffs.eta;
    else
        eta = uniform_eta(stats.gamma).eta;

    const GaussianityReport report =
        gaussianity_diagnostic(config, drop, eta, num_samples, 0, /*collect_samples=*/true);

    // Histogram of Re(a_kk) for user 0 against its normal reference.
    const Histogram hist_own = build_histogram(report.akk_re_samples, num_bins);
    std::vector<double> ref_own(hist_own.centers.size());
    const double sd_own = std::sqrt(report.ref_var[0]);
    for (std::size_t b = 0; b < ref_own.size(); ++b)
        ref_own[b] = normal_pdf(hist_own.centers[b], report.ref_mean[0], sd_own);
    write_histogram_csv((out_dir / "hist_akk.csv").string(), hist_own, ref_own);

    // Histogram of Re(a_01) against CN(0, varsigma_01)'s real marginal.
    std::vector<double> cross_re(report.cross_samples.size());
    for (std::size_t s = 0; s < cross_re.size(); ++s)
        cross_re[s] = report.cross_samples[s].real();
    const Histogram hist_cross = build_histogram(cross_re, num_bins);
    std::vector<double> ref_cross(hist_cross.centers.size());
    const double sd_cross = std::sqrt(report.varsigma(0, 1) / 2.0);
    for (std::size_t b = 0; b < ref_cross.size(); ++b)
        ref_cross[b] = normal_pdf(hist_cross.centers[b], 0.0, sd_cross);
    write_histogram_csv((out_dir / "hist_cross.csv").string(), hist_cross, ref_cross);

    write_json((out_dir / "gaussianity.json").string(), gaussianity_json(report));

    RunManifest manifest;
    manifest.config_path = flags.config_path;
    manifest.out_dir = out_dir.string();
    manifest.subcommand = "gaussianity";
    manifest.resolved_config = config_to_json(loaded.config);
    manifest.resolved_options = options_to_json(loaded.options);
    manifest.resolved_options["gaussianity_samples"] = num_samples;
    manifest.seed = loaded.config.rng_seed;
    write_manifest_json((out_dir / "manifest.json").string(), manifest);

    std::cout << "wrote hist_akk.csv, hist_cross.csv, gaussianity.json in " << out_dir.string()
              << "\n";
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"cell-free massive MIMO downlink simulator"};
    app.require_subcommand(1);

    RunFlags run_flags;
    auto *run = app.add_subcommand("run", "run an experiment and write samples + summary");
    run->add_option("config", run_flags.config_path, "JSON config file")->required();
    run->add_option("--modes", run_flags.modes,
                    "comma-separated CSI modes (statistical,beamforming_training,perfect)");
    run->add_option("--power-control", run_flags.power_control, "uniform or maxmin");
    run->add_option("--out", run_flags.out_dir, "output directory");
    std::uint64_t seed_value = 0;
    auto *seed_opt = run->add_option("--seed", seed_value, "RNG seed override");
    int threads_value = 0, drops_value = 0, samples_value = 0;
    auto *threads_opt = run->add_option("--threads", threads_value, "worker thread cap");
    auto *drops_opt = run->add_option("--drops", drops_value, "number of drops override");
    auto *samples_opt =
        run->add_option("--samples", samples_value, "channel samples per drop override");

    std::string cdf_samples, cdf_mode, cdf_out = "cdf.csv";
    auto *cdf = app.add_subcommand("cdf", "emit (throughput, cdf) points from a samples file");
    cdf->add_option("samples", cdf_samples, "samples.csv from a run")->required();
    cdf->add_option("--mode", cdf_mode, "CSI mode to select")->required();
    cdf->add_option("--out", cdf_out, "output CSV path");

    RunFlags gauss_flags;
    int gauss_samples = 100000, gauss_bins = 60;
    auto *gauss = app.add_subcommand("gaussianity",
                                     "effective-gain Gaussianity diagnostic and histograms");
    gauss->add_option("config", gauss_flags.config_path, "JSON config file")->required();
    gauss->add_option("--out", gauss_flags.out_dir, "output directory");
    gauss->add_option("--samples", gauss_samples, "number of gain realizations");
    gauss->add_option("--bins", gauss_bins, "histogram bins");
    gauss->add_option("--power-control", gauss_flags.power_control, "uniform or maxmin");
    std::uint64_t gauss_seed = 0;
    auto *gauss_seed_opt = gauss->add_option("--seed", gauss_seed, "RNG seed override");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (*seed_opt)
                run_flags.seed = seed_value;
            if (*threads_opt)
                run_flags.threads = threads_value;
            if (*drops_opt)
                run_flags.drops = drops_value;
            if (*samples_opt)
                run_flags.samples = samples_value;
            return cmd_run(run_flags);
        }
        if (cdf->parsed())
            return cmd_cdf(cdf_samples, cdf_mode, cdf_out);
        if (gauss->parsed()) {
            if (*gauss_seed_opt)
                gauss_flags.seed = gauss_seed;
            return cmd_gaussianity(gauss_flags, gauss_samples, gauss_bins);
        }
    } catch (const SolverError &ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    } catch (const std::exception &ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
