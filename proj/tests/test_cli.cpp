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

#define CATCH_CONFIG_MAIN
#include <catch2/catch.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef CLI_BINARY
#error "CLI_BINARY must point at the cellfree_sim executable"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("cellfree_cli_" + std::to_string(std::rand()) + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string &name) const { return (path / name).string(); }
};

int run_cli(const std::string &args) {
    const std::string cmd = std::string(CLI_BINARY) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_tiny_config(const std::string &path, int drops = 3) {
    std::ofstream out(path);
    out << R"({"num_aps": 8, "num_users": 2, "num_drops": )" << drops
        << R"(, "num_channel_samples": 40, "rng_seed": 5})";
}

} // namespace

TEST_CASE("run writes samples, summary and manifest") {
    TempDir tmp;
    write_tiny_config(tmp.file("cfg.json"));
    REQUIRE(run_cli("run " + tmp.file("cfg.json") + " --out " + tmp.file("out")) == 0);
    CHECK(fs::exists(tmp.file("out/samples.csv")));
    CHECK(fs::exists(tmp.file("out/summary.json")));
    CHECK(fs::exists(tmp.file("out/manifest.json")));

    json summary;
    std::ifstream(tmp.file("out/summary.json")) >> summary;
    REQUIRE(summary.at("modes").size() == 3);
    int entries = 0;
    for (const auto &mode : summary.at("modes"))
        entries += mode.contains("p05_bit_per_s") + mode.contains("median_bit_per_s");
    CHECK(entries == 6);

    json manifest;
    std::ifstream(tmp.file("out/manifest.json")) >> manifest;
    CHECK(manifest.at("subcommand") == "run");
    CHECK(manifest.at("config").at("num_aps") == 8);
    CHECK(manifest.at("options").at("power_control") == "maxmin");
}

TEST_CASE("mode filter restricts the CSV") {
    TempDir tmp;
    write_tiny_config(tmp.file("cfg.json"));
    REQUIRE(run_cli("run " + tmp.file("cfg.json") + " --modes statistical --out " +
                    tmp.file("out")) == 0);
    std::ifstream in(tmp.file("out/samples.csv"));
    std::string line;
    std::getline(in, line); // header
    int rows = 0;
    while (std::getline(in, line)) {
        CHECK(line.find("statistical") != std::string::npos);
        ++rows;
    }
    CHECK(rows == 3 * 2); // drops x users
}

TEST_CASE("fixed seeds give byte-identical samples") {
    TempDir tmp;
    write_tiny_config(tmp.file("cfg.json"));
    REQUIRE(run_cli("run " + tmp.file("cfg.json") + " --seed 7 --out " + tmp.file("a")) == 0);
    REQUIRE(run_cli("run " + tmp.file("cfg.json") + " --seed 7 --threads 3 --out " +
                    tmp.file("b")) == 0);
    REQUIRE(run_cli("run " + tmp.file("cfg.json") + " --seed 8 --out " + tmp.file("c")) == 0);
    CHECK(slurp(tmp.file("a/samples.csv")) == slurp(tmp.file("b/samples.csv")));
    CHECK(slurp(tmp.file("a/samples.csv")) != slurp(tmp.file("c/samples.csv")));
}

TEST_CASE("run rejects broken configs") {
    TempDir tmp;
    std::ofstream(tmp.file("bad.json")) << R"({"num_aps": 2, "num_users": 5})";
    CHECK(run_cli("run " + tmp.file("bad.json") + " --out " + tmp.file("out")) != 0);
    CHECK(run_cli("run " + tmp.file("nonexistent.json")) != 0);
}

TEST_CASE("cdf subcommand") {
    TempDir tmp;
    write_tiny_config(tmp.file("cfg.json"));
    REQUIRE(run_cli("run " + tmp.file("cfg.json") + " --modes statistical,beamforming_training" +
                    " --out " + tmp.file("out")) == 0);
    const std::string samples = tmp.file("out/samples.csv");

    SECTION("writes monotone points ending at 1") {
        REQUIRE(run_cli("cdf " + samples + " --mode statistical --out " + tmp.file("cdf.csv")) ==
                0);
        std::ifstream in(tmp.file("cdf.csv"));
        std::string line;
        std::getline(in, line);
        CHECK(line == "net_throughput_bit_per_s,cdf");
        double prev = -1.0, last = 0.0;
        int points = 0;
        while (std::getline(in, line)) {
            const auto comma = line.find(',');
            const double p = std::stod(line.substr(comma + 1));
            CHECK(p > prev);
            prev = p;
            last = p;
            ++points;
        }
        CHECK(points <= 3 * 2);
        CHECK(last == 1.0);
    }

    SECTION("unknown mode rejected") {
        CHECK(run_cli("cdf " + samples + " --mode genie --out " + tmp.file("x.csv")) != 0);
        CHECK_FALSE(fs::exists(tmp.file("x.csv")));
    }

    SECTION("empty filter match is an error, not an empty file") {
        CHECK(run_cli("cdf " + samples + " --mode perfect --out " + tmp.file("y.csv")) != 0);
        CHECK_FALSE(fs::exists(tmp.file("y.csv")));
    }
}

TEST_CASE("gaussianity subcommand emits histograms and stats") {
    TempDir tmp;
    std::ofstream(tmp.file("cfg.json"))
        << R"({"num_aps": 20, "num_users": 5, "num_drops": 1, "num_channel_samples": 1, "rng_seed": 3})";
    REQUIRE(run_cli("gaussianity " + tmp.file("cfg.json") + " --samples 10000 --out " +
                    tmp.file("g")) == 0);
    CHECK(fs::exists(tmp.file("g/hist_akk.csv")));
    CHECK(fs::exists(tmp.file("g/hist_cross.csv")));
    CHECK(fs::exists(tmp.file("g/gaussianity.json")));
    CHECK(fs::exists(tmp.file("g/manifest.json")));

    // histogram mass sums to 1
    std::ifstream in(tmp.file("g/hist_akk.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "bin_center,bin_width,mass,empirical_pdf,reference_pdf");
    double mass = 0.0;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string field;
        std::getline(ss, field, ',');
        std::getline(ss, field, ',');
        std::getline(ss, field, ',');
        mass += std::stod(field);
    }
    CHECK(mass == Approx(1.0).margin(1e-9));

    json stats;
    std::ifstream(tmp.file("g/gaussianity.json")) >> stats;
    CHECK(stats.at("num_samples") == 10000);
    CHECK(stats.at("ks_akk").size() == 5);

    // too few samples rejected
    CHECK(run_cli("gaussianity " + tmp.file("cfg.json") + " --samples 100 --out " +
                  tmp.file("g2")) != 0);
}
