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

#include <catch2/catch.hpp>

#include <cmath>

#include "helpers.hpp"

using namespace cellfree;

TEST_CASE("noise power for the default scenario") {
    SystemConfig config;
    config.bandwidth_hz = 20e6;
    config.noise_figure_db = 9.0;
    // 20 MHz * k_B * 290 K * 10^0.9 = 6.3608e-13 W
    CHECK(noise_power(config) == Approx(6.3608e-13).epsilon(1e-4));

    config.bandwidth_hz = 1.0;
    config.noise_figure_db = 0.0;
    CHECK(noise_power(config) == Approx(4.003882e-21).epsilon(1e-6));
}

TEST_CASE("noise power is exactly linear in bandwidth") {
    SystemConfig config;
    config.bandwidth_hz = 17.5e6;
    const double base = noise_power(config);
    config.bandwidth_hz *= 2.0;
    CHECK(noise_power(config) == 2.0 * base);
}

TEST_CASE("noise power rejects bad inputs") {
    SystemConfig config;
    config.bandwidth_hz = 0.0;
    CHECK_THROWS_AS(noise_power(config), std::invalid_argument);
    config.bandwidth_hz = 1.0;
    config.noise_figure_db = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(noise_power(config), std::invalid_argument);
}

TEST_CASE("normalized SNR") {
    const double noise = 6.3608e-13;
    CHECK(normalized_snr(0.2, noise) == Approx(3.1443e11).epsilon(1e-3));
    CHECK(normalized_snr(0.1, noise) == Approx(1.5722e11).epsilon(1e-3));
    CHECK(normalized_snr(0.0, noise) == 0.0);
    CHECK_THROWS_AS(normalized_snr(0.2, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(normalized_snr(0.2, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(normalized_snr(-0.1, noise), std::invalid_argument);
    // ~114.97 dB for the default AP power
    CHECK(10.0 * std::log10(normalized_snr(0.2, noise)) == Approx(114.97).margin(0.01));
}

TEST_CASE("wrapped distance basics") {
    CHECK(wrapped_distance({0, 0}, {990, 0}, 1000) == Approx(10.0));
    CHECK(wrapped_distance({123, 456}, {123, 456}, 1000) == 0.0);
    CHECK(wrapped_distance({0, 0}, {990, 990}, 1000) == Approx(std::sqrt(200.0)));
}

// Brute force over the nine translated images of q.
static double nine_image_distance(const Point &p, const Point &q, double side) {
    double best = std::numeric_limits<double>::infinity();
    for (int ix = -1; ix <= 1; ++ix)
        for (int iy = -1; iy <= 1; ++iy)
            best = std::min(best, std::hypot(p.x - (q.x + ix * side), p.y - (q.y + iy * side)));
    return best;
}

TEST_CASE("wrapped distance equals the nine-image minimum") {
    RngStream rng(3, 0, 0, StreamRole::generic);
    const double side = 1000.0;
    for (int i = 0; i < 500; ++i) {
        const Point p{rng.uniform(0, side), rng.uniform(0, side)};
        const Point q{rng.uniform(0, side), rng.uniform(0, side)};
        const double d = wrapped_distance(p, q, side);
        CHECK(d == Approx(nine_image_distance(p, q, side)).margin(1e-9));
        CHECK(d == Approx(wrapped_distance(q, p, side)));
        CHECK(d <= side / std::sqrt(2.0) + 1e-9);
        if (std::abs(p.x - q.x) <= side / 2 && std::abs(p.y - q.y) <= side / 2)
            CHECK(d == Approx(std::hypot(p.x - q.x, p.y - q.y)));
    }
}

TEST_CASE("drops are deterministic and land inside the square") {
    const SystemConfig config = testutil::tiny_config();
    const Drop a = generate_drop(config, 0);
    const Drop b = generate_drop(config, 0);
    REQUIRE(a.ap_positions.size() == 4);
    REQUIRE(a.user_positions.size() == 2);
    for (std::size_t i = 0; i < a.ap_positions.size(); ++i) {
        CHECK(a.ap_positions[i].x == b.ap_positions[i].x);
        CHECK(a.ap_positions[i].y == b.ap_positions[i].y);
        CHECK(a.ap_positions[i].x >= 0.0);
        CHECK(a.ap_positions[i].x < config.area_side_m);
        CHECK(a.ap_positions[i].y >= 0.0);
        CHECK(a.ap_positions[i].y < config.area_side_m);
    }
    CHECK(a.beta == b.beta);
    const Drop c = generate_drop(config, 1);
    CHECK(!(a.beta == c.beta));
}

TEST_CASE("drop coordinates average to the square center") {
    SystemConfig config = testutil::tiny_config();
    config.num_aps = 2;
    config.num_users = 1;
    config.ul_pilot_len = config.dl_pilot_len = 1;
    double sum = 0.0;
    std::size_t count = 0;
    for (std::uint32_t d = 0; d < 100000; ++d) {
        // positions only; the beta fill is exercised elsewhere
        RngStream geom(config.rng_seed, d, 0, StreamRole::geometry);
        for (int i = 0; i < 2 * (config.num_aps + config.num_users); ++i) {
            sum += geom.uniform(0.0, config.area_side_m);
            ++count;
        }
    }
    CHECK(sum / double(count) == Approx(config.area_side_m / 2).epsilon(0.01));
}

TEST_CASE("config validation rejects broken scenarios") {
    SystemConfig config = testutil::tiny_config();
    config.num_aps = 2;
    config.num_users = 2; // M > K violated
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);

    config = testutil::tiny_config();
    config.ul_pilot_len = 1; // < K
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);

    config = testutil::tiny_config();
    config.ul_pilot_len = 150;
    config.dl_pilot_len = 60; // sum >= tau
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);

    config = testutil::tiny_config();
    config.ap_power_w = 0.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);

    CHECK_NOTHROW(testutil::tiny_config().validate());
}

TEST_CASE("config fingerprint tracks field changes") {
    SystemConfig a = testutil::tiny_config();
    SystemConfig b = a;
    CHECK(config_fingerprint(a) == config_fingerprint(b));
    b.rng_seed += 1;
    CHECK(config_fingerprint(a) != config_fingerprint(b));
}
