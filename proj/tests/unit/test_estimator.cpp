// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include <doctest.h>

#include <cmath>

#include "clcp/channel.hpp"
#include "clcp/estimator.hpp"
#include "test_util.hpp"

using namespace clcp;

TEST_SUITE_BEGIN("estimator");

TEST_CASE("single-path round trip within refinement tolerances") {
    const SubcarrierGrid g = SubcarrierGrid::for_bandwidth(20, 2);
    PathSet truth;
    truth.paths = {{1.0, 5.0, 0.8, 0.3}};
    const Csi csi = synthesize_csi(truth, g);
    const PathSet est = estimate_paths(csi);
    REQUIRE(est.size() >= 1);
    const Path& p = est.paths[0];
    CHECK(std::abs(p.theta - 1.0) < 0.01);
    CHECK(std::abs(p.d - 5.0) < 0.05);
    CHECK(std::abs(p.a - 0.8) / 0.8 < 0.01);
    CHECK(std::abs(wrap_phase(p.phi - 0.3)) < 0.02);
}

TEST_CASE("zero channel yields an empty path set") {
    const SubcarrierGrid g = test::tiny_grid(2, 32);
    const Csi zero = Csi::zeros(g);
    CHECK(estimate_paths(zero).empty());
}

TEST_CASE("empty observation mask rejected") {
    const SubcarrierGrid g = test::tiny_grid(1, 16);
    Csi csi = Csi::zeros(g);
    std::fill(csi.observed.begin(), csi.observed.end(), 0);
    CHECK_THROWS(estimate_paths(csi));
}

TEST_CASE("residual power identities") {
    Rng rng(41);
    const SubcarrierGrid g = SubcarrierGrid::for_bandwidth(20, 1);
    const PathSet ps = test::random_pathset(rng, 3, 16.0, 55.0);
    const Csi csi = synthesize_csi(ps, g);
    CHECK(residual_power(csi, ps) < 1e-20);
    PathSet empty;
    CHECK(residual_power(csi, empty) == doctest::Approx(1.0));
    const Csi zero = Csi::zeros(g);
    CHECK_THROWS(residual_power(zero, ps));
}

TEST_CASE("removing one of two orthogonal equal paths leaves half the power") {
    // Delay separation of c/(S*delta_f) makes the delay vectors exactly
    // orthogonal over the uniform frequency grid.
    const SubcarrierGrid g = test::tiny_grid(1, 64);
    const double ortho_sep = kSpeedOfLight / (g.subcarriers * g.delta_f_hz);
    PathSet both;
    both.paths = {{1.5707963267948966, 10.0, 0.5, 0.0},
                  {1.5707963267948966, 10.0 + ortho_sep, 0.5, 0.0}};
    PathSet one;
    one.paths = {both.paths[0]};
    const Csi csi = synthesize_csi(both, g);
    CHECK(residual_power(csi, one) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("round-trip property for separated random path sets") {
    Rng rng(42);
    const SubcarrierGrid g = SubcarrierGrid::for_bandwidth(20, 2);
    EstimatorConfig cfg;
    const double sep = 2.0 * kSpeedOfLight / (2.0 * g.bandwidth_hz());
    int hits = 0;
    const int trials = 20;
    for (int t = 0; t < trials; ++t) {
        const int n = 1 + static_cast<int>(rng.uniform_int(4));
        const PathSet truth = test::random_pathset(rng, n, sep, 55.0);
        const Csi csi = synthesize_csi(truth, g);
        const PathSet est = estimate_paths(csi, cfg);
        if (residual_power(csi, est) <= 1e-3) ++hits;
    }
    CHECK(hits >= trials - 1);
}

TEST_CASE("estimates are frequency independent across half-bands") {
    const SubcarrierGrid g = SubcarrierGrid::for_bandwidth(20, 2);
    PathSet truth;
    truth.paths = {{0.8, 12.0, 0.9, -0.7}};
    const Csi csi = synthesize_csi(truth, g);

    Csi lower = csi, upper = csi;
    for (int s = 0; s < g.subcarriers; ++s) {
        lower.observed[s] = s < g.subcarriers / 2;
        upper.observed[s] = s >= g.subcarriers / 2;
    }
    const PathSet el = estimate_paths(lower);
    const PathSet eu = estimate_paths(upper);
    REQUIRE(el.size() >= 1);
    REQUIRE(eu.size() >= 1);
    CHECK(std::abs(el.paths[0].theta - eu.paths[0].theta) < 0.02);
    CHECK(std::abs(el.paths[0].d - eu.paths[0].d) < 0.1);
    CHECK(std::abs(el.paths[0].theta - 0.8) < 0.02);
    CHECK(std::abs(el.paths[0].d - 12.0) < 0.1);
}

TEST_CASE("residual power is non-increasing over the greedy iterations") {
    Rng rng(43);
    const SubcarrierGrid g = SubcarrierGrid::for_bandwidth(20, 2);
    for (int trial = 0; trial < 5; ++trial) {
        const PathSet truth = test::random_pathset(rng, 4, 16.0, 58.0);
        const Csi csi = synthesize_csi(truth, g);
        std::vector<double> trajectory;
        estimate_paths(csi, {}, &trajectory);
        REQUIRE(trajectory.size() >= 2);
        double prev = 1.0;
        for (double r : trajectory) {
            CHECK(r <= prev + 1e-12);
            prev = r;
        }
    }
}

TEST_CASE("partial-band observation reconstructs the full band at 30 dB") {
    Rng rng(44);
    const SubcarrierGrid g = SubcarrierGrid::for_bandwidth(160, 2);
    PathSet truth;
    truth.paths = {{1.2, 4.0, 0.9, 0.5}, {0.6, 24.0, 0.5, -1.0}, {2.2, 47.0, 0.35, 2.0}};
    const Csi clean = synthesize_csi(truth, g);

    Csi observed = clean;
    test::add_noise(observed, 30.0, rng);
    // One 242-tone RU out of 2048 subcarriers.
    std::fill(observed.observed.begin(), observed.observed.end(), 0);
    for (int s = 700; s < 700 + 242; ++s) observed.observed[s] = 1;

    const PathSet est = estimate_paths(observed);
    Csi resynth = Csi::zeros(g);
    for (const auto& p : est.paths) accumulate_path(resynth, p);
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < clean.values.size(); ++i) {
        err += std::norm(resynth.values[i] - clean.values[i]);
        ref += std::norm(clean.values[i]);
    }
    CHECK(10.0 * std::log10(err / ref) <= -20.0);
}

TEST_CASE("estimator config validation") {
    EstimatorConfig bad;
    bad.max_paths = 0;
    CHECK_THROWS(bad.validate());
    bad = {};
    bad.residual_stop = 1.5;
    CHECK_THROWS(bad.validate());
    bad = {};
    bad.angle_grid_step = 0.0;
    CHECK_THROWS(bad.validate());
}

TEST_SUITE_END();
