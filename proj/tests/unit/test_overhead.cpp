// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include <doctest.h>

#include <initializer_list>

#include "clcp/overhead.hpp"

using namespace clcp;

TEST_SUITE_BEGIN("overhead");

TEST_CASE("feedback matrix formula") {
    FeedbackConfig cfg;
    cfg.csi_tones = 2048;
    cfg.csi_bits = 8;
    cfg.tx_antennas = 1;
    cfg.rx_antennas = 4;
    cfg.coherence_time_s = 15e-3;
    cfg.feedback_period_s = 15e-3;
    cfg.subcarrier_group = 4;
    CHECK(feedback_bits(cfg) == doctest::Approx(16384.0));  // 2048 bytes

    FeedbackConfig g1 = cfg;
    g1.subcarrier_group = 1;
    CHECK(feedback_bits(g1) == doctest::Approx(4.0 * feedback_bits(cfg)));

    FeedbackConfig fast = cfg;
    fast.feedback_period_s = cfg.feedback_period_s / 2.0;
    CHECK(feedback_bits(fast) == doctest::Approx(2.0 * feedback_bits(cfg)));

    FeedbackConfig bad = cfg;
    bad.feedback_period_s = 0.0;
    CHECK_THROWS(feedback_bits(bad));
}

TEST_CASE("trigger frame grows affinely with the user count") {
    FrameBudget b;
    CHECK(b.tf_bytes(74) == 398);
    CHECK(b.ba_bytes(74) == 22 + 5 * 74);
    CHECK(b.tf_bytes(10) - b.tf_bytes(9) == 5);
}

TEST_CASE("baseline packs feedback into per-bandwidth OFDMA rounds") {
    FeedbackConfig fb;
    fb.csi_tones = 2048;
    FrameBudget budget;
    const auto fixed = sounding_cost(SimMode::Baseline, 0, 160, fb, budget);
    const auto one = sounding_cost(SimMode::Baseline, 74, 160, fb, budget);
    const auto two = sounding_cost(SimMode::Baseline, 148, 160, fb, budget);
    const auto round_us = one.airtime_us - fixed.airtime_us;
    CHECK(round_us > 0);
    // 74 users fit one round at 160 MHz; 148 need exactly two.
    CHECK(two.airtime_us == fixed.airtime_us + 2 * round_us);
    const auto seventy_five = sounding_cost(SimMode::Baseline, 75, 160, fb, budget);
    CHECK(seventy_five.airtime_us == fixed.airtime_us + 2 * round_us);
}

TEST_CASE("clcp with all groups observed costs nothing") {
    FeedbackConfig fb;
    FrameBudget budget;
    CHECK(sounding_cost(SimMode::Clcp, 64, 20, fb, budget, 0).airtime_us == 0);
    CHECK(sounding_cost(SimMode::Clcp, 64, 20, fb, budget, 8).airtime_us > 0);
    CHECK(sounding_cost(SimMode::Oracle, 64, 20, fb, budget).airtime_us == 0);
}

TEST_CASE("baseline overhead fraction is monotone in the formula inputs") {
    FrameBudget budget;
    FeedbackConfig fb;
    fb.csi_tones = 256;
    auto frac = [&](int users, FeedbackConfig f) {
        return sounding_fraction(SimMode::Baseline, users, 20, f, budget);
    };
    // Non-decreasing in users, bits, tones.
    CHECK(frac(32, fb) <= frac(64, fb));
    FeedbackConfig more_bits = fb;
    more_bits.csi_bits = 16;
    CHECK(frac(32, fb) <= frac(32, more_bits));
    FeedbackConfig more_tones = fb;
    more_tones.csi_tones = 512;
    CHECK(frac(32, fb) <= frac(32, more_tones));
    // Non-increasing in grouping and feedback period.
    FeedbackConfig grouped = fb;
    grouped.subcarrier_group = 8;
    CHECK(frac(32, grouped) <= frac(32, fb));
    FeedbackConfig slower = fb;
    slower.feedback_period_s = fb.feedback_period_s * 2.0;
    CHECK(frac(32, slower) <= frac(32, fb));
}

TEST_CASE("mode names round-trip") {
    for (SimMode m : {SimMode::Baseline, SimMode::Crossband, SimMode::Clcp, SimMode::Oracle})
        CHECK(sim_mode_from_name(sim_mode_name(m)) == m);
    CHECK_THROWS(sim_mode_from_name("bogus"));
}

TEST_SUITE_END();
