// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "clcp/mac_sim.hpp"
#include "clcp/metrics_io.hpp"

using namespace clcp;

namespace {

SimConfig small_sim(SimMode mode, int users, std::uint64_t seed) {
    SimConfig cfg;
    cfg.mode = mode;
    cfg.bandwidth_mhz = 20;
    cfg.users = users;
    cfg.ap_antennas = 2;
    cfg.traffic_bps_per_user = 3e6;
    cfg.duration_s = 1.0;
    cfg.seed = seed;
    cfg.reflectors = 2;
    cfg.room.lo = {0.0, 0.0, 0.0};
    cfg.room.hi = {12.0, 10.0, 3.0};
    if (mode == SimMode::Clcp) cfg.oracle_predictor = true;
    return cfg;
}

std::string fingerprint(const SimMetrics& m) {
    std::ostringstream ss;
    ss << m.delivered_bits << '|' << m.offered_bits << '|' << m.duration_us << '|'
       << m.control_us << '|' << m.data_us << '|' << m.sounding_us << '|' << m.idle_us;
    for (const auto& u : m.users)
        ss << '|' << u.delivered_bytes << ':' << u.wake_count << ':' << u.awake_us;
    for (const auto& w : m.windows) ss << '|' << w.throughput_bps << ':' << w.sounding_fraction;
    return ss.str();
}

}  // namespace

TEST_SUITE_BEGIN("mac-sim");

TEST_CASE("uncontended oracle delivers the offered load") {
    SimConfig cfg = small_sim(SimMode::Oracle, 1, 3);
    cfg.traffic_bps_per_user = 1e6;
    cfg.duration_s = 2.0;
    const SimMetrics m = run_simulation(cfg);
    CHECK(m.delivered_bits > 0);
    const double delivered = static_cast<double>(m.delivered_bits);
    const double offered = static_cast<double>(m.offered_bits);
    CHECK(delivered >= 0.99 * offered * (1.0 - 0.02));  // within 1% of offered (minus tail)
    CHECK(delivered <= offered);
}

TEST_CASE("identical seeds give identical metrics") {
    for (SimMode mode : {SimMode::Baseline, SimMode::Oracle, SimMode::Clcp}) {
        const SimMetrics a = run_simulation(small_sim(mode, 6, 42));
        const SimMetrics b = run_simulation(small_sim(mode, 6, 42));
        CHECK(fingerprint(a) == fingerprint(b));
    }
    const SimMetrics c = run_simulation(small_sim(SimMode::Oracle, 6, 43));
    CHECK(fingerprint(c) != fingerprint(run_simulation(small_sim(SimMode::Oracle, 6, 42))));
}

TEST_CASE("airtime conservation holds exactly") {
    for (SimMode mode : {SimMode::Baseline, SimMode::Crossband, SimMode::Oracle, SimMode::Clcp}) {
        SimConfig cfg = small_sim(mode, 4, 7);
        cfg.duration_s = 0.5;
        const SimMetrics m = run_simulation(cfg);
        CHECK(m.control_us + m.data_us + m.sifs_us + m.idle_us == m.duration_us);
        CHECK(m.duration_us >= 500000);
        CHECK(m.sounding_us <= m.control_us);
    }
}

TEST_CASE("throughput never exceeds the PHY ceiling") {
    SimConfig cfg = small_sim(SimMode::Oracle, 8, 9);
    cfg.traffic_bps_per_user = 50e6;  // saturate
    const SimMetrics m = run_simulation(cfg);
    const RuTree tree = build_ru_tree(20);
    const double best_bits_per_tone = McsTable::builtin().entry(11).bits_per_tone;
    const double ceiling_bps = tree.usable_tones * best_bits_per_tone / kSymbolDurationS;
    CHECK(static_cast<double>(m.delivered_bits) * 1e6 / m.duration_us < ceiling_bps);
    for (const auto& u : m.users) CHECK(u.delivered_bytes <= u.offered_bytes);
}

TEST_CASE("baseline wakes everyone every coherence interval; clcp does not") {
    SimConfig base_cfg = small_sim(SimMode::Baseline, 6, 11);
    const SimMetrics base = run_simulation(base_cfg);
    const int rounds = static_cast<int>(base_cfg.duration_s / base_cfg.coherence_time_s);
    for (const auto& u : base.users) CHECK(u.wake_count >= rounds - 1);

    const SimMetrics clcp = run_simulation(small_sim(SimMode::Clcp, 6, 11));
    CHECK(clcp.sounding_us < base.sounding_us);

    std::uint64_t base_wakes = 0, clcp_wakes = 0;
    for (const auto& u : base.users) base_wakes += u.wake_count;
    for (const auto& u : clcp.users) clcp_wakes += u.wake_count;
    CHECK(clcp_wakes < base_wakes);

    // Energy proxy comparison via the event-log accountant.
    const auto base_twt = twt_account(base.events, base.duration_us, 6);
    const auto clcp_twt = twt_account(clcp.events, clcp.duration_us, 6);
    double base_energy = 0.0, clcp_energy = 0.0;
    for (const auto& t : base_twt) base_energy += t.energy_proxy_mj;
    for (const auto& t : clcp_twt) clcp_energy += t.energy_proxy_mj;
    CHECK(clcp_energy < base_energy);
}

TEST_CASE("twt accountant matches the inline counters and handles idle users") {
    const SimMetrics m = run_simulation(small_sim(SimMode::Baseline, 5, 13));
    const auto twt = twt_account(m.events, m.duration_us, 5);
    for (int u = 0; u < 5; ++u) {
        CHECK(twt[u].wake_count == m.users[u].wake_count);
        CHECK(twt[u].awake_us == m.users[u].awake_us);
        CHECK(twt[u].sleep_fraction == doctest::Approx(m.users[u].sleep_fraction));
    }
    // A user that never appears in any event has zero wakes, full sleep.
    std::vector<SimEvent> events;
    SimEvent ev;
    ev.t_us = 0;
    ev.kind = "data";
    ev.airtime_us = 1000;
    ev.participants = {0};
    events.push_back(ev);
    const auto solo = twt_account(events, 10000, 2);
    CHECK(solo[0].wake_count == 1);
    CHECK(solo[1].wake_count == 0);
    CHECK(solo[1].sleep_fraction == doctest::Approx(1.0));
}

TEST_CASE("opportunistic observation maps packet RUs to groups") {
    const RuTree tree = build_ru_tree(20);
    Schedule packet;
    ScheduleEntry e1;
    e1.node_id = tree.leaves[0];
    e1.user_ids = {3};
    ScheduleEntry e2;
    e2.node_id = tree.leaves[1];
    e2.user_ids = {4};
    ScheduleEntry e3;
    e3.node_id = tree.leaves[2];
    e3.user_ids = {6};
    packet.entries = {e1, e2, e3};

    const std::vector<std::vector<int>> groups = {{3, 4, 6}, {1, 2, 5}};
    const auto observed = opportunistic_observe(packet, tree, groups);
    REQUIRE(observed.count(0) == 1);
    CHECK(observed.at(0).size() == 3);
    CHECK(observed.count(1) == 0);  // flagged for pilot fallback
    for (const auto& v : observed.at(0)) {
        const RuNode& n = tree.node(tree.leaves[0]);
        CHECK(v.span_tones == n.span_tones);
    }

    const auto none = opportunistic_observe(Schedule{}, tree, groups);
    CHECK(none.empty());
}

TEST_CASE("clcp mode without a model is rejected") {
    SimConfig cfg = small_sim(SimMode::Clcp, 4, 17);
    cfg.oracle_predictor = false;
    cfg.groups = {{0, 1, 2, 3}};
    CHECK_THROWS(run_simulation(cfg));
}

TEST_CASE("metrics files are written with the documented schemas") {
    const SimMetrics m = run_simulation(small_sim(SimMode::Oracle, 3, 19));
    write_metrics_csv(m, "metrics_test.csv");
    write_summary_json(m, "summary_test.json");
    write_events_ndjson(m, "events_test.ndjson");

    std::ifstream csv("metrics_test.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "window_start_ms,mode,throughput_bps,sounding_fraction");
    int rows = 0;
    std::string line;
    while (std::getline(csv, line))
        if (!line.empty()) ++rows;
    CHECK(rows == static_cast<int>(m.windows.size()));
    std::remove("metrics_test.csv");
    std::remove("summary_test.json");
    std::remove("events_test.ndjson");
}

TEST_SUITE_END();
