// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clcp/environment.hpp"
#include "clcp/estimator.hpp"
#include "clcp/impairments.hpp"
#include "clcp/model.hpp"
#include "clcp/overhead.hpp"
#include "clcp/ru_tree.hpp"
#include "clcp/scheduler.hpp"

namespace clcp {

// Trace-style uplink OFDMA simulation. Each round the AP refreshes outdated
// channel knowledge using the configured acquisition mode, schedules with
// the SRA pipeline, transmits, and accounts every microsecond of airtime.
struct SimConfig {
    SimMode mode = SimMode::Baseline;
    int bandwidth_mhz = 20;
    int users = 8;
    int ap_antennas = 2;          // N_T (receive antennas at the AP)
    int user_antennas = 1;        // N_R
    double traffic_bps_per_user = 5e6;
    double coherence_time_s = 15e-3;  // T_c: CSI older than this is refreshed
    double duration_s = 2.0;
    std::uint64_t seed = 1;
    double tx_power = 1.0;
    double noise_power = 4e-4;
    double t_min_time_s = kDefaultTMinTimeS;
    std::uint64_t idle_step_us = 500;

    FeedbackConfig feedback;  // csi_tones/rx_antennas filled from the grid
    FrameBudget budget;
    EstimatorConfig estimator;
    ImpairmentConfig impairments;
    // Measurement impairments + compensation on acquired CSI. Off by
    // default: the compensation pipeline pins the per-subcarrier phase to
    // receive antenna 0, which removes the absolute delay structure the
    // path estimator consumes, so impaired acquisition is an ablation mode.
    bool measure_impairments = false;

    // Environment: explicit config, or generated (users + reflectors).
    std::optional<EnvironmentConfig> environment;
    int reflectors = 3;
    RoomBox room;

    // clcp mode: proximity groups (auto-formed when empty) and one model per
    // multi-link group, keyed by group index. oracle_predictor substitutes
    // perfect predictions while keeping the acquisition accounting.
    std::vector<std::vector<int>> groups;
    std::map<int, const ClcpModel*> group_models;
    bool oracle_predictor = false;

    DqOptions dq;
    double group_radius_m = 4.0;
};

struct WindowMetric {
    std::uint64_t start_ms = 0;
    double throughput_bps = 0.0;
    double sounding_fraction = 0.0;
};

struct UserMetric {
    int user = 0;
    std::uint64_t offered_bytes = 0;
    std::uint64_t delivered_bytes = 0;
    int wake_count = 0;
    std::uint64_t awake_us = 0;
    std::uint64_t tx_us = 0;
    double sleep_fraction = 1.0;
};

struct EvmRecord {
    std::uint64_t t_us = 0;
    int link = 0;
    double evm_db = 0.0;
};

struct PerRecord {
    std::uint64_t t_us = 0;
    int user = 0;
    int mcs = 0;
    double per = 0.0;
    bool success = false;
};

// One timeline event; the audit log serializes these as NDJSON.
struct SimEvent {
    std::uint64_t t_us = 0;
    std::string kind;  // "acquisition" or "data"
    std::uint64_t airtime_us = 0;
    std::uint64_t sounding_us = 0;
    std::uint64_t data_us = 0;
    std::uint64_t control_us = 0;
    std::uint64_t sifs_us = 0;
    std::vector<int> participants;  // users that transmitted anything
};

struct SimMetrics {
    SimMode mode = SimMode::Baseline;
    std::uint64_t duration_us = 0;  // actual simulated time (>= configured)
    std::uint64_t control_us = 0;
    std::uint64_t data_us = 0;
    std::uint64_t sifs_us = 0;
    std::uint64_t idle_us = 0;
    std::uint64_t sounding_us = 0;  // subset of the above, attributed to sounding
    std::uint64_t delivered_bits = 0;
    std::uint64_t offered_bits = 0;

    std::vector<WindowMetric> windows;  // 500 ms granularity
    std::vector<UserMetric> users;
    std::vector<EvmRecord> evm_records;
    std::vector<PerRecord> per_records;
    std::vector<SimEvent> events;
};

// Observed views per group from the most recent uplink packet: the links
// present in the packet together with their RU spans. Groups without any
// view are absent from the map (pilot fallback).
struct ObservedView {
    int link = 0;
    int span_start = 0;
    int span_tones = 0;
};
std::map<int, std::vector<ObservedView>> opportunistic_observe(
    const Schedule& last_packet, const RuTree& tree,
    const std::vector<std::vector<int>>& groups);

// Per-user wake counts and sleep fractions recomputed from the event log.
struct TwtAccount {
    int user = 0;
    int wake_count = 0;
    std::uint64_t awake_us = 0;
    double sleep_fraction = 1.0;
    double energy_proxy_mj = 0.0;
};
std::vector<TwtAccount> twt_account(const std::vector<SimEvent>& events,
                                    std::uint64_t duration_us, int user_count,
                                    double tx_power_mw = 135.0, double wake_power_uw = 600.0);

SimMetrics run_simulation(const SimConfig& cfg);

}  // namespace clcp
