// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include "clcp/overhead.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "clcp/ru_tree.hpp"
#include "clcp/scheduler.hpp"

namespace clcp {

const char* sim_mode_name(SimMode m) {
    switch (m) {
        case SimMode::Baseline: return "baseline";
        case SimMode::Crossband: return "crossband";
        case SimMode::Clcp: return "clcp";
        case SimMode::Oracle: return "oracle";
    }
    return "?";
}

SimMode sim_mode_from_name(const char* name) {
    if (std::strcmp(name, "baseline") == 0) return SimMode::Baseline;
    if (std::strcmp(name, "crossband") == 0) return SimMode::Crossband;
    if (std::strcmp(name, "clcp") == 0) return SimMode::Clcp;
    if (std::strcmp(name, "oracle") == 0) return SimMode::Oracle;
    throw std::invalid_argument(std::string("unknown mode: ") + name);
}

std::uint64_t FrameBudget::control_airtime_us(int bytes) const {
    const double payload_us = bytes * 8.0 / (control_rate_bps / 1e6);
    return static_cast<std::uint64_t>(preamble_us) +
           static_cast<std::uint64_t>(std::ceil(payload_us));
}

double feedback_bits(const FeedbackConfig& cfg) {
    if (cfg.subcarrier_group < 1) throw std::invalid_argument("feedback_bits: group must be >= 1");
    if (!(cfg.feedback_period_s > 0.0))
        throw std::invalid_argument("feedback_bits: feedback period must be > 0");
    return static_cast<double>(cfg.csi_tones) * cfg.csi_bits * cfg.tx_antennas *
           cfg.rx_antennas * cfg.coherence_time_s /
           (static_cast<double>(cfg.subcarrier_group) * cfg.feedback_period_s);
}

namespace {

int max_ofdma_users(int bandwidth_mhz) {
    switch (bandwidth_mhz) {
        case 20: return 9;
        case 40: return 18;
        case 80: return 37;
        case 160: return 74;
    }
    throw std::invalid_argument("max_ofdma_users: unsupported bandwidth");
}

// Airtime of OFDMA rounds where each of `users` stations sends
// `payload_bits` on a 26-tone leaf RU at the feedback MCS. Rounds carry at
// most the per-bandwidth user limit in parallel; payloads longer than the
// maximum packet duration fragment into several PPDUs.
std::uint64_t ofdma_payload_airtime_us(int users, int bandwidth_mhz, double payload_bits,
                                       int mcs_index, const FrameBudget& budget) {
    if (users <= 0 || payload_bits <= 0.0) return 0;
    const McsEntry& mcs = McsTable::builtin().entry(mcs_index);
    const double leaf_rate_bps = ru_rate_bps(26, mcs);
    const int rounds = (users + max_ofdma_users(bandwidth_mhz) - 1) //
                       / max_ofdma_users(bandwidth_mhz);
    const double duration_s = payload_bits / leaf_rate_bps;
    const int fragments =
        std::max(1, static_cast<int>(std::ceil(duration_s / kTMaxTimeS)));
    const double per_fragment_s = duration_s / fragments;
    std::uint64_t total = 0;
    for (int r = 0; r < rounds; ++r)
        for (int f = 0; f < fragments; ++f)
            total += static_cast<std::uint64_t>(budget.preamble_us) +
                     static_cast<std::uint64_t>(std::ceil(per_fragment_s * 1e6)) +
                     static_cast<std::uint64_t>(budget.sifs_us);
    return total;
}

// Pilot rounds for cross-band acquisition: MU-RTS/CTS handshake, trigger,
// then the stations' pilot PPDUs packed into OFDMA rounds.
SoundingCost pilot_cost(int users, int bandwidth_mhz, const FrameBudget& budget) {
    SoundingCost cost;
    if (users <= 0) return cost;
    const int per_round = max_ofdma_users(bandwidth_mhz);
    const int rounds = (users + per_round - 1) / per_round;
    cost.airtime_us += budget.control_airtime_us(budget.mu_rts_bytes) + budget.sifs_us;
    cost.airtime_us += budget.control_airtime_us(budget.cts_bytes) + budget.sifs_us;
    cost.bytes += static_cast<std::uint64_t>(budget.mu_rts_bytes) + budget.cts_bytes;
    for (int r = 0; r < rounds; ++r) {
        const int k = std::min(per_round, users - r * per_round);
        cost.airtime_us += budget.control_airtime_us(budget.tf_bytes(k)) + budget.sifs_us;
        cost.airtime_us += static_cast<std::uint64_t>(budget.pilot_us) + budget.sifs_us;
        cost.bytes += static_cast<std::uint64_t>(budget.tf_bytes(k));
    }
    return cost;
}

}  // namespace

SoundingCost sounding_cost(SimMode mode, int users, int bandwidth_mhz,
                           const FeedbackConfig& fb, const FrameBudget& budget,
                           int unobserved_users) {
    SoundingCost cost;
    switch (mode) {
        case SimMode::Oracle:
            return cost;
        case SimMode::Baseline: {
            // NDP, CSI poll, then the quantized feedback matrices.
            cost.airtime_us += static_cast<std::uint64_t>(budget.ndp_us) + budget.sifs_us;
            cost.airtime_us += budget.control_airtime_us(budget.csi_poll_bytes) + budget.sifs_us;
            cost.bytes += static_cast<std::uint64_t>(budget.csi_poll_bytes);
            const double bits = feedback_bits(fb);
            cost.airtime_us +=
                ofdma_payload_airtime_us(users, bandwidth_mhz, bits, fb.feedback_mcs, budget);
            cost.bytes += static_cast<std::uint64_t>(
                std::ceil(bits / 8.0) * static_cast<double>(users));
            return cost;
        }
        case SimMode::Crossband:
            return pilot_cost(users, bandwidth_mhz, budget);
        case SimMode::Clcp:
            // Prediction rides on existing transmissions; only groups with
            // no observed view fall back to pilots.
            return pilot_cost(unobserved_users, bandwidth_mhz, budget);
    }
    return cost;
}

double sounding_fraction(SimMode mode, int users, int bandwidth_mhz, const FeedbackConfig& fb,
                         const FrameBudget& budget, int unobserved_users) {
    const SoundingCost cost =
        sounding_cost(mode, users, bandwidth_mhz, fb, budget, unobserved_users);
    const double window_us = fb.coherence_time_s * 1e6;
    return std::min(1.0, static_cast<double>(cost.airtime_us) / window_us);
}

}  // namespace clcp
