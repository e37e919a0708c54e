// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#pragma once

#include <cstdint>

namespace clcp {

enum class SimMode { Baseline, Crossband, Clcp, Oracle };

const char* sim_mode_name(SimMode m);
SimMode sim_mode_from_name(const char* name);

// Control-frame sizes and timing shared by every mode. TF and BlockAck grow
// affinely with the triggered user count K.
struct FrameBudget {
    int bsr_report_bytes = 32;
    int bsr_poll_bytes = 21;
    int csi_poll_bytes = 21;
    int mu_rts_bytes = 20;
    int cts_bytes = 14;
    int tf_base_bytes = 28;   // + 5 per user
    int ba_base_bytes = 22;   // + 5 per user
    int sifs_us = 10;
    double control_rate_bps = 6e6;  // legacy rate for control frames
    int preamble_us = 20;
    int ndp_us = 40;          // sounding NDP airtime
    int pilot_us = 80;        // uplink pilot PPDU for cross-band prediction

    int tf_bytes(int k) const { return tf_base_bytes + 5 * k; }
    int ba_bytes(int k) const { return ba_base_bytes + 5 * k; }

    // Preamble plus payload at the control rate, in whole microseconds.
    std::uint64_t control_airtime_us(int bytes) const;
};

// CSI feedback configuration feeding the overhead formula.
struct FeedbackConfig {
    int csi_tones = 2048;
    int csi_bits = 8;           // quantization
    int tx_antennas = 1;
    int rx_antennas = 4;
    double coherence_time_s = 15e-3;   // T_c
    double feedback_period_s = 15e-3;
    int subcarrier_group = 4;
    int feedback_mcs = 7;       // MCS used for the OFDMA feedback payload
};

// Per-user feedback payload in bits:
//   tones * bits * TxAnt * RxAnt * T_c / (group * feedback period).
double feedback_bits(const FeedbackConfig& cfg);

struct SoundingCost {
    std::uint64_t airtime_us = 0;
    std::uint64_t bytes = 0;  // payload bytes moved for channel acquisition
};

// Airtime of one CSI acquisition round for K users at a given bandwidth:
//  - baseline: NDP + CSI poll + OFDMA feedback rounds carrying the Eq.-6
//    payload (packed up to the per-bandwidth user limit, fragmented at the
//    maximum packet duration) with SIFS gaps;
//  - crossband: MU-RTS/CTS + trigger + uplink pilot rounds;
//  - clcp: pilot rounds only for the `unobserved_users` whose groups saw no
//    recent transmission, zero otherwise;
//  - oracle: free.
SoundingCost sounding_cost(SimMode mode, int users, int bandwidth_mhz,
                           const FeedbackConfig& fb, const FrameBudget& budget,
                           int unobserved_users = 0);

// Fraction of a coherence interval spent on sounding for the given mode.
double sounding_fraction(SimMode mode, int users, int bandwidth_mhz, const FeedbackConfig& fb,
                         const FrameBudget& budget, int unobserved_users = 0);

}  // namespace clcp
