// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#pragma once

#include <utility>
#include <vector>

#include "clcp/csi.hpp"
#include "clcp/rng.hpp"

namespace clcp {

// Per-packet measurement impairments of a reported CSI:
//  - packet-boundary timing jitter: a linear phase slope across subcarriers,
//    tau drawn from a zero-mean Gaussian;
//  - power-control uncertainty: one common amplitude scale (log-normal in dB);
//  - carrier frequency offset: one common phase constant.
struct ImpairmentConfig {
    double timing_jitter_s = 25e-9;
    double amplitude_sigma_db = 1.0;
    double cfo_phase_range = 3.14159265358979323846;  // uniform in [-range, range]
};

struct RssiSample {
    double rssi_db = 0.0;
    int packet_index = 0;
};

// Applies the three impairments and returns the matching RSSI reading
// (mean received power in dB, including the amplitude offset).
std::pair<Csi, RssiSample> inject_impairments(const Csi& csi, const ImpairmentConfig& cfg,
                                              Rng& rng, int packet_index = 0);

// Error compensation over three sequential pilot CSIs:
//  - per-subcarrier phases averaged across the three packets (circularly);
//  - packets whose RSSI deviates more than 3*MAD from the window median are
//    discarded before amplitude averaging;
//  - the per-subcarrier phase of receive antenna 0 is subtracted from all
//    antennas, which removes the CFO constant but keeps relative
//    inter-antenna phases.
// `rssis` holds the outlier-detection window; its first csis.size() entries
// correspond to the given packets. Throws if fewer than 3 CSIs/RSSIs are
// given or if every packet is rejected as an outlier.
Csi compensate(const std::vector<Csi>& csis, const std::vector<RssiSample>& rssis);

}  // namespace clcp
