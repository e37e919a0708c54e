// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#pragma once

#include <string>
#include <vector>

#include "clcp/csi.hpp"

namespace clcp {

// Error vector magnitude in dB of a prediction against ground truth:
// 10*log10(sum|H - H_gt|^2 / sum|H_gt|^2), clamped below at -100 dB.
// Throws on a zero-power ground truth or a shape mismatch.
double evm_db(const Csi& pred, const Csi& gt);

// Post-combining SNR per subcarrier: tx_power * sum_m |h_{m,s}|^2 / noise.
std::vector<double> snr_per_subcarrier(const Csi& csi, double tx_power, double noise_power);

enum class Modulation { BPSK, QPSK, QAM16, QAM64, QAM256, QAM1024 };

int modulation_order(Modulation m);            // constellation size
int bits_per_symbol(Modulation m);

// Uncoded Gray-coded bit error rate at linear SNR (Q-function approximation
// for square QAM), clamped to [0, 0.5].
double ber_awgn(Modulation m, double snr_linear);

// Inverse of ber_awgn in the SNR argument (bisection; ber must be in (0, 0.5)).
double ber_inverse(Modulation m, double ber);

// Effective SNR: BER^{-1}( mean_s BER(modulation, SNR_s) ), in dB.
// Exactly the per-subcarrier SNR for a flat channel.
double esnr_db(const std::vector<double>& snrs_linear, Modulation m);

struct McsEntry {
    int index = 0;
    Modulation modulation = Modulation::BPSK;
    int code_num = 1;       // coding rate numerator
    int code_den = 2;       // coding rate denominator
    double bits_per_tone = 0.5;  // data bits per subcarrier per symbol
    double esnr_threshold_db = 0.0;
    double coding_gain_db = 0.0;

    double coding_rate() const { return static_cast<double>(code_num) / code_den; }
};

// The 12-entry 802.11ax-style MCS ladder. Thresholds are calibrated as the
// smallest flat-channel SNR for which the PER model stays at or below 1e-2
// for a 1500-byte packet, and are distributed as an auditable text file.
class McsTable {
  public:
    static const McsTable& builtin();               // calibrated at first use
    static McsTable from_file(const std::string& path);
    void to_file(const std::string& path) const;

    const McsEntry& entry(int index) const;
    int size() const { return static_cast<int>(entries_.size()); }
    const std::vector<McsEntry>& entries() const { return entries_; }

    void validate() const;  // strictly increasing thresholds and rates

  private:
    friend McsTable calibrate_mcs_table();
    std::vector<McsEntry> entries_;
};

// Calibrates thresholds from the PER model; deterministic.
McsTable calibrate_mcs_table();

// ESNR rate adaptation: the highest MCS index whose ESNR meets its
// threshold; index 0 when none does.
int select_mcs(const std::vector<double>& snrs_linear, const McsTable& table);
int select_mcs(const Csi& csi, double tx_power, double noise_power, const McsTable& table);

// Packet error rate of `length_bits` at the given per-subcarrier SNRs:
// coding is modeled as an SNR gain, the per-subcarrier uncoded BERs are
// averaged, and PER = 1 - (1 - BER_eff)^length.
double packet_error_rate(const McsEntry& mcs, const std::vector<double>& snrs_linear,
                         std::int64_t length_bits);

}  // namespace clcp
