// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#pragma once

#include <complex>
#include <vector>

#include "clcp/linalg.hpp"
#include "clcp/phy.hpp"
#include "clcp/rng.hpp"

namespace clcp {

enum class DetectionMethod { ZfSic, MmseSic, Ml };

// Unit-average-power Gray-mapped constellation (BPSK or square QAM).
std::vector<std::complex<double>> constellation(Modulation m);

// Maps a symbol index to its Gray-coded bits (LSB first).
int constellation_bits(Modulation m);

struct DetectionResult {
    std::vector<int> symbol_indices;              // per transmit user
    std::vector<std::complex<double>> symbols;    // sliced constellation points
    bool zf_fell_back_to_mmse = false;            // rank-deficient channel
};

// Joint detection of one received vector y = H s + n with per-user unit
// symbol energy. ZF-SIC and MMSE-SIC detect in decreasing post-equalization
// SINR order and cancel; ML searches the joint constellation exhaustively
// (bounded to <= 4 users and <= 16-QAM). A rank-deficient H makes ZF fall
// back to MMSE and flags the result.
DetectionResult detect_mu(const std::vector<std::complex<double>>& y, const CMat& channel,
                          DetectionMethod method, Modulation mod, double noise_var);

struct MuBerStats {
    double ber = 0.0;
    std::int64_t bit_errors = 0;
    std::int64_t bits = 0;
    double ci95_halfwidth = 0.0;  // normal-approximation confidence interval
};

// Monte Carlo BER of a detection method over i.i.d. Rayleigh channels at a
// given per-user SNR (dB).
MuBerStats detect_ber_monte_carlo(int n_rx, int n_users, Modulation mod,
                                  DetectionMethod method, double snr_db, int n_symbols,
                                  Rng& rng);

}  // namespace clcp
