// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#pragma once

#include "clcp/csi.hpp"
#include "clcp/paths.hpp"

namespace clcp {

// Maximum-likelihood path extraction: greedy successive cancellation over a
// coarse (angle, delay) grid with per-path least-squares (a, phi), followed
// by joint coordinate-descent refinement of every tuple.
//
// Delays are reported modulo the unambiguous range c/delta_f; partial-band
// observations widen the delay mainlobe but leave the estimate unbiased
// because the 4-tuple parameters are frequency independent.
struct EstimatorConfig {
    int max_paths = 8;           // L_max
    double delay_grid_step = 0;  // meters; 0 selects c / (2 * grid bandwidth)
    double angle_grid_step = 2.0 * 3.14159265358979323846 / 180.0;  // radians
    int refine_iters = 20;
    double residual_stop = 0.01;  // stop when residual power falls below this fraction
    double max_delay = 60.0;      // meters searched on the coarse grid
    // Local-optimum escape budget (re-seed/grow attempts after refinement).
    // Zero gives the fastest profile for high-rate in-simulation use.
    int escape_attempts = 7;

    void validate() const;
};

// Extracts up to L_max paths from the observed entries of `csi`. A zero
// channel yields an empty PathSet. Throws if no subcarrier is observed.
// `residual_trajectory`, when given, receives the observed residual power
// fraction after each greedy extraction and after the final refinement;
// the sequence is non-increasing.
PathSet estimate_paths(const Csi& csi, const EstimatorConfig& cfg = {},
                       std::vector<double>* residual_trajectory = nullptr);

// ||csi - synthesize(ps)||^2 / ||csi||^2 over observed entries. Throws on a
// zero-power channel or shape mismatch.
double residual_power(const Csi& csi, const PathSet& ps);

}  // namespace clcp
