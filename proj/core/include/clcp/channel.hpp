// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#pragma once

#include <complex>

#include "clcp/csi.hpp"
#include "clcp/paths.hpp"

namespace clcp {

// Geometric multipath channel synthesis. Each path contributes
//
//   h[i][s] = a * exp(j*(phi - 2*pi*d/lambda_s)) * exp(-j*2*pi*i*k*cos(theta)/lambda_s)
//
// for receive antenna i and subcarrier wavelength lambda_s, with k the
// antenna spacing. Contributions add linearly over paths.

// Per-path phase at antenna 0: phi - 2*pi*d/lambda.
inline double path_base_phase(const Path& p, double lambda) {
    return p.phi - 2.0 * 3.14159265358979323846 * p.d / lambda;
}

// Phase increment per antenna index: -2*pi*k*cos(theta)/lambda.
inline double path_antenna_phase_step(const Path& p, double spacing, double lambda) {
    return -2.0 * 3.14159265358979323846 * spacing * std::cos(p.theta) / lambda;
}

// Adds (scale = +1) or removes (scale = -1) one path's contribution.
void accumulate_path(Csi& csi, const Path& path, double scale = 1.0);

// Evaluates the full sum over the grid; throws on an empty path set.
Csi synthesize_csi(const PathSet& ps, const SubcarrierGrid& grid,
                   std::uint64_t timestamp_us = 0);

}  // namespace clcp
