// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#pragma once

#include "clcp/csi.hpp"
#include "clcp/estimator.hpp"

namespace clcp {

// Reference predictors for head-to-head comparison.

// Cross-band prediction: extracts the frequency-independent path parameters
// from the observed span and re-synthesizes the full band. Throws on an
// empty observation mask.
Csi predict_fullband_crossband(const Csi& partial, const EstimatorConfig& cfg = {});

struct StalePrediction {
    Csi csi;
    std::uint64_t age_us = 0;
};

// Returns the cached channel unchanged, stamped with its staleness.
StalePrediction predict_last_known(const Csi& cache_entry, std::uint64_t now_us);

}  // namespace clcp
