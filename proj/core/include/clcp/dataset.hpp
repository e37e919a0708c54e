// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#pragma once

#include <vector>

#include "clcp/estimator.hpp"
#include "clcp/model.hpp"
#include "clcp/rng.hpp"
#include "clcp/ru_tree.hpp"

namespace clcp {

struct DatasetOptions {
    EstimatorConfig estimator;
    int masked_variants = 3;       // RU-masked inputs per link per instant
    int min_mask_level = 1;        // smallest RU level drawn for masks
    std::uint64_t seed = 1;
};

// Builds training instants from per-instant ground-truth channels of one
// link group: full-band path estimates as inputs and parameter targets, the
// channels themselves as reconstruction targets, and estimates from random
// legal RU spans as the OFDMA-mimicking input variants.
std::vector<TrainingInstant> build_training_dataset(
    const std::vector<std::vector<Csi>>& group_csis,  // [instant][link in group]
    const RuTree& tree, const DatasetOptions& opts);

// Masks a copy of the channel to one RU span.
Csi mask_to_span(const Csi& csi, int span_start, int span_tones);

}  // namespace clcp
