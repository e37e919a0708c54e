// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include "clcp/dataset.hpp"

#include <algorithm>
#include <stdexcept>

namespace clcp {

Csi mask_to_span(const Csi& csi, int span_start, int span_tones) {
    Csi out = csi;
    std::fill(out.observed.begin(), out.observed.end(), 0);
    for (int s = span_start; s < span_start + span_tones; ++s) out.observed[s] = 1;
    return out;
}

std::vector<TrainingInstant> build_training_dataset(
    const std::vector<std::vector<Csi>>& group_csis, const RuTree& tree,
    const DatasetOptions& opts) {
    if (group_csis.empty()) throw std::invalid_argument("build_training_dataset: no instants");
    const int n_links = static_cast<int>(group_csis.front().size());
    if (n_links < 1) throw std::invalid_argument("build_training_dataset: empty group");

    // Legal RU spans for input masking, from min_mask_level down to leaves.
    std::vector<const RuNode*> mask_nodes;
    for (const auto& n : tree.nodes)
        if (n.level >= opts.min_mask_level) mask_nodes.push_back(&n);
    std::sort(mask_nodes.begin(), mask_nodes.end(),
              [](const RuNode* a, const RuNode* b) { return a->id < b->id; });

    Rng rng = Rng(opts.seed).fork(0x64617461);
    std::vector<TrainingInstant> out;
    out.reserve(group_csis.size());
    for (const auto& instant_csis : group_csis) {
        if (static_cast<int>(instant_csis.size()) != n_links)
            throw std::invalid_argument("build_training_dataset: ragged instant");
        TrainingInstant inst;
        inst.timestamp_us = instant_csis.front().timestamp_us;
        inst.csi_targets = instant_csis;
        inst.full_inputs.resize(n_links);
        inst.param_targets.resize(n_links);
        inst.masked_inputs.resize(n_links);
        for (int l = 0; l < n_links; ++l) {
            inst.full_inputs[l] = estimate_paths(instant_csis[l], opts.estimator);
            inst.param_targets[l] = inst.full_inputs[l];
            for (int v = 0; v < opts.masked_variants; ++v) {
                const RuNode* node = mask_nodes[rng.uniform_int(mask_nodes.size())];
                const Csi masked = mask_to_span(instant_csis[l], node->span_start,
                                                node->span_tones);
                inst.masked_inputs[l].push_back(estimate_paths(masked, opts.estimator));
            }
        }
        out.push_back(std::move(inst));
    }
    return out;
}

}  // namespace clcp
