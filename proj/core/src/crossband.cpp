// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include "clcp/crossband.hpp"

#include "clcp/channel.hpp"

namespace clcp {

Csi predict_fullband_crossband(const Csi& partial, const EstimatorConfig& cfg) {
    const PathSet ps = estimate_paths(partial, cfg);
    Csi out = Csi::zeros(partial.grid(), partial.timestamp_us);
    for (const auto& p : ps.paths) accumulate_path(out, p);
    return out;
}

StalePrediction predict_last_known(const Csi& cache_entry, std::uint64_t now_us) {
    if (cache_entry.values.empty())
        throw std::invalid_argument("predict_last_known: empty cache entry");
    StalePrediction out;
    out.csi = cache_entry;
    out.age_us = now_us >= cache_entry.timestamp_us ? now_us - cache_entry.timestamp_us : 0;
    return out;
}

}  // namespace clcp
