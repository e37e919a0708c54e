// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#pragma once

#include <string>

#include "clcp/mac_sim.hpp"

namespace clcp {

// metrics CSV: window_start_ms, mode, throughput_bps, sounding_fraction
void write_metrics_csv(const SimMetrics& m, const std::string& path);

// Aggregate summary (totals, per-user, EVM/PER digests) as JSON.
void write_summary_json(const SimMetrics& m, const std::string& path);

// Event log as newline-delimited JSON for audits.
void write_events_ndjson(const SimMetrics& m, const std::string& path);

}  // namespace clcp
