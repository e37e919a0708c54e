// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#pragma once

#include <cstdint>
#include <vector>

#include "clcp/capacity.hpp"
#include "clcp/phy.hpp"
#include "clcp/ru_tree.hpp"

namespace clcp {

// Maximum and default minimum OFDMA packet durations.
inline constexpr double kTMaxTimeS = 5.484e-3;
inline constexpr double kDefaultTMinTimeS = 0.5e-3;
inline constexpr double kSymbolDurationS = 13.6e-6;  // 12.8 us + 0.8 us GI

// PHY rate of an RU at one MCS: tones * bits_per_tone / symbol duration.
double ru_rate_bps(int span_tones, const McsEntry& mcs);

struct SchedUserInfo {
    int id = 0;
    std::uint64_t bsr_bytes = 0;
    int mcs = 0;
};

// Per-level user pools U_0..U_L. A user appears in a contiguous suffix of
// levels; levels beyond the stored list are empty (after repair pops).
struct UserPoolSet {
    std::vector<std::vector<int>> pools;  // level -> sorted user ids

    static const std::vector<int>& empty_pool();
    const std::vector<int>& pool_for_level(int level) const {
        return level < static_cast<int>(pools.size()) ? pools[level] : empty_pool();
    }
};

// Buffer/MCS-driven pool assignment: R_u = BSR*8 / T_MaxTime is compared
// with the per-level PHY rates at the user's MCS; the user joins every pool
// from the smallest-rate level still satisfying R_RU >= R_u down to U_L.
// Users demanding more than the widest RU join all pools.
UserPoolSet assign_user_pools(const std::vector<SchedUserInfo>& users, const RuTree& tree,
                              const McsTable& table);

struct ScheduleEntry {
    int node_id = 0;
    std::vector<int> user_ids;
    std::vector<int> user_mcs;   // parallel to user_ids
    std::vector<double> t_k_s;   // parallel to user_ids
    double capacity = 0.0;

    bool empty() const { return user_ids.empty(); }
};

struct Schedule {
    std::vector<ScheduleEntry> entries;  // span order, disjoint cover
    double t_s = 0.0;
    double total_capacity = 0.0;

    bool has_empty() const {
        for (const auto& e : entries)
            if (e.empty()) return true;
        return false;
    }
    int user_count() const {
        int n = 0;
        for (const auto& e : entries) n += static_cast<int>(e.user_ids.size());
        return n;
    }
};

struct DqOptions {
    // Instances with at most this many pooled users run the exact merge
    // (domination pruning only); larger instances keep the best beam_width
    // candidates per node.
    int exact_user_limit = 12;
    int beam_width = 32;
};

// Bottom-up divide-and-conquer: each node's best schedules are either a
// direct assignment from its level pool (greedy ZFBF user grouping on RUs
// wider than 106 tones) or the merge of its children (including the center
// 26-tone extras), keeping the higher capacity. RUs may come back empty when
// pools run dry; repair_empty_rus handles those.
Schedule divide_conquer(const UserPoolSet& pools, const CapacityModel& cap,
                        const DqOptions& opts = {});

// Pops empty pool groups (relabeling levels downward) and re-runs the DQ
// until no RU is empty; if popping cannot make progress, only the full-band
// assignment remains. Throws when there are no users at all.
Schedule repair_empty_rus(Schedule schedule, UserPoolSet pools, const CapacityModel& cap,
                          const DqOptions& opts = {});

// T_k = BSR*8 / rate(assigned RU); T_s = max(min_k T_k, t_min), capped at
// T_MaxTime. Fills the per-user durations and returns T_s.
double set_duration(Schedule& schedule, const std::vector<SchedUserInfo>& users,
                    const RuTree& tree, const McsTable& table,
                    double t_min_time_s = kDefaultTMinTimeS);

// Eq.-7 capacity of a complete schedule (entries summed in span order).
// Throws on overlapping RUs.
double schedule_capacity(const CapacityModel& cap, const Schedule& schedule);

// Structural audit: disjoint spans covering the usable band, at most one RU
// per user, and 1..max_users_per_ru users per RU (0 allowed pre-repair).
void audit_schedule(const Schedule& schedule, const RuTree& tree, int max_users_per_ru,
                    bool allow_empty);

// Full pipeline: pools, DQ, repair, MCS bookkeeping and duration.
Schedule run_sra(const std::vector<SchedUserInfo>& users, const CapacityModel& cap,
                 const McsTable& table, const DqOptions& opts = {},
                 double t_min_time_s = kDefaultTMinTimeS);

}  // namespace clcp
