// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#pragma once

#include <vector>

namespace clcp {

// 802.11ax resource-unit hierarchy for one channel bandwidth. Levels count
// from 0 at the widest RU down to L at the 26-tone leaves; the center
// 26-tone RUs (one per 242-tone block, plus one in the middle of each
// 996-tone block) are "extra" nodes at leaf level that participate in their
// enclosing block's merge.
//
// Node spans are nested exactly: a parent's span is the concatenation of its
// children's spans, so every valid cover partitions the usable band. The
// nominal tone label (26/52/106/242/484/996) names the standard RU size;
// span_tones is the exact width used for capacity and rate computations.
struct RuNode {
    int id = 0;
    int level = 0;
    int index = 0;  // within (level, is_extra)
    bool is_extra = false;
    int tone_label = 26;
    int span_start = 0;  // absolute subcarrier index in the CSI grid
    int span_tones = 26;
    std::vector<int> children;  // empty for leaves
    int parent = -1;

    bool leaf() const { return children.empty(); }
};

struct RuTree {
    int bandwidth_mhz = 20;
    int levels = 3;       // L: leaf level index
    int subcarriers = 256;  // CSI grid S
    int usable_start = 0;
    int usable_tones = 0;
    int root = 0;
    std::vector<RuNode> nodes;
    std::vector<int> leaves;            // leaf node ids in span order
    std::vector<int> level_span_tones;  // regular node span per level

    int max_users() const { return static_cast<int>(leaves.size()); }
    const RuNode& node(int id) const { return nodes[id]; }
};

// Standard layout for 20/40/80/160 MHz; throws on any other bandwidth.
RuTree build_ru_tree(int bandwidth_mhz);

}  // namespace clcp
