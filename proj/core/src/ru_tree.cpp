// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include "clcp/ru_tree.hpp"

#include <map>
#include <stdexcept>

namespace clcp {

namespace {

struct Builder {
    RuTree tree;
    std::map<std::pair<int, bool>, int> index_counter;  // (level, is_extra) -> next

    int make_node(int level, bool is_extra, int tone_label, int span_start, int span_tones) {
        RuNode n;
        n.id = static_cast<int>(tree.nodes.size());
        n.level = level;
        n.is_extra = is_extra;
        n.index = index_counter[{level, is_extra}]++;
        n.tone_label = tone_label;
        n.span_start = span_start;
        n.span_tones = span_tones;
        tree.nodes.push_back(n);
        return n.id;
    }

    // Builds the subtree for a nominal RU size; `cursor` advances through
    // the usable band as leaves are laid down in span order.
    int build(int tone_label, int level, int& cursor) {
        switch (tone_label) {
            case 26: {
                const int id = make_node(level, false, 26, cursor, 26);
                cursor += 26;
                tree.leaves.push_back(id);
                return id;
            }
            case 52:
            case 106:
            case 484: {
                const int child_label = tone_label == 52 ? 26 : (tone_label == 106 ? 52 : 242);
                const int start = cursor;
                const int a = build(child_label, level + 1, cursor);
                const int b = build(child_label, level + 1, cursor);
                const int id = make_node(level, false, tone_label, start, cursor - start);
                adopt(id, {a, b});
                return id;
            }
            case 242:
            case 996: {
                const int child_label = tone_label == 242 ? 106 : 484;
                const int start = cursor;
                const int a = build(child_label, level + 1, cursor);
                const int e = make_center(cursor);
                cursor += 26;
                const int b = build(child_label, level + 1, cursor);
                const int id = make_node(level, false, tone_label, start, cursor - start);
                adopt(id, {a, e, b});
                return id;
            }
            case 1992: {  // 2x996, the full 160 MHz band
                const int start = cursor;
                const int a = build(996, level + 1, cursor);
                const int b = build(996, level + 1, cursor);
                const int id = make_node(level, false, 1992, start, cursor - start);
                adopt(id, {a, b});
                return id;
            }
            default:
                throw std::logic_error("build_ru_tree: bad tone label");
        }
    }

    int make_center(int cursor) {
        const int id = make_node(tree.levels, true, 26, cursor, 26);
        tree.leaves.push_back(id);
        return id;
    }

    void adopt(int parent, std::vector<int> children) {
        for (int c : children) tree.nodes[c].parent = parent;
        tree.nodes[parent].children = std::move(children);
    }
};

}  // namespace

RuTree build_ru_tree(int bandwidth_mhz) {
    int top_label = 0, levels = 0, subcarriers = 0;
    switch (bandwidth_mhz) {
        case 20: top_label = 242; levels = 3; subcarriers = 256; break;
        case 40: top_label = 484; levels = 4; subcarriers = 512; break;
        case 80: top_label = 996; levels = 5; subcarriers = 1024; break;
        case 160: top_label = 1992; levels = 6; subcarriers = 2048; break;
        default: throw std::invalid_argument("build_ru_tree: unsupported bandwidth");
    }

    Builder b;
    b.tree.bandwidth_mhz = bandwidth_mhz;
    b.tree.levels = levels;
    b.tree.subcarriers = subcarriers;

    // Leaf grid size: 26 tones per leaf, centered in the CSI grid.
    int leaf_count = 0;
    switch (bandwidth_mhz) {
        case 20: leaf_count = 9; break;
        case 40: leaf_count = 18; break;
        case 80: leaf_count = 37; break;
        case 160: leaf_count = 74; break;
    }
    b.tree.usable_tones = leaf_count * 26;
    b.tree.usable_start = (subcarriers - b.tree.usable_tones) / 2;

    int cursor = b.tree.usable_start;
    b.tree.root = b.build(top_label, 0, cursor);

    if (cursor - b.tree.usable_start != b.tree.usable_tones)
        throw std::logic_error("build_ru_tree: span bookkeeping error");

    b.tree.level_span_tones.assign(levels + 1, 0);
    for (const auto& n : b.tree.nodes)
        if (!n.is_extra && b.tree.level_span_tones[n.level] == 0)
            b.tree.level_span_tones[n.level] = n.span_tones;
    return b.tree;
}

}  // namespace clcp
