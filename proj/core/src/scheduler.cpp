// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include "clcp/scheduler.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

namespace clcp {

namespace {

// Up to 256 pooled users per instance, as a dense bitmask.
struct UserMask {
    std::array<std::uint64_t, 4> w{};

    void set(int i) { w[i >> 6] |= std::uint64_t{1} << (i & 63); }
    bool intersects(const UserMask& o) const {
        for (int k = 0; k < 4; ++k)
            if (w[k] & o.w[k]) return true;
        return false;
    }
    bool subset_of(const UserMask& o) const {
        for (int k = 0; k < 4; ++k)
            if (w[k] & ~o.w[k]) return false;
        return true;
    }
    UserMask merged(const UserMask& o) const {
        UserMask r;
        for (int k = 0; k < 4; ++k) r.w[k] = w[k] | o.w[k];
        return r;
    }
    int count() const {
        int n = 0;
        for (auto x : w)
            while (x) {
                x &= x - 1;
                ++n;
            }
        return n;
    }
    bool operator==(const UserMask& o) const { return w == o.w; }
};

// Deterministic order: the mask containing the lowest differing user index
// comes first.
bool mask_less(const UserMask& a, const UserMask& b) {
    for (int k = 0; k < 4; ++k) {
        const std::uint64_t x = a.w[k] ^ b.w[k];
        if (x) {
            const std::uint64_t low = x & (~x + 1);
            return (a.w[k] & low) != 0;
        }
    }
    return false;
}

struct Cand {
    UserMask mask;
    double cap = 0.0;
    int users = 0;
    int kind = -1;                   // -1 empty, 0 direct, 1 merge
    std::vector<int> direct_users;   // kind 0
    std::vector<int> child_choice;   // kind 1, candidate index per child
};

bool cand_before(const Cand& a, const Cand& b) {
    if (a.cap != b.cap) return a.cap > b.cap;
    if (a.users != b.users) return a.users > b.users;  // more users on ties
    if (!(a.mask == b.mask)) return mask_less(a.mask, b.mask);
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.direct_users != b.direct_users) return a.direct_users < b.direct_users;
    return a.child_choice < b.child_choice;
}

using Table = std::vector<Cand>;

// Sorts, removes dominated candidates (a kept candidate using a subset of
// the users at no lower capacity makes a candidate redundant) and applies
// the beam cap.
void prune(Table& t, int beam) {
    std::sort(t.begin(), t.end(), cand_before);
    Table kept;
    kept.reserve(t.size());
    for (auto& c : t) {
        bool dominated = false;
        for (const auto& k : kept)
            if (k.mask.subset_of(c.mask)) {
                dominated = true;
                break;
            }
        if (!dominated) kept.push_back(std::move(c));
        if (static_cast<int>(kept.size()) >= beam) break;
    }
    t = std::move(kept);
}

struct DqSolver {
    const UserPoolSet* pools;
    const CapacityModel* cap;
    const RuTree* tree;
    int beam;
    std::map<int, int> dense_index;  // user id -> bit position
    std::vector<Table> tables;

    UserMask mask_of(const std::vector<int>& ids) const {
        UserMask m;
        for (int id : ids) m.set(dense_index.at(id));
        return m;
    }

    // Greedy max-marginal ZFBF user grouping for MU-capable wide RUs.
    // Additions are drawn from the strongest candidates by single-user
    // capacity, which bounds the per-node ZFBF evaluations.
    std::vector<int> greedy_chain(const RuNode& node, const std::vector<int>& pool) const {
        std::vector<int> chain;
        std::vector<int> rest = pool;
        if (rest.size() > 8) {
            std::stable_sort(rest.begin(), rest.end(), [&](int a, int b) {
                return cap->single_user(node.id, a) > cap->single_user(node.id, b);
            });
            rest.resize(8);
        }
        double cur_cap = 0.0;
        const int limit = std::min<int>(cap->max_users_per_ru(), static_cast<int>(rest.size()));
        while (static_cast<int>(chain.size()) < limit) {
            int best = -1;
            double best_cap = cur_cap;
            std::vector<int> trial = chain;
            trial.push_back(0);
            for (std::size_t i = 0; i < rest.size(); ++i) {
                trial.back() = rest[i];
                const double c = cap->assignment(node.id, trial);
                if (c > best_cap) {
                    best_cap = c;
                    best = static_cast<int>(i);
                }
            }
            if (best < 0) break;
            chain.push_back(rest[best]);
            rest.erase(rest.begin() + best);
            cur_cap = best_cap;
        }
        return chain;
    }

    void solve_node(const RuNode& node) {
        Table t;
        t.push_back(Cand{});  // unassigned RU, zero capacity

        const std::vector<int>& pool = pools->pool_for_level(node.level);
        for (int uid : pool) {
            Cand c;
            c.mask = mask_of({uid});
            c.cap = cap->single_user(node.id, uid);
            c.users = 1;
            c.kind = 0;
            c.direct_users = {uid};
            t.push_back(std::move(c));
        }
        if (node.tone_label > 106 && cap->max_users_per_ru() >= 2 && pool.size() >= 2) {
            const std::vector<int> chain = greedy_chain(node, pool);
            for (std::size_t len = 2; len <= chain.size(); ++len) {
                std::vector<int> group(chain.begin(), chain.begin() + len);
                Cand c;
                c.mask = mask_of(group);
                c.cap = cap->assignment(node.id, group);
                c.users = static_cast<int>(len);
                c.kind = 0;
                c.direct_users = std::move(group);
                t.push_back(std::move(c));
            }
        }

        if (!node.leaf()) {
            Table acc;
            for (std::size_t ci = 0; ci < tables[node.children[0]].size(); ++ci) {
                const Cand& b = tables[node.children[0]][ci];
                Cand c;
                c.mask = b.mask;
                c.cap = b.cap;
                c.users = b.users;
                c.kind = 1;
                c.child_choice = {static_cast<int>(ci)};
                acc.push_back(std::move(c));
            }
            for (std::size_t k = 1; k < node.children.size(); ++k) {
                const Table& child = tables[node.children[k]];
                Table next;
                for (const Cand& a : acc)
                    for (std::size_t ci = 0; ci < child.size(); ++ci) {
                        const Cand& b = child[ci];
                        if (a.mask.intersects(b.mask)) continue;
                        Cand c;
                        c.mask = a.mask.merged(b.mask);
                        c.cap = a.cap + b.cap;
                        c.users = a.users + b.users;
                        c.kind = 1;
                        c.child_choice = a.child_choice;
                        c.child_choice.push_back(static_cast<int>(ci));
                        next.push_back(std::move(c));
                    }
                prune(next, beam);
                acc = std::move(next);
            }
            for (auto& c : acc) t.push_back(std::move(c));
        }

        prune(t, beam);
        tables[node.id] = std::move(t);
    }

    void reconstruct(int node_id, const Cand& c, Schedule& out) const {
        if (c.kind <= 0) {
            ScheduleEntry e;
            e.node_id = node_id;
            e.user_ids = c.direct_users;
            e.capacity = cap->assignment(node_id, e.user_ids);
            out.entries.push_back(std::move(e));
            return;
        }
        const auto& children = tree->node(node_id).children;
        for (std::size_t k = 0; k < children.size(); ++k)
            reconstruct(children[k], tables[children[k]][c.child_choice[k]], out);
    }
};

Schedule full_band_fallback(const UserPoolSet& pools, const CapacityModel& cap) {
    std::set<int> union_set;
    for (const auto& p : pools.pools) union_set.insert(p.begin(), p.end());
    if (union_set.empty()) throw std::invalid_argument("repair_empty_rus: no users at all");
    const std::vector<int> union_ids(union_set.begin(), union_set.end());

    const RuTree& tree = cap.tree();
    const RuNode& root = tree.node(tree.root);

    // Best single user, then greedy MU growth where the root allows it.
    std::vector<int> group;
    double best_cap = -1.0;
    for (int uid : union_ids) {
        const double c = cap.single_user(root.id, uid);
        if (c > best_cap) {
            best_cap = c;
            group = {uid};
        }
    }
    if (root.tone_label > 106 && cap.max_users_per_ru() >= 2) {
        bool grew = true;
        while (grew && static_cast<int>(group.size()) < cap.max_users_per_ru()) {
            grew = false;
            std::vector<int> trial = group;
            trial.push_back(0);
            int best_uid = -1;
            for (int uid : union_ids) {
                if (std::find(group.begin(), group.end(), uid) != group.end()) continue;
                trial.back() = uid;
                const double c = cap.assignment(root.id, trial);
                if (c > best_cap) {
                    best_cap = c;
                    best_uid = uid;
                }
            }
            if (best_uid >= 0) {
                group.push_back(best_uid);
                grew = true;
            }
        }
    }

    Schedule s;
    ScheduleEntry e;
    e.node_id = root.id;
    e.user_ids = std::move(group);
    e.capacity = best_cap;
    s.entries.push_back(std::move(e));
    s.total_capacity = best_cap;
    return s;
}

}  // namespace

double ru_rate_bps(int span_tones, const McsEntry& mcs) {
    return span_tones * mcs.bits_per_tone / kSymbolDurationS;
}

const std::vector<int>& UserPoolSet::empty_pool() {
    static const std::vector<int> empty;
    return empty;
}

UserPoolSet assign_user_pools(const std::vector<SchedUserInfo>& users, const RuTree& tree,
                              const McsTable& table) {
    if (users.empty()) throw std::invalid_argument("assign_user_pools: empty user set");
    UserPoolSet pools;
    pools.pools.assign(tree.levels + 1, {});
    for (const auto& u : users) {
        const double demand_bps = static_cast<double>(u.bsr_bytes) * 8.0 / kTMaxTimeS;
        const McsEntry& mcs = table.entry(u.mcs);
        // Smallest per-level rate still >= the demand; overflow demands join
        // every pool.
        int level = 0;
        for (int l = tree.levels; l >= 0; --l) {
            if (ru_rate_bps(tree.level_span_tones[l], mcs) >= demand_bps) {
                level = l;
                break;
            }
        }
        for (int l = level; l <= tree.levels; ++l) pools.pools[l].push_back(u.id);
    }
    for (auto& p : pools.pools) std::sort(p.begin(), p.end());
    return pools;
}

Schedule divide_conquer(const UserPoolSet& pools, const CapacityModel& cap,
                        const DqOptions& opts) {
    const RuTree& tree = cap.tree();

    std::set<int> union_ids;
    for (const auto& p : pools.pools) union_ids.insert(p.begin(), p.end());
    if (static_cast<int>(union_ids.size()) > 256)
        throw std::invalid_argument("divide_conquer: more than 256 pooled users");

    DqSolver solver;
    solver.pools = &pools;
    solver.cap = &cap;
    solver.tree = &tree;
    solver.beam = static_cast<int>(union_ids.size()) <= opts.exact_user_limit
                      ? std::numeric_limits<int>::max()
                      : opts.beam_width;
    int bit = 0;
    for (int uid : union_ids) solver.dense_index[uid] = bit++;
    solver.tables.resize(tree.nodes.size());

    // Children always precede their parent in the node array.
    for (const auto& node : tree.nodes) solver.solve_node(node);

    Schedule out;
    const Table& root_table = solver.tables[tree.root];
    solver.reconstruct(tree.root, root_table.front(), out);
    std::sort(out.entries.begin(), out.entries.end(),
              [&](const ScheduleEntry& a, const ScheduleEntry& b) {
                  return tree.node(a.node_id).span_start < tree.node(b.node_id).span_start;
              });
    out.total_capacity = 0.0;
    for (const auto& e : out.entries) out.total_capacity += e.capacity;
    return out;
}

Schedule repair_empty_rus(Schedule schedule, UserPoolSet pools, const CapacityModel& cap,
                          const DqOptions& opts) {
    {
        std::set<int> union_ids;
        for (const auto& p : pools.pools) union_ids.insert(p.begin(), p.end());
        if (union_ids.empty()) throw std::invalid_argument("repair_empty_rus: no users at all");
    }
    const int max_rounds = cap.tree().levels + 1;
    for (int round = 0; round < max_rounds; ++round) {
        if (!schedule.has_empty()) return schedule;
        UserPoolSet next;
        for (const auto& p : pools.pools)
            if (!p.empty()) next.pools.push_back(p);
        if (next.pools.size() == pools.pools.size()) break;  // nothing to pop
        pools = std::move(next);
        schedule = divide_conquer(pools, cap, opts);
    }
    if (!schedule.has_empty()) return schedule;
    return full_band_fallback(pools, cap);
}

double set_duration(Schedule& schedule, const std::vector<SchedUserInfo>& users,
                    const RuTree& tree, const McsTable& table, double t_min_time_s) {
    if (schedule.user_count() == 0)
        throw std::invalid_argument("set_duration: empty schedule");
    std::map<int, const SchedUserInfo*> by_id;
    for (const auto& u : users) by_id[u.id] = &u;

    double t_min_user = std::numeric_limits<double>::infinity();
    for (auto& e : schedule.entries) {
        e.t_k_s.assign(e.user_ids.size(), 0.0);
        e.user_mcs.assign(e.user_ids.size(), 0);
        for (std::size_t i = 0; i < e.user_ids.size(); ++i) {
            const auto it = by_id.find(e.user_ids[i]);
            if (it == by_id.end())
                throw std::invalid_argument("set_duration: scheduled user not in user list");
            const SchedUserInfo& u = *it->second;
            e.user_mcs[i] = u.mcs;
            const double rate =
                ru_rate_bps(tree.node(e.node_id).span_tones, table.entry(u.mcs));
            e.t_k_s[i] = static_cast<double>(u.bsr_bytes) * 8.0 / rate;
            t_min_user = std::min(t_min_user, e.t_k_s[i]);
        }
    }
    schedule.t_s = std::min(std::max(t_min_user, t_min_time_s), kTMaxTimeS);
    return schedule.t_s;
}

double schedule_capacity(const CapacityModel& cap, const Schedule& schedule) {
    audit_schedule(schedule, cap.tree(), cap.max_users_per_ru(), true);
    double total = 0.0;
    for (const auto& e : schedule.entries) total += cap.assignment(e.node_id, e.user_ids);
    return total;
}

void audit_schedule(const Schedule& schedule, const RuTree& tree, int max_users_per_ru,
                    bool allow_empty) {
    std::vector<std::pair<int, int>> spans;
    std::set<int> seen_users;
    for (const auto& e : schedule.entries) {
        const RuNode& n = tree.node(e.node_id);
        spans.emplace_back(n.span_start, n.span_tones);
        if (e.user_ids.empty() && !allow_empty)
            throw std::runtime_error("audit_schedule: empty RU in final schedule");
        if (static_cast<int>(e.user_ids.size()) > max_users_per_ru)
            throw std::runtime_error("audit_schedule: RU user count exceeds N_T/N_R bound");
        for (int uid : e.user_ids)
            if (!seen_users.insert(uid).second)
                throw std::runtime_error("audit_schedule: user appears in two RUs");
    }
    std::sort(spans.begin(), spans.end());
    int cursor = tree.usable_start;
    for (const auto& [start, tones] : spans) {
        if (start != cursor)
            throw std::runtime_error("audit_schedule: RU spans overlap or leave a gap");
        cursor += tones;
    }
    if (cursor != tree.usable_start + tree.usable_tones)
        throw std::runtime_error("audit_schedule: schedule does not cover the band");
}

Schedule run_sra(const std::vector<SchedUserInfo>& users, const CapacityModel& cap,
                 const McsTable& table, const DqOptions& opts, double t_min_time_s) {
    std::vector<SchedUserInfo> active;
    for (const auto& u : users)
        if (u.bsr_bytes > 0) active.push_back(u);
    if (active.empty()) return Schedule{};

    const UserPoolSet pools = assign_user_pools(active, cap.tree(), table);
    Schedule sched = divide_conquer(pools, cap, opts);
    sched = repair_empty_rus(std::move(sched), pools, cap, opts);
    set_duration(sched, active, cap.tree(), table, t_min_time_s);
    audit_schedule(sched, cap.tree(), cap.max_users_per_ru(), false);
    sched.total_capacity = schedule_capacity(cap, sched);
    return sched;
}

}  // namespace clcp
