// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include "clcp/mac_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "clcp/channel.hpp"
#include "clcp/crossband.hpp"
#include "clcp/phy.hpp"

namespace clcp {

namespace {

struct LinkCache {
    Csi csi;
    bool valid = false;
};

// Pilot span for cross-band acquisition: the 242-tone level where the band
// has one, else the half-band level (20 MHz).
int pilot_level(const RuTree& tree) {
    for (const auto& n : tree.nodes)
        if (!n.is_extra && n.tone_label == 242 && n.id != tree.root) return n.level;
    return 1;
}

std::vector<const RuNode*> level_nodes(const RuTree& tree, int level) {
    std::vector<const RuNode*> out;
    for (const auto& n : tree.nodes)
        if (n.level == level && !n.is_extra) out.push_back(&n);
    std::sort(out.begin(), out.end(),
              [](const RuNode* a, const RuNode* b) { return a->span_start < b->span_start; });
    return out;
}

struct SimState {
    const SimConfig* cfg;
    RuTree tree;
    SubcarrierGrid grid;
    Environment env;
    Rng master;
    std::uint64_t t_us = 0;
    std::uint64_t round = 0;
    std::vector<LinkCache> cache;
    std::vector<int> mcs_cache;  // refreshed whenever the CSI cache is
    std::vector<std::uint64_t> bsr_bytes;
    std::vector<std::uint64_t> traffic_carry;  // bit-accrual remainder, per user
    Schedule last_data_packet;
    bool have_data_packet = false;
    SimMetrics metrics;

    SimState(const SimConfig& c) : cfg(&c), master(c.seed) {}

    Csi ground_truth(int link) const {
        return synthesize_csi(paths_for_link(env, link), grid, t_us);
    }

    // Acquired CSI: ground truth, optionally passed through the impairment
    // and three-pilot compensation pipeline.
    Csi measure(int link) {
        Csi gt = ground_truth(link);
        if (!cfg->measure_impairments) return gt;
        Rng rng = master.fork(0x6d650000ULL + round * 1024 + static_cast<std::uint64_t>(link));
        std::vector<Csi> pilots;
        std::vector<RssiSample> rssis;
        for (int i = 0; i < 3; ++i) {
            auto [csi, rssi] = inject_impairments(gt, cfg->impairments, rng, i);
            pilots.push_back(std::move(csi));
            rssis.push_back(rssi);
        }
        Csi out = compensate(pilots, rssis);
        out.timestamp_us = t_us;
        return out;
    }

    void accrue_traffic(std::uint64_t now_us, std::uint64_t last_us) {
        const std::uint64_t dt = now_us - last_us;
        if (dt == 0) return;
        const std::uint64_t rate = static_cast<std::uint64_t>(cfg->traffic_bps_per_user);
        for (int u = 0; u < cfg->users; ++u) {
            std::uint64_t numer = traffic_carry[u] + rate * dt;
            const std::uint64_t bits = numer / 1000000ULL;
            traffic_carry[u] = numer % 1000000ULL;
            bsr_bytes[u] += bits / 8;
            metrics.offered_bits += bits;
            metrics.users[u].offered_bytes += bits / 8;
        }
    }

    WindowMetric& window_at(std::uint64_t at_us) {
        const std::uint64_t idx = at_us / 500000ULL;
        while (metrics.windows.size() <= idx) {
            WindowMetric w;
            w.start_ms = metrics.windows.size() * 500;
            metrics.windows.push_back(w);
        }
        return metrics.windows[idx];
    }
};

// Marks users awake for a round and accumulates their active airtime.
void mark_participants(SimState& st, const std::vector<int>& users, std::uint64_t round_us,
                       std::uint64_t tx_us) {
    for (int u : users) {
        st.metrics.users[u].wake_count += 1;
        st.metrics.users[u].awake_us += round_us;
        st.metrics.users[u].tx_us += tx_us;
    }
}

// Refreshes every link cache according to the acquisition mode; returns the
// airtime consumed.
std::uint64_t acquire(SimState& st) {
    const SimConfig& cfg = *st.cfg;
    SimEvent ev;
    ev.t_us = st.t_us;
    ev.kind = "acquisition";

    auto record_evm = [&](int link) {
        if (!st.cache[link].valid) return;
        const Csi gt = st.ground_truth(link);
        EvmRecord r;
        r.t_us = st.t_us;
        r.link = link;
        r.evm_db = evm_db(st.cache[link].csi, gt);
        st.metrics.evm_records.push_back(r);
    };

    SoundingCost cost{};
    std::vector<int> participants;

    switch (cfg.mode) {
        case SimMode::Oracle: {
            for (int l = 0; l < cfg.users; ++l) {
                st.cache[l].csi = st.ground_truth(l);
                st.cache[l].valid = true;
            }
            break;
        }
        case SimMode::Baseline: {
            cost = sounding_cost(SimMode::Baseline, cfg.users, cfg.bandwidth_mhz, cfg.feedback,
                                 cfg.budget);
            for (int l = 0; l < cfg.users; ++l) {
                st.cache[l].csi = st.measure(l);
                st.cache[l].valid = true;
                participants.push_back(l);
            }
            break;
        }
        case SimMode::Crossband: {
            cost = sounding_cost(SimMode::Crossband, cfg.users, cfg.bandwidth_mhz, cfg.feedback,
                                 cfg.budget);
            const int plevel = pilot_level(st.tree);
            const auto pilot_rus = level_nodes(st.tree, plevel);
            for (int l = 0; l < cfg.users; ++l) {
                const RuNode* ru = pilot_rus[l % pilot_rus.size()];
                Csi partial = st.measure(l);
                std::fill(partial.observed.begin(), partial.observed.end(), 0);
                for (int s = ru->span_start; s < ru->span_start + ru->span_tones; ++s)
                    partial.observed[s] = 1;
                record_evm(l);
                st.cache[l].csi = predict_fullband_crossband(partial, cfg.estimator);
                st.cache[l].csi.timestamp_us = st.t_us;
                st.cache[l].valid = true;
                participants.push_back(l);
            }
            break;
        }
        case SimMode::Clcp: {
            std::map<int, std::vector<ObservedView>> observed;
            if (st.have_data_packet)
                observed = opportunistic_observe(st.last_data_packet, st.tree, cfg.groups);

            int fallback_users = 0;
            for (std::size_t g = 0; g < cfg.groups.size(); ++g)
                if (!observed.count(static_cast<int>(g)))
                    fallback_users += static_cast<int>(cfg.groups[g].size());
            cost = sounding_cost(SimMode::Clcp, cfg.users, cfg.bandwidth_mhz, cfg.feedback,
                                 cfg.budget, fallback_users);

            const int plevel = pilot_level(st.tree);
            const auto pilot_rus = level_nodes(st.tree, plevel);

            for (std::size_t g = 0; g < cfg.groups.size(); ++g) {
                const auto& links = cfg.groups[g];
                const auto it = observed.find(static_cast<int>(g));
                for (int l : links) record_evm(l);

                if (it == observed.end()) {
                    // No recent transmission in this group: trigger pilots
                    // and fall back to cross-band prediction.
                    for (int l : links) {
                        const RuNode* ru = pilot_rus[l % pilot_rus.size()];
                        Csi partial = st.measure(l);
                        std::fill(partial.observed.begin(), partial.observed.end(), 0);
                        for (int s = ru->span_start; s < ru->span_start + ru->span_tones; ++s)
                            partial.observed[s] = 1;
                        st.cache[l].csi = predict_fullband_crossband(partial, cfg.estimator);
                        st.cache[l].csi.timestamp_us = st.t_us;
                        st.cache[l].valid = true;
                        participants.push_back(l);
                    }
                    continue;
                }

                if (cfg.oracle_predictor) {
                    for (int l : links) {
                        st.cache[l].csi = st.ground_truth(l);
                        st.cache[l].valid = true;
                    }
                    continue;
                }

                if (links.size() == 1) {
                    // Singleton group: cross-band completion of the observed RU.
                    const ObservedView& v = it->second.front();
                    Csi partial = st.measure(v.link);
                    std::fill(partial.observed.begin(), partial.observed.end(), 0);
                    for (int s = v.span_start; s < v.span_start + v.span_tones; ++s)
                        partial.observed[s] = 1;
                    st.cache[v.link].csi = predict_fullband_crossband(partial, cfg.estimator);
                    st.cache[v.link].csi.timestamp_us = st.t_us;
                    st.cache[v.link].valid = true;
                    continue;
                }

                const auto mit = cfg.group_models.find(static_cast<int>(g));
                if (mit == cfg.group_models.end() || !mit->second)
                    throw std::invalid_argument("run_simulation: clcp mode needs a model for group " +
                                                std::to_string(g));
                ClcpModel& model = const_cast<ClcpModel&>(*mit->second);
                const auto& ids = model.config().link_ids;
                if (static_cast<int>(links.size()) != model.config().n_links)
                    throw std::invalid_argument("run_simulation: model group size mismatch");

                std::map<int, PathSet> views;
                for (const ObservedView& v : it->second) {
                    Csi partial = st.measure(v.link);
                    std::fill(partial.observed.begin(), partial.observed.end(), 0);
                    for (int s = v.span_start; s < v.span_start + v.span_tones; ++s)
                        partial.observed[s] = 1;
                    const auto lit = std::find(ids.begin(), ids.end(), v.link);
                    if (lit == ids.end())
                        throw std::invalid_argument("run_simulation: observed link not in model");
                    views[static_cast<int>(lit - ids.begin())] =
                        estimate_paths(partial, cfg.estimator);
                }
                std::vector<int> targets(model.config().n_links);
                for (int i = 0; i < model.config().n_links; ++i) targets[i] = i;
                auto preds = model.predict(views, targets);
                for (const auto& [idx, csi] : preds) {
                    const int link = ids[idx];
                    st.cache[link].csi = csi;
                    st.cache[link].csi.timestamp_us = st.t_us;
                    st.cache[link].valid = true;
                }
            }
            break;
        }
    }

    // Sounding airtime is modeled as control airtime plus the SIFS gaps
    // already included by the cost model.
    ev.airtime_us = cost.airtime_us;
    ev.sounding_us = cost.airtime_us;
    ev.control_us = cost.airtime_us;
    ev.participants = participants;
    st.metrics.control_us += cost.airtime_us;
    st.metrics.sounding_us += cost.airtime_us;
    st.window_at(st.t_us).sounding_fraction += static_cast<double>(cost.airtime_us);
    mark_participants(st, participants, cost.airtime_us, cost.airtime_us);
    st.metrics.events.push_back(std::move(ev));
    return cost.airtime_us;
}

}  // namespace

std::map<int, std::vector<ObservedView>> opportunistic_observe(
    const Schedule& last_packet, const RuTree& tree,
    const std::vector<std::vector<int>>& groups) {
    std::map<int, int> link_to_group;
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (int l : groups[g]) link_to_group[l] = static_cast<int>(g);

    std::map<int, std::vector<ObservedView>> out;
    for (const auto& e : last_packet.entries) {
        const RuNode& n = tree.node(e.node_id);
        for (int uid : e.user_ids) {
            const auto it = link_to_group.find(uid);
            if (it == link_to_group.end()) continue;
            out[it->second].push_back(ObservedView{uid, n.span_start, n.span_tones});
        }
    }
    return out;
}

std::vector<TwtAccount> twt_account(const std::vector<SimEvent>& events,
                                    std::uint64_t duration_us, int user_count,
                                    double tx_power_mw, double wake_power_uw) {
    std::vector<TwtAccount> out(user_count);
    std::vector<std::uint64_t> tx_us(user_count, 0);
    for (int u = 0; u < user_count; ++u) out[u].user = u;
    for (const auto& ev : events)
        for (int u : ev.participants) {
            if (u < 0 || u >= user_count) continue;
            out[u].wake_count += 1;
            out[u].awake_us += ev.airtime_us;
            tx_us[u] += ev.data_us ? ev.data_us : ev.airtime_us;
        }
    for (int u = 0; u < user_count; ++u) {
        out[u].sleep_fraction =
            duration_us == 0
                ? 1.0
                : 1.0 - std::min(1.0, static_cast<double>(out[u].awake_us) / duration_us);
        // Transmit at 135 mW while sending, wake floor of 600 uW while awake.
        out[u].energy_proxy_mj = static_cast<double>(tx_us[u]) * tx_power_mw * 1e-6 +
                                 static_cast<double>(out[u].awake_us - tx_us[u]) *
                                     wake_power_uw * 1e-9;
    }
    return out;
}

SimMetrics run_simulation(const SimConfig& cfg_in) {
    SimConfig cfg = cfg_in;
    if (cfg.users < 1) throw std::invalid_argument("run_simulation: users must be >= 1");
    if (!(cfg.duration_s > 0.0))
        throw std::invalid_argument("run_simulation: duration must be > 0");

    SimState st(cfg);
    st.tree = build_ru_tree(cfg.bandwidth_mhz);
    st.grid = SubcarrierGrid::for_bandwidth(cfg.bandwidth_mhz, cfg.ap_antennas);

    if (cfg.environment) {
        st.env = build_environment(*cfg.environment);
        if (st.env.link_count() != cfg.users)
            throw std::invalid_argument("run_simulation: environment user count mismatch");
    } else {
        st.env = build_environment(
            EnvironmentConfig::generated(cfg.users, cfg.reflectors, cfg.seed, cfg.room));
    }
    if (cfg.groups.empty()) cfg.groups = form_groups(st.env, cfg.group_radius_m);
    st.cfg = &cfg;

    // In-simulation estimation runs the fast profile.
    cfg.estimator.refine_iters = std::min(cfg.estimator.refine_iters, 8);
    cfg.estimator.escape_attempts = std::min(cfg.estimator.escape_attempts, 1);

    cfg.feedback.csi_tones = st.grid.subcarriers;
    cfg.feedback.rx_antennas = cfg.ap_antennas;
    cfg.feedback.tx_antennas = cfg.user_antennas;
    cfg.feedback.coherence_time_s = cfg.coherence_time_s;
    cfg.feedback.feedback_period_s = cfg.coherence_time_s;

    st.cache.resize(cfg.users);
    st.mcs_cache.assign(cfg.users, 0);
    st.bsr_bytes.assign(cfg.users, 0);
    st.traffic_carry.assign(cfg.users, 0);
    st.metrics.mode = cfg.mode;
    st.metrics.users.resize(cfg.users);
    for (int u = 0; u < cfg.users; ++u) st.metrics.users[u].user = u;

    const std::uint64_t duration_us = static_cast<std::uint64_t>(cfg.duration_s * 1e6);
    const std::uint64_t tc_us = static_cast<std::uint64_t>(cfg.coherence_time_s * 1e6);
    const McsTable& mcs_table = McsTable::builtin();

    std::uint64_t last_accrual = 0;

    while (st.t_us < duration_us) {
        st.accrue_traffic(st.t_us, last_accrual);
        last_accrual = st.t_us;

        // Acquisition when any cached CSI is outdated (always on round 0).
        bool stale = false;
        for (int l = 0; l < cfg.users; ++l)
            if (!st.cache[l].valid || st.t_us - st.cache[l].csi.timestamp_us >= tc_us) {
                stale = true;
                break;
            }
        std::uint64_t round_airtime = 0;
        if (stale) {
            round_airtime += acquire(st);
            // Rate adaptation runs on freshly acquired channel knowledge.
            for (int u = 0; u < cfg.users; ++u)
                st.mcs_cache[u] =
                    select_mcs(st.cache[u].csi, cfg.tx_power, cfg.noise_power, mcs_table);
        }

        // Scheduling inputs from the cached (predicted) channels.
        std::vector<SchedUserInfo> users;
        std::map<int, Csi> csis;
        for (int u = 0; u < cfg.users; ++u) {
            if (st.bsr_bytes[u] == 0) continue;
            SchedUserInfo info;
            info.id = u;
            info.bsr_bytes = st.bsr_bytes[u];
            info.mcs = st.mcs_cache[u];
            users.push_back(info);
            csis.emplace(u, st.cache[u].csi);
        }

        if (users.empty()) {
            st.t_us += round_airtime + cfg.idle_step_us;
            st.metrics.idle_us += cfg.idle_step_us;
            st.env = advance(st.env, (round_airtime + cfg.idle_step_us) * 1e-6);
            ++st.round;
            continue;
        }

        const CapacityModel cap(st.tree, csis, cfg.tx_power, cfg.noise_power, cfg.ap_antennas,
                                cfg.user_antennas);
        Schedule sched = run_sra(users, cap, mcs_table, cfg.dq, cfg.t_min_time_s);
        if (sched.user_count() == 0) {
            st.t_us += round_airtime + cfg.idle_step_us;
            st.metrics.idle_us += cfg.idle_step_us;
            st.env = advance(st.env, (round_airtime + cfg.idle_step_us) * 1e-6);
            ++st.round;
            continue;
        }

        // TF + SIFS + data PPDU + SIFS + BlockAck.
        const int k = sched.user_count();
        const std::uint64_t tf_us = cfg.budget.control_airtime_us(cfg.budget.tf_bytes(k));
        const std::uint64_t ba_us = cfg.budget.control_airtime_us(cfg.budget.ba_bytes(k));
        const std::uint64_t data_us = static_cast<std::uint64_t>(cfg.budget.preamble_us) +
                                      static_cast<std::uint64_t>(std::ceil(sched.t_s * 1e6));
        const std::uint64_t sifs2 = 2ULL * cfg.budget.sifs_us;
        const std::uint64_t round_data_airtime = tf_us + ba_us + data_us + sifs2;

        SimEvent ev;
        ev.t_us = st.t_us;
        ev.kind = "data";
        ev.airtime_us = round_data_airtime;
        ev.control_us = tf_us + ba_us;
        ev.data_us = data_us;
        ev.sifs_us = sifs2;

        Rng per_rng = st.master.fork(0x70657200ULL + st.round);
        const std::uint64_t t_end = st.t_us + round_airtime + round_data_airtime;
        for (const auto& e : sched.entries) {
            const RuNode& node = st.tree.node(e.node_id);
            for (std::size_t i = 0; i < e.user_ids.size(); ++i) {
                const int u = e.user_ids[i];
                const McsEntry& mcs = mcs_table.entry(e.user_mcs[i]);
                const double rate = ru_rate_bps(node.span_tones, mcs);
                const std::uint64_t potential_bits =
                    static_cast<std::uint64_t>(rate * sched.t_s);
                const std::uint64_t sent_bits = std::min(st.bsr_bytes[u] * 8, potential_bits);
                if (sent_bits == 0) continue;

                // Packet success drawn against the true channel now.
                const Csi gt = st.ground_truth(u);
                const std::vector<double> all_snrs =
                    snr_per_subcarrier(gt, cfg.tx_power, cfg.noise_power);
                const std::vector<double> span_snrs(
                    all_snrs.begin() + node.span_start,
                    all_snrs.begin() + node.span_start + node.span_tones);
                const double per =
                    packet_error_rate(mcs, span_snrs, static_cast<std::int64_t>(sent_bits));
                const bool success = per_rng.uniform() >= per;

                PerRecord pr;
                pr.t_us = st.t_us;
                pr.user = u;
                pr.mcs = mcs.index;
                pr.per = per;
                pr.success = success;
                st.metrics.per_records.push_back(pr);

                ev.participants.push_back(u);
                if (success) {
                    const std::uint64_t bytes = sent_bits / 8;
                    st.bsr_bytes[u] -= std::min(st.bsr_bytes[u], bytes);
                    st.metrics.delivered_bits += sent_bits;
                    st.metrics.users[u].delivered_bytes += bytes;
                    st.window_at(t_end).throughput_bps += static_cast<double>(sent_bits);
                }
            }
        }

        st.metrics.control_us += tf_us + ba_us;
        st.metrics.data_us += data_us;
        st.metrics.sifs_us += sifs2;
        mark_participants(st, ev.participants, round_data_airtime, data_us);
        st.metrics.events.push_back(ev);

        st.last_data_packet = sched;
        st.have_data_packet = true;

        st.t_us = t_end;
        st.env = advance(st.env, (round_airtime + round_data_airtime) * 1e-6);
        ++st.round;
    }

    st.metrics.duration_us = st.t_us;
    // Windows: delivered bits -> bps, sounding airtime -> fraction.
    for (auto& w : st.metrics.windows) {
        w.throughput_bps = w.throughput_bps / 0.5;
        w.sounding_fraction = std::min(1.0, w.sounding_fraction / 500000.0);
    }
    for (auto& u : st.metrics.users)
        u.sleep_fraction =
            1.0 - std::min(1.0, static_cast<double>(u.awake_us) / st.metrics.duration_us);
    return st.metrics;
}

}  // namespace clcp
