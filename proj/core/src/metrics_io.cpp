// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include "clcp/metrics_io.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace clcp {

namespace {

nlohmann::ordered_json summary_json(const SimMetrics& m) {
    nlohmann::ordered_json j;
    j["mode"] = sim_mode_name(m.mode);
    j["duration_us"] = m.duration_us;
    j["delivered_bits"] = m.delivered_bits;
    j["offered_bits"] = m.offered_bits;
    j["throughput_bps"] =
        m.duration_us ? static_cast<double>(m.delivered_bits) * 1e6 / m.duration_us : 0.0;
    j["airtime"] = {{"control_us", m.control_us},
                    {"data_us", m.data_us},
                    {"sifs_us", m.sifs_us},
                    {"idle_us", m.idle_us},
                    {"sounding_us", m.sounding_us}};
    j["sounding_fraction"] =
        m.duration_us ? static_cast<double>(m.sounding_us) / m.duration_us : 0.0;

    auto& users = j["users"] = nlohmann::ordered_json::array();
    for (const auto& u : m.users) {
        users.push_back({{"user", u.user},
                         {"offered_bytes", u.offered_bytes},
                         {"delivered_bytes", u.delivered_bytes},
                         {"wake_count", u.wake_count},
                         {"awake_us", u.awake_us},
                         {"tx_us", u.tx_us},
                         {"sleep_fraction", u.sleep_fraction}});
    }

    if (!m.evm_records.empty()) {
        std::vector<double> evms;
        evms.reserve(m.evm_records.size());
        for (const auto& r : m.evm_records) evms.push_back(r.evm_db);
        std::sort(evms.begin(), evms.end());
        j["evm"] = {{"count", evms.size()},
                    {"median_db", evms[evms.size() / 2]},
                    {"p10_db", evms[evms.size() / 10]},
                    {"p90_db", evms[(evms.size() * 9) / 10]}};
    }
    if (!m.per_records.empty()) {
        double mean = 0.0;
        std::int64_t failures = 0;
        for (const auto& r : m.per_records) {
            mean += r.per;
            failures += r.success ? 0 : 1;
        }
        j["per"] = {{"count", m.per_records.size()},
                    {"mean", mean / m.per_records.size()},
                    {"failures", failures}};
    }

    auto& windows = j["windows"] = nlohmann::ordered_json::array();
    for (const auto& w : m.windows)
        windows.push_back({{"start_ms", w.start_ms},
                           {"throughput_bps", w.throughput_bps},
                           {"sounding_fraction", w.sounding_fraction}});
    return j;
}

}  // namespace

void write_metrics_csv(const SimMetrics& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("metrics: cannot write " + path);
    out << "window_start_ms,mode,throughput_bps,sounding_fraction\n";
    for (const auto& w : m.windows)
        out << w.start_ms << ',' << sim_mode_name(m.mode) << ',' << w.throughput_bps << ','
            << w.sounding_fraction << '\n';
}

void write_summary_json(const SimMetrics& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("metrics: cannot write " + path);
    out << summary_json(m).dump(2) << '\n';
}

void write_events_ndjson(const SimMetrics& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("metrics: cannot write " + path);
    for (const auto& ev : m.events) {
        nlohmann::ordered_json j;
        j["t_us"] = ev.t_us;
        j["kind"] = ev.kind;
        j["airtime_us"] = ev.airtime_us;
        j["sounding_us"] = ev.sounding_us;
        j["data_us"] = ev.data_us;
        j["control_us"] = ev.control_us;
        j["sifs_us"] = ev.sifs_us;
        j["participants"] = ev.participants;
        out << j.dump() << '\n';
    }
}

}  // namespace clcp
