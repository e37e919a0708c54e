// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "clcp/manifest.hpp"
#include "cli_common.hpp"
#include "commands.hpp"

namespace clcp::cli {

namespace {

struct ModeSummary {
    std::string mode;
    double throughput_bps = 0.0;
    double sounding_fraction = 0.0;
    double evm_median_db = 0.0;
    bool has_evm = false;
    double per_mean = 0.0;
    bool has_per = false;
    double wake_mean = 0.0;
    double sleep_mean = 0.0;
};

ModeSummary load_summary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("report: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
        ModeSummary s;
        s.mode = j.at("mode").get<std::string>();
        s.throughput_bps = j.at("throughput_bps").get<double>();
        s.sounding_fraction = j.at("sounding_fraction").get<double>();
        if (j.contains("evm")) {
            s.evm_median_db = j["evm"].at("median_db").get<double>();
            s.has_evm = true;
        }
        if (j.contains("per")) {
            s.per_mean = j["per"].at("mean").get<double>();
            s.has_per = true;
        }
        const auto& users = j.at("users");
        for (const auto& u : users) {
            s.wake_mean += u.at("wake_count").get<double>();
            s.sleep_mean += u.at("sleep_fraction").get<double>();
        }
        if (!users.empty()) {
            s.wake_mean /= users.size();
            s.sleep_mean /= users.size();
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("report: " + path + ": schema mismatch: " + e.what());
    }
}

}  // namespace

// Comparison table across modes: throughput means, ratios vs baseline, EVM
// and PER digests, TWT summaries.
int cmd_report(const ReportArgs& args) {
    if (args.inputs.empty()) throw DataError("report: at least one summary file required");
    ensure_dir(args.out_dir);

    std::vector<ModeSummary> rows;
    RunManifest manifest;
    manifest.command = "report";
    manifest.output_dir = args.out_dir;
    for (const auto& path : args.inputs) {
        rows.push_back(load_summary(path));
        manifest.add_input(path);
    }

    // Baseline reference: the baseline-mode row when present, else the
    // first row (a single file reports ratio 1.0 against itself).
    const ModeSummary* reference = &rows.front();
    for (const auto& r : rows)
        if (r.mode == "baseline") {
            reference = &r;
            break;
        }

    const std::string out_path = join_path(args.out_dir, "report.csv");
    std::ofstream out(out_path);
    if (!out) throw DataError("report: cannot write " + out_path);
    out << "mode,throughput_bps,throughput_ratio_vs_baseline,sounding_fraction,"
           "evm_median_db,per_mean,twt_wake_mean,sleep_fraction_mean\n";
    for (const auto& r : rows) {
        const double ratio = reference->throughput_bps > 0.0
                                 ? r.throughput_bps / reference->throughput_bps
                                 : 0.0;
        out << r.mode << ',' << r.throughput_bps << ',' << ratio << ','
            << r.sounding_fraction << ',';
        if (r.has_evm)
            out << r.evm_median_db;
        out << ',';
        if (r.has_per)
            out << r.per_mean;
        out << ',' << r.wake_mean << ',' << r.sleep_mean << '\n';
    }
    out.close();

    manifest.add_output(out_path);
    manifest.write(join_path(args.out_dir, "manifest_report.json"));
    return 0;
}

}  // namespace clcp::cli
