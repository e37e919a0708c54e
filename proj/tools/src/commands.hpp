// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace clcp::cli {

struct CommonArgs {
    std::string config;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool has_seed = false;
};

int cmd_synth(const CommonArgs& args);

struct TrainArgs : CommonArgs {
    std::string trace;
    std::string resume;  // checkpoint file to continue from
};
int cmd_train(const TrainArgs& args);

struct SimulateArgs : CommonArgs {
    std::string model;
    std::string mode;       // empty = from config
    int users = 0;          // 0 = from config
    int bandwidth_mhz = 0;  // 0 = from config
};
int cmd_simulate(const SimulateArgs& args);

struct ReportArgs {
    std::vector<std::string> inputs;  // summary JSON files
    std::string out_dir = ".";
};
int cmd_report(const ReportArgs& args);

struct LatentsArgs {
    std::string model;
    std::string trace;
    std::string out_dir = ".";
    int instants = 250;
};
int cmd_latents(const LatentsArgs& args);

}  // namespace clcp::cli
