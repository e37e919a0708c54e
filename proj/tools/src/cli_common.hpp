// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "clcp/config.hpp"
#include "clcp/environment.hpp"
#include "clcp/csi.hpp"

namespace clcp::cli {

// Exit codes: 0 success, 2 usage, 3 data error, 4 numerical failure.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// CLCP_LOG: 0 = warnings only (default), 1 = info, 2 = debug.
int log_level();
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

void ensure_dir(const std::string& path);
std::string join_path(const std::string& dir, const std::string& name);

// Environment + grid description shared by synth and simulate.
struct EnvFileConfig {
    EnvironmentConfig env;
    int bandwidth_mhz = 20;
    int ap_antennas = 2;
    double center_freq_hz = 5.25e9;
    int samples = 1000;
    std::uint32_t sample_period_us = 5000;
    bool generated_users = false;
    int generated_user_count = 0;
    int generated_reflectors = 0;
};

// Parses a kind = env configuration; throws DataError on any problem.
EnvFileConfig parse_env_config(const std::string& path, std::uint64_t seed_override,
                               bool has_seed_override);

SubcarrierGrid grid_for(const EnvFileConfig& cfg);

// Writes the environment snapshot (positions, groups, grid) as JSON.
void write_env_snapshot(const EnvFileConfig& cfg, const Environment& env,
                        const std::string& path);

std::vector<std::vector<int>> parse_groups(const std::string& text);

}  // namespace clcp::cli
