// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace clcp {

// Every CLI command writes a manifest next to its outputs: the command,
// configuration, seeds and content hashes of every input and output, enough
// to replay the run bit-for-bit.
struct RunManifest {
    std::string command;
    std::string config_path;
    std::vector<std::uint64_t> seeds;
    std::string output_dir;
    std::map<std::string, std::string> parameters;     // echoed settings
    std::map<std::string, std::string> input_hashes;   // path -> sha256
    std::map<std::string, std::string> output_hashes;  // path -> sha256

    void add_input(const std::string& path);
    void add_output(const std::string& path);
    void write(const std::string& path) const;
};

}  // namespace clcp
