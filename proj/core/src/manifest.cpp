// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include "clcp/manifest.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "clcp/sha256.hpp"

namespace clcp {

void RunManifest::add_input(const std::string& path) {
    input_hashes[path] = sha256_file_hex(path);
}

void RunManifest::add_output(const std::string& path) {
    output_hashes[path] = sha256_file_hex(path);
}

void RunManifest::write(const std::string& path) const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["config"] = config_path;
    j["seeds"] = seeds;
    j["output_dir"] = output_dir;
    j["parameters"] = parameters;
    j["inputs"] = input_hashes;
    j["outputs"] = output_hashes;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("manifest: cannot write " + path);
    out << j.dump(2) << '\n';
}

}  // namespace clcp
