// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace clcp {

// Documented key-value configuration text:
//
//   # comment
//   schema_version = 1
//   kind = sim
//   users = 64
//
// Keys are dotted lowercase identifiers. Parsing is fail-fast: the file must
// declare schema_version = 1, and every key must be consumed by the reader
// (unknown keys are errors, surfaced through finish()).
class KeyValueConfig {
  public:
    static KeyValueConfig parse_file(const std::string& path);
    static KeyValueConfig parse_string(const std::string& text, const std::string& origin = "");

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key);
    std::string get_string(const std::string& key, const std::string& fallback);
    std::int64_t get_int(const std::string& key);
    std::int64_t get_int(const std::string& key, std::int64_t fallback);
    double get_double(const std::string& key);
    double get_double(const std::string& key, double fallback);
    bool get_bool(const std::string& key, bool fallback);
    std::vector<double> get_doubles(const std::string& key);  // whitespace separated

    // Keys with the given prefix, in file order (for list-like sections).
    std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

    // Throws if any key was never read.
    void finish() const;

    const std::string& origin() const { return origin_; }

  private:
    std::string origin_;
    std::map<std::string, std::string> values_;
    std::vector<std::string> order_;
    mutable std::set<std::string> consumed_;

    const std::string& raw(const std::string& key);
};

}  // namespace clcp
