// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include "clcp/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace clcp {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text, const std::string& origin) {
    KeyValueConfig cfg;
    cfg.origin_ = origin.empty() ? "<string>" : origin;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(cfg.origin_ + ":" + std::to_string(line_no) +
                                     ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error(cfg.origin_ + ":" + std::to_string(line_no) + ": empty key");
        if (cfg.values_.count(key))
            throw std::runtime_error(cfg.origin_ + ": duplicate key " + key);
        cfg.values_[key] = value;
        cfg.order_.push_back(key);
    }
    const auto sv = cfg.values_.find("schema_version");
    if (sv == cfg.values_.end())
        throw std::runtime_error(cfg.origin_ + ": missing schema_version");
    if (sv->second != "1")
        throw std::runtime_error(cfg.origin_ + ": unsupported schema_version " + sv->second);
    cfg.consumed_.insert("schema_version");
    return cfg;
}

bool KeyValueConfig::has(const std::string& key) const { return values_.count(key) != 0; }

const std::string& KeyValueConfig::raw(const std::string& key) {
    const auto it = values_.find(key);
    if (it == values_.end())
        throw std::runtime_error(origin_ + ": missing required key " + key);
    consumed_.insert(key);
    return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key) { return raw(key); }

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    return raw(key);
}

std::int64_t KeyValueConfig::get_int(const std::string& key) {
    const std::string& v = raw(key);
    std::size_t pos = 0;
    const std::int64_t out = std::stoll(v, &pos);
    if (pos != v.size()) throw std::runtime_error(origin_ + ": bad integer for " + key);
    return out;
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) {
    if (!has(key)) return fallback;
    return get_int(key);
}

double KeyValueConfig::get_double(const std::string& key) {
    const std::string& v = raw(key);
    std::size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::runtime_error(origin_ + ": bad number for " + key);
    return out;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return get_double(key);
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const std::string v = raw(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::runtime_error(origin_ + ": bad boolean for " + key);
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key) {
    std::istringstream ss(raw(key));
    std::vector<double> out;
    double v;
    while (ss >> v) out.push_back(v);
    if (!ss.eof()) throw std::runtime_error(origin_ + ": bad number list for " + key);
    return out;
}

std::vector<std::string> KeyValueConfig::keys_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& k : order_)
        if (k.rfind(prefix, 0) == 0) out.push_back(k);
    return out;
}

void KeyValueConfig::finish() const {
    for (const auto& [k, v] : values_) {
        (void)v;
        if (!consumed_.count(k))
            throw std::runtime_error(origin_ + ": unknown key " + k);
    }
}

}  // namespace clcp
