// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include "cli_common.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

namespace clcp::cli {

int log_level() {
    static const int level = [] {
        const char* v = std::getenv("CLCP_LOG");
        if (!v) return 0;
        try {
            return std::stoi(v);
        } catch (...) {
            return 0;
        }
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[clcp] " << msg << "\n";
}

void log_debug(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "[clcp:debug] " << msg << "\n";
}

void ensure_dir(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw DataError("cannot create output directory " + path + ": " + ec.message());
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

namespace {

Vec3 vec3_of(const std::vector<double>& v, const std::string& key) {
    if (v.size() != 3) throw DataError("config: " + key + " needs three numbers");
    return {v[0], v[1], v[2]};
}

}  // namespace

EnvFileConfig parse_env_config(const std::string& path, std::uint64_t seed_override,
                               bool has_seed_override) {
    KeyValueConfig kv = [&] {
        try {
            return KeyValueConfig::parse_file(path);
        } catch (const std::exception& e) {
            throw DataError(e.what());
        }
    }();
    try {
        EnvFileConfig out;
        const std::string kind = kv.get_string("kind");
        if (kind != "env") throw DataError(path + ": kind must be 'env'");

        out.env.rng_seed = static_cast<std::uint64_t>(kv.get_int("seed", 1));
        if (has_seed_override) out.env.rng_seed = seed_override;
        out.bandwidth_mhz = static_cast<int>(kv.get_int("bandwidth_mhz", 20));
        out.ap_antennas = static_cast<int>(kv.get_int("ap_antennas", 2));
        out.center_freq_hz = kv.get_double("center_freq_ghz", 5.25) * 1e9;
        out.samples = static_cast<int>(kv.get_int("samples", 1000));
        out.sample_period_us = static_cast<std::uint32_t>(kv.get_int("sample_period_us", 5000));

        if (kv.has("room")) {
            const auto r = kv.get_doubles("room");
            if (r.size() != 3) throw DataError("config: room needs three extents");
            out.env.room.lo = {0.0, 0.0, 0.0};
            out.env.room.hi = {r[0], r[1], r[2]};
        }
        if (kv.has("ap")) out.env.ap_position = vec3_of(kv.get_doubles("ap"), "ap");
        out.env.max_paths = static_cast<int>(kv.get_int("max_paths", 8));
        out.env.nlos_extra_db = kv.get_double("nlos_extra_db", 10.0);
        if (kv.has("speed_range")) {
            const auto s = kv.get_doubles("speed_range");
            if (s.size() != 2) throw DataError("config: speed_range needs two numbers");
            out.env.speed_range_lo = s[0];
            out.env.speed_range_hi = s[1];
        }

        // Explicit users, or generated placement.
        const auto user_keys = kv.keys_with_prefix("user.");
        if (!user_keys.empty()) {
            for (int i = 0;; ++i) {
                const std::string prefix = "user." + std::to_string(i);
                if (!kv.has(prefix + ".pos")) break;
                UserSpec u;
                u.id = i;
                u.position = vec3_of(kv.get_doubles(prefix + ".pos"), prefix + ".pos");
                u.antennas = static_cast<int>(kv.get_int(prefix + ".antennas", 1));
                u.max_bandwidth_mhz =
                    static_cast<int>(kv.get_int(prefix + ".max_bandwidth_mhz", 160));
                u.nlos = kv.get_bool(prefix + ".nlos", false);
                out.env.users.push_back(u);
            }
            if (out.env.users.empty()) throw DataError(path + ": user.N.pos keys malformed");
        } else {
            out.generated_users = true;
            out.generated_user_count = static_cast<int>(kv.get_int("users"));
        }

        const auto refl_keys = kv.keys_with_prefix("reflector.");
        if (!refl_keys.empty()) {
            for (int i = 0;; ++i) {
                const std::string prefix = "reflector." + std::to_string(i);
                if (!kv.has(prefix + ".pos")) break;
                MovingReflectorSpec r;
                r.position = vec3_of(kv.get_doubles(prefix + ".pos"), prefix + ".pos");
                if (kv.has(prefix + ".vel"))
                    r.velocity = vec3_of(kv.get_doubles(prefix + ".vel"), prefix + ".vel");
                r.reflectivity = kv.get_double(prefix + ".reflectivity", 0.9);
                out.env.moving_reflectors.push_back(r);
            }
        } else {
            out.generated_reflectors = static_cast<int>(kv.get_int("reflectors", 0));
        }

        // Static scatterers: scatterer.<link>.<index> = d a phi
        for (const auto& key : kv.keys_with_prefix("scatterer.")) {
            std::istringstream ss(key.substr(10));
            int link = 0, idx = 0;
            char dot = 0;
            if (!(ss >> link >> dot >> idx) && dot != '.')
                throw DataError("config: malformed scatterer key " + key);
            const auto v = kv.get_doubles(key);
            if (v.size() != 3) throw DataError("config: " + key + " needs d a phi");
            if (static_cast<int>(out.env.static_scatterers.size()) <= link)
                out.env.static_scatterers.resize(link + 1);
            out.env.static_scatterers[link].push_back({v[0], v[1], v[2]});
        }

        kv.finish();

        if (out.generated_users) {
            EnvironmentConfig gen = EnvironmentConfig::generated(
                out.generated_user_count, out.generated_reflectors, out.env.rng_seed,
                out.env.room);
            gen.max_paths = out.env.max_paths;
            gen.nlos_extra_db = out.env.nlos_extra_db;
            gen.speed_range_lo = out.env.speed_range_lo;
            gen.speed_range_hi = out.env.speed_range_hi;
            if (!out.env.moving_reflectors.empty())
                gen.moving_reflectors = out.env.moving_reflectors;
            out.env = gen;
        }
        return out;
    } catch (const DataError&) {
        throw;
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }
}

SubcarrierGrid grid_for(const EnvFileConfig& cfg) {
    return SubcarrierGrid::for_bandwidth(cfg.bandwidth_mhz, cfg.ap_antennas,
                                         cfg.center_freq_hz);
}

void write_env_snapshot(const EnvFileConfig& cfg, const Environment& env,
                        const std::string& path) {
    nlohmann::ordered_json j;
    j["seed"] = env.config.rng_seed;
    j["bandwidth_mhz"] = cfg.bandwidth_mhz;
    j["ap_antennas"] = cfg.ap_antennas;
    j["center_freq_hz"] = cfg.center_freq_hz;
    j["sample_period_us"] = cfg.sample_period_us;
    j["ap"] = {env.config.ap_position.x, env.config.ap_position.y, env.config.ap_position.z};
    auto& users = j["users"] = nlohmann::ordered_json::array();
    for (const auto& u : env.config.users)
        users.push_back({{"id", u.id},
                         {"pos", {u.position.x, u.position.y, u.position.z}},
                         {"nlos", u.nlos}});
    auto& reflectors = j["reflectors"] = nlohmann::ordered_json::array();
    for (const auto& r : env.reflectors)
        reflectors.push_back({{"pos", {r.position.x, r.position.y, r.position.z}},
                              {"vel", {r.velocity.x, r.velocity.y, r.velocity.z}},
                              {"reflectivity", r.reflectivity}});
    auto& groups = j["groups"] = nlohmann::ordered_json::array();
    for (const auto& g : form_groups(env)) groups.push_back(g);

    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << j.dump(2) << '\n';
}

std::vector<std::vector<int>> parse_groups(const std::string& text) {
    std::vector<std::vector<int>> groups;
    std::istringstream ss(text);
    std::string part;
    while (std::getline(ss, part, '|')) {
        std::istringstream ps(part);
        std::vector<int> g;
        int id;
        while (ps >> id) g.push_back(id);
        if (!g.empty()) groups.push_back(g);
    }
    return groups;
}

}  // namespace clcp::cli
