// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clcp/geometry.hpp"
#include "clcp/paths.hpp"

namespace clcp {

// One radio link endpoint (a user/sensor). `nlos` applies the configured
// extra wall attenuation to every path of the link.
struct UserSpec {
    int id = 0;
    Vec3 position;
    int antennas = 1;
    int max_bandwidth_mhz = 160;
    bool nlos = false;
};

// Static extra scatterer for one link, configured directly as a path.
// The arrival angle is not part of the configuration; it is drawn
// deterministically from the environment seed when the environment is built.
struct StaticScattererSpec {
    double d = 0.0;    // path length, meters
    double a = 0.5;    // amplitude attenuation in (0, 1]
    double phi = 0.0;  // reflection phase
};

struct MovingReflectorSpec {
    Vec3 position;
    Vec3 velocity;            // zero selects a seeded speed in speed_range
    double reflectivity = 0.9;  // in (0, 1]
};

struct EnvironmentConfig {
    Vec3 ap_position{0.0, 0.0, 2.0};
    Vec3 array_axis{1.0, 0.0, 0.0};  // uniform linear array direction at the AP
    std::vector<UserSpec> users;
    // Outer index = link id order; may be shorter than users (missing = none).
    std::vector<std::vector<StaticScattererSpec>> static_scatterers;
    std::vector<MovingReflectorSpec> moving_reflectors;
    RoomBox room;
    std::uint64_t rng_seed = 1;
    int max_paths = 8;                 // L
    double speed_range_lo = 1.0;       // m/s, for auto-drawn reflector speeds
    double speed_range_hi = 2.0;
    double nlos_extra_db = 10.0;       // extra attenuation for NLoS links

    // Convenience generator: places `count` users deterministically in the
    // room (seeded) and `reflectors` moving reflectors, all LoS.
    static EnvironmentConfig generated(int count, int reflectors, std::uint64_t seed,
                                       const RoomBox& room = RoomBox{});
};

// Materialized static path with its build-time arrival angle.
struct StaticPath {
    Path path;
};

struct ReflectorState {
    Vec3 position;
    Vec3 velocity;
    double reflectivity = 0.9;
    double phase = 0.0;  // reflection phase, drawn at build time
};

// Ground-truth scene: static per-link paths plus moving reflectors shared by
// every link. Immutable snapshots; `advance` returns the scene a time step
// later.
struct Environment {
    EnvironmentConfig config;
    std::vector<std::vector<StaticPath>> static_paths;  // per link
    std::vector<ReflectorState> reflectors;
    double time_s = 0.0;

    int link_count() const { return static_cast<int>(config.users.size()); }
};

// Deterministic for a given config/seed. Throws on zero users or invalid
// geometry/attenuations.
Environment build_environment(const EnvironmentConfig& config);

// Moves reflectors by velocity*dt with elastic bounces off the room walls.
// Static scatterers are unchanged. dt must be > 0.
Environment advance(const Environment& env, double dt);

// Combines the link's static paths with the current reflector-induced paths,
// truncated to the strongest L. Throws on an unknown link id.
PathSet paths_for_link(const Environment& env, int link_id);

// Groups link ids by mutual proximity (single-link chains within
// `radius_m`); used to form one prediction model per cluster of nearby
// users.
std::vector<std::vector<int>> form_groups(const Environment& env, double radius_m = 4.0);

}  // namespace clcp
