// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include "clcp/environment.hpp"

#include <cmath>
#include <stdexcept>

#include "clcp/rng.hpp"

namespace clcp {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Free-space 1/d amplitude law, clamped into (0, 1].
double free_space_amplitude(double d) { return 1.0 / std::max(d, 1.0); }

// Arrival angle of the last inbound segment (source -> AP) against the array
// axis; broadside is pi/2.
double arrival_angle(const Vec3& ap, const Vec3& axis, const Vec3& source) {
    const Vec3 inbound = (source - ap).normalized();
    double c = inbound.dot(axis.normalized());
    c = std::max(-1.0, std::min(1.0, c));
    return std::acos(c);
}

// One axis of an elastic bounce: fold the free-flight position into the
// [lo, hi] interval and fix the velocity sign to match the fold.
void bounce_axis(double& pos, double& vel, double lo, double hi, double dt) {
    const double w = hi - lo;
    if (w <= 0.0) {
        pos = lo;
        vel = 0.0;
        return;
    }
    double t = pos - lo + vel * dt;
    const double period = 2.0 * w;
    t = std::fmod(t, period);
    if (t < 0.0) t += period;
    if (t <= w) {
        pos = lo + t;
        vel = std::abs(vel);
    } else {
        pos = lo + period - t;
        vel = -std::abs(vel);
    }
}

}  // namespace

EnvironmentConfig EnvironmentConfig::generated(int count, int reflectors, std::uint64_t seed,
                                               const RoomBox& room) {
    if (count < 1) throw std::invalid_argument("EnvironmentConfig: user count must be >= 1");
    EnvironmentConfig cfg;
    cfg.room = room;
    cfg.rng_seed = seed;
    cfg.ap_position = {room.lo.x + 0.05 * (room.hi.x - room.lo.x),
                       0.5 * (room.lo.y + room.hi.y), room.lo.z + 2.0};
    Rng rng = Rng(seed).fork(0x656e76);
    cfg.users.reserve(count);
    for (int i = 0; i < count; ++i) {
        UserSpec u;
        u.id = i;
        u.position = {rng.uniform(room.lo.x + 1.0, room.hi.x - 0.5),
                      rng.uniform(room.lo.y + 0.5, room.hi.y - 0.5), room.lo.z + 1.0};
        cfg.users.push_back(u);
    }
    for (int r = 0; r < reflectors; ++r) {
        MovingReflectorSpec m;
        m.position = {rng.uniform(room.lo.x + 1.0, room.hi.x - 1.0),
                      rng.uniform(room.lo.y + 1.0, room.hi.y - 1.0), room.lo.z + 1.2};
        m.velocity = {0.0, 0.0, 0.0};  // drawn at build time
        m.reflectivity = 0.9;
        cfg.moving_reflectors.push_back(m);
    }
    return cfg;
}

Environment build_environment(const EnvironmentConfig& config) {
    if (config.users.empty())
        throw std::invalid_argument("build_environment: at least one user required");
    if (config.max_paths < 1)
        throw std::invalid_argument("build_environment: max_paths must be >= 1");

    Environment env;
    env.config = config;
    Rng rng = Rng(config.rng_seed).fork(0x627569);

    env.static_paths.resize(config.users.size());
    for (std::size_t li = 0; li < config.users.size(); ++li) {
        const auto& user = config.users[li];
        const double nlos_scale =
            user.nlos ? std::pow(10.0, -config.nlos_extra_db / 20.0) : 1.0;
        const double d_direct = distance(config.ap_position, user.position);
        if (d_direct <= 0.0)
            throw std::invalid_argument("build_environment: user at the AP position");

        // Direct (dominant) path from plain geometry.
        StaticPath direct;
        direct.path.d = d_direct;
        direct.path.theta = arrival_angle(config.ap_position, config.array_axis, user.position);
        direct.path.a = std::min(1.0, free_space_amplitude(d_direct) * nlos_scale);
        direct.path.phi = 0.0;
        env.static_paths[li].push_back(direct);

        if (li < config.static_scatterers.size()) {
            Rng link_rng = rng.fork(0x1000 + li);
            for (const auto& sc : config.static_scatterers[li]) {
                if (!(sc.d >= 0.0))
                    throw std::invalid_argument("build_environment: negative scatterer distance");
                if (!(sc.a > 0.0 && sc.a <= 1.0))
                    throw std::invalid_argument(
                        "build_environment: scatterer attenuation outside (0, 1]");
                StaticPath p;
                p.path.d = sc.d;
                p.path.a = std::min(1.0, sc.a * nlos_scale);
                p.path.phi = wrap_phase(sc.phi);
                // The configuration carries no geometry for extra scatterers;
                // the arrival angle is a seeded draw fixed at build time.
                p.path.theta = link_rng.uniform(0.0, kPi);
                env.static_paths[li].push_back(p);
            }
        }
    }

    Rng refl_rng = rng.fork(0x7265666c);
    for (const auto& spec : config.moving_reflectors) {
        if (!(spec.reflectivity > 0.0 && spec.reflectivity <= 1.0))
            throw std::invalid_argument("build_environment: reflectivity outside (0, 1]");
        ReflectorState st;
        st.position = spec.position;
        st.reflectivity = spec.reflectivity;
        st.phase = refl_rng.uniform(-kPi, kPi);
        if (spec.velocity.norm() > 0.0) {
            st.velocity = spec.velocity;
        } else {
            const double speed =
                refl_rng.uniform(config.speed_range_lo, config.speed_range_hi);
            const double heading = refl_rng.uniform(0.0, 2.0 * kPi);
            st.velocity = {speed * std::cos(heading), speed * std::sin(heading), 0.0};
        }
        env.reflectors.push_back(st);
    }
    return env;
}

Environment advance(const Environment& env, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("advance: dt must be > 0");
    Environment out = env;
    const auto& room = env.config.room;
    for (auto& r : out.reflectors) {
        bounce_axis(r.position.x, r.velocity.x, room.lo.x, room.hi.x, dt);
        bounce_axis(r.position.y, r.velocity.y, room.lo.y, room.hi.y, dt);
        bounce_axis(r.position.z, r.velocity.z, room.lo.z, room.hi.z, dt);
    }
    out.time_s = env.time_s + dt;
    return out;
}

PathSet paths_for_link(const Environment& env, int link_id) {
    if (link_id < 0 || link_id >= env.link_count())
        throw std::invalid_argument("paths_for_link: unknown link id");

    PathSet ps;
    ps.capacity = env.config.max_paths;
    for (const auto& sp : env.static_paths[link_id]) ps.paths.push_back(sp.path);

    const auto& user = env.config.users[link_id];
    const double nlos_scale =
        user.nlos ? std::pow(10.0, -env.config.nlos_extra_db / 20.0) : 1.0;
    for (const auto& r : env.reflectors) {
        Path p;
        p.d = distance(env.config.ap_position, r.position) +
              distance(r.position, user.position);
        p.a = std::min(1.0, r.reflectivity * free_space_amplitude(p.d) * nlos_scale);
        p.theta = arrival_angle(env.config.ap_position, env.config.array_axis, r.position);
        p.phi = r.phase;
        ps.paths.push_back(p);
    }
    ps.canonicalize();
    ps.validate();
    return ps;
}

std::vector<std::vector<int>> form_groups(const Environment& env, double radius_m) {
    const int n = env.link_count();
    std::vector<int> parent(n);
    for (int i = 0; i < n; ++i) parent[i] = i;
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (distance(env.config.users[i].position, env.config.users[j].position) <= radius_m)
                parent[find(i)] = find(j);
    std::vector<std::vector<int>> groups;
    std::vector<int> root_to_group(n, -1);
    for (int i = 0; i < n; ++i) {
        const int r = find(i);
        if (root_to_group[r] < 0) {
            root_to_group[r] = static_cast<int>(groups.size());
            groups.emplace_back();
        }
        groups[root_to_group[r]].push_back(i);
    }
    return groups;
}

}  // namespace clcp
