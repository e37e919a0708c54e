// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace clcp {

// One propagation path: arrival angle at the AP array (radians, broadside at
// pi/2), total path length in meters, amplitude attenuation in (0, 1] and
// reflection phase in [-pi, pi].
struct Path {
    double theta = 0.0;
    double d = 0.0;
    double a = 1.0;
    double phi = 0.0;
};

// Wraps an angle into [-pi, pi].
inline double wrap_phase(double phi) {
    const double two_pi = 2.0 * 3.14159265358979323846;
    phi = std::fmod(phi + 3.14159265358979323846, two_pi);
    if (phi < 0.0) phi += two_pi;
    return phi - 3.14159265358979323846;
}

// A set of up to `capacity` paths, kept in canonical order (descending
// amplitude, ties broken by path length then angle).
struct PathSet {
    std::vector<Path> paths;
    int capacity = 8;

    static bool canonical_less(const Path& a, const Path& b) {
        if (a.a != b.a) return a.a > b.a;
        if (a.d != b.d) return a.d < b.d;
        return a.theta < b.theta;
    }

    // Sorts into canonical order and truncates to the strongest `capacity`.
    void canonicalize() {
        for (auto& p : paths) p.phi = wrap_phase(p.phi);
        std::stable_sort(paths.begin(), paths.end(), canonical_less);
        if (static_cast<int>(paths.size()) > capacity) paths.resize(capacity);
    }

    void validate() const {
        if (capacity < 1) throw std::invalid_argument("PathSet: capacity must be >= 1");
        if (static_cast<int>(paths.size()) > capacity)
            throw std::invalid_argument("PathSet: more paths than capacity");
        for (const auto& p : paths) {
            if (!(p.a > 0.0 && p.a <= 1.0))
                throw std::invalid_argument("PathSet: attenuation outside (0, 1]");
            if (!(p.d >= 0.0)) throw std::invalid_argument("PathSet: negative path length");
            if (!(p.theta >= 0.0 && p.theta <= 3.14159265358979323846 + 1e-12))
                throw std::invalid_argument("PathSet: arrival angle outside [0, pi]");
            if (!std::isfinite(p.phi)) throw std::invalid_argument("PathSet: non-finite phase");
        }
    }

    bool empty() const { return paths.empty(); }
    int size() const { return static_cast<int>(paths.size()); }
};

}  // namespace clcp
