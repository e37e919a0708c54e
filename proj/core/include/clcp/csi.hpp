// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace clcp {

inline constexpr double kSpeedOfLight = 299792458.0;   // m/s
inline constexpr double kSubcarrierSpacingHz = 78125.0;  // 802.11ax tone spacing

// Frequency/antenna layout of a radio configuration. Subcarrier s sits at
// center_freq + (s - subcarriers/2) * delta_f, so wavelengths decrease with
// the subcarrier index.
struct SubcarrierGrid {
    int antennas = 1;
    int subcarriers = 256;
    double center_freq_hz = 5.25e9;
    double delta_f_hz = kSubcarrierSpacingHz;
    double antenna_spacing_m = 0.0;  // 0 selects half the center wavelength

    double frequency(int s) const {
        return center_freq_hz + (s - subcarriers / 2) * delta_f_hz;
    }
    double wavelength(int s) const { return kSpeedOfLight / frequency(s); }
    double spacing() const {
        return antenna_spacing_m > 0.0 ? antenna_spacing_m
                                       : 0.5 * kSpeedOfLight / center_freq_hz;
    }
    double bandwidth_hz() const { return subcarriers * delta_f_hz; }

    // Standard tone counts: 256/512/1024/2048 for 20/40/80/160 MHz.
    static SubcarrierGrid for_bandwidth(int bandwidth_mhz, int antennas,
                                        double center_freq_hz = 5.25e9) {
        int s = 0;
        switch (bandwidth_mhz) {
            case 20: s = 256; break;
            case 40: s = 512; break;
            case 80: s = 1024; break;
            case 160: s = 2048; break;
            default: throw std::invalid_argument("SubcarrierGrid: unsupported bandwidth");
        }
        SubcarrierGrid g;
        g.antennas = antennas;
        g.subcarriers = s;
        g.center_freq_hz = center_freq_hz;
        return g;
    }
};

// Complex channel matrix for one link, [antennas x subcarriers] row-major by
// antenna, with the frequency metadata needed to interpret it and a
// per-subcarrier observation mask for partial-band (RU) estimates.
struct Csi {
    int antennas = 0;
    int subcarriers = 0;
    std::vector<std::complex<double>> values;  // antennas * subcarriers
    std::vector<double> wavelengths;           // strictly decreasing
    double antenna_spacing = 0.0;
    std::vector<std::uint8_t> observed;        // per subcarrier, 1 = observed
    std::uint64_t timestamp_us = 0;

    static Csi zeros(const SubcarrierGrid& grid, std::uint64_t timestamp_us = 0) {
        Csi c;
        c.antennas = grid.antennas;
        c.subcarriers = grid.subcarriers;
        c.values.assign(static_cast<std::size_t>(grid.antennas) * grid.subcarriers, {0.0, 0.0});
        c.wavelengths.resize(grid.subcarriers);
        for (int s = 0; s < grid.subcarriers; ++s) c.wavelengths[s] = grid.wavelength(s);
        c.antenna_spacing = grid.spacing();
        c.observed.assign(grid.subcarriers, 1);
        c.timestamp_us = timestamp_us;
        return c;
    }

    std::complex<double>& at(int m, int s) {
        return values[static_cast<std::size_t>(m) * subcarriers + s];
    }
    const std::complex<double>& at(int m, int s) const {
        return values[static_cast<std::size_t>(m) * subcarriers + s];
    }

    bool fully_observed() const {
        for (auto o : observed)
            if (!o) return false;
        return true;
    }

    int observed_count() const {
        int n = 0;
        for (auto o : observed) n += (o != 0);
        return n;
    }

    // Total |h|^2 over observed entries.
    double observed_power() const {
        double p = 0.0;
        for (int m = 0; m < antennas; ++m)
            for (int s = 0; s < subcarriers; ++s)
                if (observed[s]) p += std::norm(at(m, s));
        return p;
    }

    void validate() const {
        if (antennas < 1 || subcarriers < 1)
            throw std::invalid_argument("Csi: empty dimensions");
        if (values.size() != static_cast<std::size_t>(antennas) * subcarriers)
            throw std::invalid_argument("Csi: value count does not match dimensions");
        if (static_cast<int>(wavelengths.size()) != subcarriers ||
            static_cast<int>(observed.size()) != subcarriers)
            throw std::invalid_argument("Csi: metadata length does not match subcarriers");
        for (int s = 1; s < subcarriers; ++s)
            if (!(wavelengths[s] < wavelengths[s - 1]))
                throw std::invalid_argument("Csi: wavelengths must strictly decrease");
    }

    // Grid reconstructed from the stored metadata.
    SubcarrierGrid grid() const {
        SubcarrierGrid g;
        g.antennas = antennas;
        g.subcarriers = subcarriers;
        const double f0 = kSpeedOfLight / wavelengths[0];
        const double f1 = subcarriers > 1 ? kSpeedOfLight / wavelengths[1] : f0 + kSubcarrierSpacingHz;
        g.delta_f_hz = f1 - f0;
        g.center_freq_hz = f0 + (subcarriers / 2) * g.delta_f_hz;
        g.antenna_spacing_m = antenna_spacing;
        return g;
    }
};

}  // namespace clcp
