// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include "clcp/impairments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace clcp {

namespace {

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::pair<Csi, RssiSample> inject_impairments(const Csi& csi, const ImpairmentConfig& cfg,
                                              Rng& rng, int packet_index) {
    csi.validate();
    const double tau = cfg.timing_jitter_s * rng.normal();
    const double gain_db = cfg.amplitude_sigma_db * rng.normal();
    const double cfo = cfg.cfo_phase_range > 0.0
                           ? rng.uniform(-cfg.cfo_phase_range, cfg.cfo_phase_range)
                           : 0.0;
    const double gain = std::pow(10.0, gain_db / 20.0);

    Csi out = csi;
    const double f0 = kSpeedOfLight / csi.wavelengths[0];
    for (int s = 0; s < csi.subcarriers; ++s) {
        // Timing offset tau delays the symbol boundary, which rotates each
        // subcarrier by -2*pi*(f_s - f_0)*tau.
        const double fs = kSpeedOfLight / csi.wavelengths[s];
        const double ph = -2.0 * 3.14159265358979323846 * (fs - f0) * tau + cfo;
        const std::complex<double> factor{gain * std::cos(ph), gain * std::sin(ph)};
        for (int m = 0; m < csi.antennas; ++m) out.at(m, s) *= factor;
    }

    double mean_power = 0.0;
    for (const auto& v : out.values) mean_power += std::norm(v);
    mean_power /= static_cast<double>(out.values.size());

    RssiSample rssi;
    rssi.packet_index = packet_index;
    rssi.rssi_db = 10.0 * std::log10(std::max(mean_power, 1e-30));
    return {std::move(out), rssi};
}

Csi compensate(const std::vector<Csi>& csis, const std::vector<RssiSample>& rssis) {
    if (csis.size() < 3) throw std::invalid_argument("compensate: three sequential CSIs required");
    if (rssis.size() < 3) throw std::invalid_argument("compensate: at least 3 RSSI samples required");
    const int n_pkt = 3;
    for (int i = 0; i < n_pkt; ++i) {
        csis[i].validate();
        if (csis[i].antennas != csis[0].antennas || csis[i].subcarriers != csis[0].subcarriers)
            throw std::invalid_argument("compensate: CSI shape mismatch");
    }

    // RSSI outlier rule: median +/- 3*MAD over the window.
    std::vector<double> window;
    window.reserve(rssis.size());
    for (const auto& r : rssis) {
        if (!std::isfinite(r.rssi_db))
            throw std::invalid_argument("compensate: non-finite RSSI");
        window.push_back(r.rssi_db);
    }
    const double med = median_of(window);
    std::vector<double> dev;
    dev.reserve(window.size());
    for (double v : window) dev.push_back(std::abs(v - med));
    const double mad = median_of(dev);

    std::vector<bool> keep(n_pkt, true);
    int kept = 0;
    for (int i = 0; i < n_pkt; ++i) {
        keep[i] = std::abs(rssis[i].rssi_db - med) <= 3.0 * mad;
        kept += keep[i];
    }
    if (kept == 0) throw std::runtime_error("compensate: all packets rejected as RSSI outliers");

    const int M = csis[0].antennas;
    const int S = csis[0].subcarriers;
    Csi out = csis[0];
    out.timestamp_us = csis[n_pkt - 1].timestamp_us;

    for (int m = 0; m < M; ++m) {
        for (int s = 0; s < S; ++s) {
            // Circular phase mean over all three packets.
            std::complex<double> dir{0.0, 0.0};
            for (int i = 0; i < n_pkt; ++i) {
                const auto v = csis[i].at(m, s);
                const double mag = std::abs(v);
                if (mag > 0.0) dir += v / mag;
            }
            const double phase = (std::abs(dir) > 0.0) ? std::arg(dir) : 0.0;

            // Amplitude mean over the packets that survived the RSSI rule.
            double amp = 0.0;
            for (int i = 0; i < n_pkt; ++i)
                if (keep[i]) amp += std::abs(csis[i].at(m, s));
            amp /= static_cast<double>(kept);

            out.at(m, s) = std::complex<double>{amp * std::cos(phase), amp * std::sin(phase)};
        }
    }

    // CFO removal: rotate so antenna 0 has zero phase on every subcarrier.
    for (int s = 0; s < S; ++s) {
        const double ref = std::arg(out.at(0, s));
        const std::complex<double> rot{std::cos(-ref), std::sin(-ref)};
        for (int m = 0; m < M; ++m) out.at(m, s) *= rot;
    }
    return out;
}

}  // namespace clcp
