// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include "clcp/channel.hpp"

#include <stdexcept>

namespace clcp {

void accumulate_path(Csi& csi, const Path& path, double scale) {
    const double amp = path.a * scale;
    for (int s = 0; s < csi.subcarriers; ++s) {
        const double lambda = csi.wavelengths[s];
        const double base = path_base_phase(path, lambda);
        const double step = path_antenna_phase_step(path, csi.antenna_spacing, lambda);
        const std::complex<double> rot{std::cos(step), std::sin(step)};
        std::complex<double> v{amp * std::cos(base), amp * std::sin(base)};
        for (int m = 0; m < csi.antennas; ++m) {
            csi.at(m, s) += v;
            v *= rot;
        }
    }
}

Csi synthesize_csi(const PathSet& ps, const SubcarrierGrid& grid, std::uint64_t timestamp_us) {
    if (ps.empty()) throw std::invalid_argument("synthesize_csi: empty path set");
    for (int s = 0; s < grid.subcarriers; ++s)
        if (!(grid.wavelength(s) > 0.0))
            throw std::invalid_argument("synthesize_csi: non-positive wavelength");
    Csi csi = Csi::zeros(grid, timestamp_us);
    for (const auto& p : ps.paths) accumulate_path(csi, p);
    return csi;
}

}  // namespace clcp
