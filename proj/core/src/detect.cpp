// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include "clcp/detect.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace clcp {

namespace {

// Gray code of width `bits`.
int gray(int i) { return i ^ (i >> 1); }

std::vector<double> pam_levels(int m) {
    // m-PAM levels: -(m-1), ..., (m-1), normalized later at QAM level.
    std::vector<double> lv(m);
    for (int i = 0; i < m; ++i) lv[i] = 2.0 * i - (m - 1);
    return lv;
}

int slice_pam(double x, int m) {
    int idx = static_cast<int>(std::floor((x + (m - 1)) / 2.0 + 0.5));
    return std::clamp(idx, 0, m - 1);
}

struct ConstellationInfo {
    std::vector<std::complex<double>> points;  // indexed by symbol index
    int side = 0;                              // PAM order per axis (0 for BPSK)
    double scale = 1.0;                        // PAM-to-unit-power scale
};

ConstellationInfo build_constellation(Modulation m) {
    ConstellationInfo info;
    if (m == Modulation::BPSK) {
        info.points = {{-1.0, 0.0}, {1.0, 0.0}};
        info.side = 0;
        return info;
    }
    const int order = modulation_order(m);
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
    if (side * side != order)
        throw std::invalid_argument("constellation: non-square modulation");
    const auto levels = pam_levels(side);
    // Average symbol energy of square QAM with +/-1,3,... levels.
    const double es = 2.0 * (static_cast<double>(side) * side - 1.0) / 3.0;
    const double scale = 1.0 / std::sqrt(es);
    info.points.assign(order, {});
    const int axis_bits = bits_per_symbol(m) / 2;
    for (int ii = 0; ii < side; ++ii) {
        for (int qq = 0; qq < side; ++qq) {
            // Gray mapping per axis: the symbol index carries the I bits in
            // the high half and Q bits in the low half.
            const int sym = (gray(ii) << axis_bits) | gray(qq);
            info.points[sym] = {levels[ii] * scale, levels[qq] * scale};
        }
    }
    info.side = side;
    info.scale = scale;
    return info;
}

// Nearest constellation index for an equalized sample.
int slice_symbol(const ConstellationInfo& info, Modulation m, std::complex<double> x) {
    if (m == Modulation::BPSK) return x.real() >= 0.0 ? 1 : 0;
    const int side = info.side;
    const int axis_bits = bits_per_symbol(m) / 2;
    const int ii = slice_pam(x.real() / info.scale, side);
    const int qq = slice_pam(x.imag() / info.scale, side);
    return (gray(ii) << axis_bits) | gray(qq);
}

int popcount_xor(int a, int b) {
    int x = a ^ b;
    int n = 0;
    while (x) {
        n += x & 1;
        x >>= 1;
    }
    return n;
}

}  // namespace

std::vector<std::complex<double>> constellation(Modulation m) {
    return build_constellation(m).points;
}

int constellation_bits(Modulation m) { return bits_per_symbol(m); }

DetectionResult detect_mu(const std::vector<std::complex<double>>& y, const CMat& channel,
                          DetectionMethod method, Modulation mod, double noise_var) {
    const int n_rx = channel.rows;
    const int n_users = channel.cols;
    if (static_cast<int>(y.size()) != n_rx)
        throw std::invalid_argument("detect_mu: received vector length mismatch");
    if (n_users < 1 || n_users > n_rx)
        throw std::invalid_argument("detect_mu: user count must be in [1, n_rx]");

    const ConstellationInfo info = build_constellation(mod);
    DetectionResult result;
    result.symbol_indices.assign(n_users, 0);
    result.symbols.assign(n_users, {});

    if (method == DetectionMethod::Ml) {
        if (n_users > 4 || modulation_order(mod) > 16)
            throw std::invalid_argument("detect_mu: ML bounded to <= 4 users and <= 16-QAM");
        const int order = modulation_order(mod);
        std::vector<int> idx(n_users, 0), best_idx(n_users, 0);
        double best_metric = 1e300;
        std::int64_t total = 1;
        for (int u = 0; u < n_users; ++u) total *= order;
        for (std::int64_t code = 0; code < total; ++code) {
            std::int64_t c = code;
            for (int u = 0; u < n_users; ++u) {
                idx[u] = static_cast<int>(c % order);
                c /= order;
            }
            double metric = 0.0;
            for (int r = 0; r < n_rx; ++r) {
                std::complex<double> acc = y[r];
                for (int u = 0; u < n_users; ++u) acc -= channel.at(r, u) * info.points[idx[u]];
                metric += std::norm(acc);
                if (metric >= best_metric) break;
            }
            if (metric < best_metric) {
                best_metric = metric;
                best_idx = idx;
            }
        }
        result.symbol_indices = best_idx;
        for (int u = 0; u < n_users; ++u) result.symbols[u] = info.points[best_idx[u]];
        return result;
    }

    // Successive interference cancellation with per-stage equalization.
    bool use_mmse = method == DetectionMethod::MmseSic;
    std::vector<int> remaining(n_users);
    for (int u = 0; u < n_users; ++u) remaining[u] = u;
    std::vector<std::complex<double>> residual = y;

    while (!remaining.empty()) {
        const int k = static_cast<int>(remaining.size());
        CMat h(n_rx, k);
        for (int r = 0; r < n_rx; ++r)
            for (int c = 0; c < k; ++c) h.at(r, c) = channel.at(r, remaining[c]);
        CMat gram = matmul(h.hermitian(), h);
        if (use_mmse)
            for (int c = 0; c < k; ++c) gram.at(c, c) += noise_var;

        CMat inv;
        if (!invert(gram, inv)) {
            if (!use_mmse) {
                // Rank-deficient for ZF: switch to the regularized filter.
                use_mmse = true;
                result.zf_fell_back_to_mmse = true;
                continue;
            }
            throw std::runtime_error("detect_mu: equalizer matrix singular");
        }
        const CMat w = matmul(inv, h.hermitian());  // k x n_rx

        // Detect the stream with the best post-equalization SINR, i.e. the
        // smallest diagonal of the inverted Gram matrix.
        int best = 0;
        double best_diag = 1e300;
        for (int c = 0; c < k; ++c) {
            const double dg = inv.at(c, c).real();
            if (dg < best_diag) {
                best_diag = dg;
                best = c;
            }
        }

        std::complex<double> est{0.0, 0.0};
        for (int r = 0; r < n_rx; ++r) est += w.at(best, r) * residual[r];
        const int user = remaining[best];
        const int sym = slice_symbol(info, mod, est);
        result.symbol_indices[user] = sym;
        result.symbols[user] = info.points[sym];

        for (int r = 0; r < n_rx; ++r) residual[r] -= channel.at(r, user) * info.points[sym];
        remaining.erase(remaining.begin() + best);
    }
    return result;
}

MuBerStats detect_ber_monte_carlo(int n_rx, int n_users, Modulation mod,
                                  DetectionMethod method, double snr_db, int n_symbols,
                                  Rng& rng) {
    const ConstellationInfo info = build_constellation(mod);
    const int order = modulation_order(mod);
    const int bits = bits_per_symbol(mod);
    const double snr = std::pow(10.0, snr_db / 10.0);
    const double noise_var = 1.0 / snr;  // unit symbol energy per user
    const double noise_scale = std::sqrt(noise_var / 2.0);

    MuBerStats stats;
    for (int trial = 0; trial < n_symbols; ++trial) {
        CMat h(n_rx, n_users);
        for (int r = 0; r < n_rx; ++r)
            for (int c = 0; c < n_users; ++c)
                h.at(r, c) = {rng.normal() / std::sqrt(2.0), rng.normal() / std::sqrt(2.0)};

        std::vector<int> tx(n_users);
        std::vector<std::complex<double>> y(n_rx, {0.0, 0.0});
        for (int u = 0; u < n_users; ++u) {
            tx[u] = static_cast<int>(rng.uniform_int(order));
            for (int r = 0; r < n_rx; ++r) y[r] += h.at(r, u) * info.points[tx[u]];
        }
        for (int r = 0; r < n_rx; ++r)
            y[r] += std::complex<double>{noise_scale * rng.normal(), noise_scale * rng.normal()};

        const DetectionResult det = detect_mu(y, h, method, mod, noise_var);
        for (int u = 0; u < n_users; ++u)
            stats.bit_errors += popcount_xor(tx[u], det.symbol_indices[u]);
        stats.bits += static_cast<std::int64_t>(bits) * n_users;
    }
    stats.ber = static_cast<double>(stats.bit_errors) / static_cast<double>(stats.bits);
    const double p = std::max(stats.ber, 1e-12);
    stats.ci95_halfwidth = 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(stats.bits));
    return stats;
}

}  // namespace clcp
