// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include "clcp/capacity.hpp"

#include <cmath>
#include <stdexcept>

#include "clcp/linalg.hpp"

namespace clcp {

CapacityModel::CapacityModel(const RuTree& tree, const std::map<int, Csi>& csis,
                             double tx_power, double noise_power, int n_t, int n_r)
    : tree_(&tree), csis_(&csis), tx_power_(tx_power), noise_power_(noise_power) {
    if (!(noise_power > 0.0))
        throw std::invalid_argument("CapacityModel: noise power must be > 0");
    if (n_t < 1 || n_r < 1) throw std::invalid_argument("CapacityModel: bad antenna counts");
    max_per_ru_ = std::max(1, n_t / n_r);
    antennas_ = 0;
    for (const auto& [uid, csi] : csis) {
        if (csi.subcarriers != tree.subcarriers)
            throw std::invalid_argument("CapacityModel: CSI width does not match the tree");
        if (antennas_ == 0) antennas_ = csi.antennas;
        if (csi.antennas != antennas_)
            throw std::invalid_argument("CapacityModel: mixed antenna counts");
        user_ids_.push_back(uid);

        std::vector<double> prefix(tree.subcarriers + 1, 0.0);
        for (int s = 0; s < tree.subcarriers; ++s) {
            double p = 0.0;
            for (int m = 0; m < csi.antennas; ++m) p += std::norm(csi.at(m, s));
            const double snr = tx_power * p / noise_power;
            prefix[s + 1] = prefix[s] + std::log2(1.0 + snr);
        }
        prefix_.emplace(uid, std::move(prefix));
    }
}

double CapacityModel::snr(int user_id, int subcarrier) const {
    const Csi& csi = csis_->at(user_id);
    double p = 0.0;
    for (int m = 0; m < csi.antennas; ++m) p += std::norm(csi.at(m, subcarrier));
    return tx_power_ * p / noise_power_;
}

double CapacityModel::single_user(int node_id, int user_id) const {
    const RuNode& n = tree_->node(node_id);
    const auto it = prefix_.find(user_id);
    if (it == prefix_.end()) throw std::invalid_argument("CapacityModel: unknown user id");
    return it->second[n.span_start + n.span_tones] - it->second[n.span_start];
}

double CapacityModel::mu_group(int node_id, const std::vector<int>& user_ids) const {
    const int g = static_cast<int>(user_ids.size());
    if (g == 1) return single_user(node_id, user_ids[0]);
    if (g < 1) return 0.0;
    const RuNode& n = tree_->node(node_id);

    double cap = 0.0;
    CMat h(antennas_, g), gram(g, g), inv(g, g);
    for (int s = n.span_start; s < n.span_start + n.span_tones; ++s) {
        for (int c = 0; c < g; ++c) {
            const Csi& csi = csis_->at(user_ids[c]);
            for (int m = 0; m < antennas_; ++m) h.at(m, c) = csi.at(m, s);
        }
        gram = matmul(h.hermitian(), h);
        if (!invert(gram, inv)) continue;  // spatially degenerate subcarrier
        for (int c = 0; c < g; ++c) {
            const double diag = inv.at(c, c).real();
            if (!(diag > 0.0)) continue;
            const double p = (tx_power_ / g) / (noise_power_ * diag);
            cap += std::log2(1.0 + p);
        }
    }
    return cap;
}

double CapacityModel::assignment(int node_id, const std::vector<int>& user_ids) const {
    if (user_ids.empty()) return 0.0;
    if (user_ids.size() == 1) return single_user(node_id, user_ids[0]);
    return mu_group(node_id, user_ids);
}

}  // namespace clcp
