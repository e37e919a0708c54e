// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#pragma once

#include <map>
#include <vector>

#include "clcp/csi.hpp"
#include "clcp/ru_tree.hpp"

namespace clcp {

// Capacity of RU assignments, summed per subcarrier as log2(1 + P_{u,s})
// with P the post-equalization SNR: maximum-ratio combining for a single
// user on an RU, per-user post-zero-forcing SNR with an equal transmit power
// split for multi-user groups.
class CapacityModel {
  public:
    // `csis` keyed by user id; every CSI must match the tree's grid width.
    CapacityModel(const RuTree& tree, const std::map<int, Csi>& csis, double tx_power,
                  double noise_power, int n_t, int n_r);

    // Sum rate of one user over the node's span (O(1) via prefix sums).
    double single_user(int node_id, int user_id) const;

    // ZFBF sum rate of a user group over the node's span. Rank-deficient
    // subcarriers contribute zero rate.
    double mu_group(int node_id, const std::vector<int>& user_ids) const;

    // Either of the above depending on group size.
    double assignment(int node_id, const std::vector<int>& user_ids) const;

    int max_users_per_ru() const { return max_per_ru_; }
    const RuTree& tree() const { return *tree_; }
    const std::vector<int>& user_ids() const { return user_ids_; }
    double snr(int user_id, int subcarrier) const;

  private:
    const RuTree* tree_;
    const std::map<int, Csi>* csis_;
    double tx_power_;
    double noise_power_;
    int max_per_ru_;
    int antennas_;
    std::vector<int> user_ids_;                    // sorted
    std::map<int, std::vector<double>> prefix_;    // per user: prefix of log2(1+snr)
};

}  // namespace clcp
