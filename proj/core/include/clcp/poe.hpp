// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace clcp {

// Diagonal Gaussian in the latent space; the unit of encoder output and of
// product-of-experts combination.
struct LatentGaussian {
    std::vector<double> mu;
    std::vector<double> sigma;

    int dim() const { return static_cast<int>(mu.size()); }

    static LatentGaussian standard(int z) {
        LatentGaussian g;
        g.mu.assign(z, 0.0);
        g.sigma.assign(z, 1.0);
        return g;
    }

    void validate() const {
        if (mu.size() != sigma.size())
            throw std::invalid_argument("LatentGaussian: mu/sigma size mismatch");
        for (double s : sigma)
            if (!(s > 0.0) || !std::isfinite(s))
                throw std::invalid_argument("LatentGaussian: sigma must be positive and finite");
        for (double m : mu)
            if (!std::isfinite(m)) throw std::invalid_argument("LatentGaussian: non-finite mu");
    }
};

// Product of Gaussian experts with an implicit standard-normal prior:
//   precision T = 1 + sum(1/sigma_i^2),  mu = sum(mu_i/sigma_i^2) / T,
//   sigma = T^{-1/2}, elementwise. An empty expert list returns the prior.
inline LatentGaussian combine_poe(const std::vector<LatentGaussian>& experts, int latent_dim) {
    if (experts.empty()) return LatentGaussian::standard(latent_dim);
    for (const auto& e : experts) {
        e.validate();
        if (e.dim() != latent_dim)
            throw std::invalid_argument("combine_poe: latent dimension mismatch");
    }
    LatentGaussian joint;
    joint.mu.assign(latent_dim, 0.0);
    joint.sigma.assign(latent_dim, 0.0);
    for (int z = 0; z < latent_dim; ++z) {
        double precision = 1.0;  // prior
        double weighted = 0.0;
        for (const auto& e : experts) {
            const double p = 1.0 / (e.sigma[z] * e.sigma[z]);
            precision += p;
            weighted += e.mu[z] * p;
        }
        joint.mu[z] = weighted / precision;
        joint.sigma[z] = 1.0 / std::sqrt(precision);
    }
    return joint;
}

// Gradient of combine_poe: given d(loss)/d(joint mu, joint sigma), produces
// d(loss)/d(expert mu_i, sigma_i) for every expert.
inline std::vector<LatentGaussian> combine_poe_backward(
    const std::vector<LatentGaussian>& experts, const LatentGaussian& joint,
    const std::vector<double>& dmu, const std::vector<double>& dsigma) {
    std::vector<LatentGaussian> grads(experts.size());
    const int Z = joint.dim();
    for (auto& g : grads) {
        g.mu.assign(Z, 0.0);
        g.sigma.assign(Z, 0.0);
    }
    for (int z = 0; z < Z; ++z) {
        const double T = 1.0 / (joint.sigma[z] * joint.sigma[z]);
        for (std::size_t i = 0; i < experts.size(); ++i) {
            const double si = experts[i].sigma[z];
            const double pi = 1.0 / (si * si);
            // mu = sum_j mu_j p_j / T, sigma = T^{-1/2}
            const double dmu_dmui = pi / T;
            const double dmu_dpi = (experts[i].mu[z] - joint.mu[z]) / T;
            const double dsigma_dpi = -0.5 * std::pow(T, -1.5);
            const double dpi_dsi = -2.0 / (si * si * si);
            grads[i].mu[z] = dmu[z] * dmu_dmui;
            grads[i].sigma[z] = (dmu[z] * dmu_dpi + dsigma[z] * dsigma_dpi) * dpi_dsi;
        }
    }
    return grads;
}

// KL(q || N(0, I)) = 1/2 sum(sigma^2 + mu^2 - 1 - ln sigma^2), always >= 0.
inline double kl_divergence(const LatentGaussian& q) {
    q.validate();
    double kl = 0.0;
    for (int z = 0; z < q.dim(); ++z) {
        const double s2 = q.sigma[z] * q.sigma[z];
        kl += 0.5 * (s2 + q.mu[z] * q.mu[z] - 1.0 - std::log(s2));
    }
    return kl;
}

// d(KL)/d(mu) = mu, d(KL)/d(sigma) = sigma - 1/sigma; accumulated into the
// given gradient vectors.
inline void kl_backward(const LatentGaussian& q, double weight, std::vector<double>& dmu,
                        std::vector<double>& dsigma) {
    for (int z = 0; z < q.dim(); ++z) {
        dmu[z] += weight * q.mu[z];
        dsigma[z] += weight * (q.sigma[z] - 1.0 / q.sigma[z]);
    }
}

// Reparameterized sample z = mu + sigma .* eps. Sigma is clamped away from
// zero so the gradient path stays finite.
inline std::vector<double> sample_latent(const LatentGaussian& g,
                                         const std::vector<double>& eps) {
    std::vector<double> z(g.dim());
    for (int i = 0; i < g.dim(); ++i) z[i] = g.mu[i] + std::max(g.sigma[i], 1e-8) * eps[i];
    return z;
}

}  // namespace clcp
