// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "clcp/poe.hpp"
#include "clcp/rng.hpp"

using namespace clcp;

namespace {

// Numerical product-of-densities oracle on [-10, 10]: composite Simpson
// integration of prior * product of expert densities, reduced to mean and
// variance.
struct NumericPoe {
    double mean = 0.0;
    double var = 0.0;
};

double normal_pdf(double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * 3.14159265358979323846));
}

NumericPoe numeric_product(const std::vector<LatentGaussian>& experts) {
    const int n = 40000;  // even
    const double lo = -10.0, hi = 10.0;
    const double h = (hi - lo) / n;
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double x = lo + i * h;
        double f = normal_pdf(x, 0.0, 1.0);
        for (const auto& e : experts) f *= normal_pdf(x, e.mu[0], e.sigma[0]);
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s0 += w * f;
        s1 += w * f * x;
        s2 += w * f * x * x;
    }
    NumericPoe out;
    out.mean = s1 / s0;
    out.var = s2 / s0 - out.mean * out.mean;
    return out;
}

LatentGaussian expert1d(double mu, double sigma) {
    LatentGaussian g;
    g.mu = {mu};
    g.sigma = {sigma};
    return g;
}

}  // namespace

TEST_SUITE_BEGIN("poe");

TEST_CASE("closed-form product of two unit-variance experts") {
    const auto joint = combine_poe({expert1d(1.0, 1.0), expert1d(3.0, 1.0)}, 1);
    CHECK(joint.mu[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(joint.sigma[0] * joint.sigma[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("empty expert list returns the prior") {
    const auto joint = combine_poe({}, 4);
    for (int z = 0; z < 4; ++z) {
        CHECK(joint.mu[z] == 0.0);
        CHECK(joint.sigma[z] == 1.0);
    }
}

TEST_CASE("a near-delta expert dominates the product") {
    const auto joint = combine_poe({expert1d(2.5, 1e-4), expert1d(-1.0, 1.0)}, 1);
    CHECK(joint.mu[0] == doctest::Approx(2.5).epsilon(1e-6));
}

TEST_CASE("non-positive sigma rejected") {
    CHECK_THROWS(combine_poe({expert1d(0.0, 0.0)}, 1));
    CHECK_THROWS(combine_poe({expert1d(0.0, -1.0)}, 1));
}

TEST_CASE("matches the numerical density-product oracle") {
    Rng rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        const int n_experts = 1 + static_cast<int>(rng.uniform_int(3));
        std::vector<LatentGaussian> experts;
        for (int i = 0; i < n_experts; ++i)
            experts.push_back(expert1d(rng.uniform(-3.0, 3.0), rng.uniform(0.2, 3.0)));
        const auto joint = combine_poe(experts, 1);
        const auto oracle = numeric_product(experts);
        CHECK(std::abs(joint.mu[0] - oracle.mean) < 1e-6);
        CHECK(std::abs(joint.sigma[0] * joint.sigma[0] - oracle.var) < 1e-6);
    }
}

TEST_CASE("expert order does not matter") {
    Rng rng(22);
    std::vector<LatentGaussian> experts;
    for (int i = 0; i < 4; ++i) {
        LatentGaussian e;
        for (int z = 0; z < 3; ++z) {
            e.mu.push_back(rng.uniform(-2.0, 2.0));
            e.sigma.push_back(rng.uniform(0.3, 2.0));
        }
        experts.push_back(e);
    }
    const auto a = combine_poe(experts, 3);
    std::reverse(experts.begin(), experts.end());
    const auto b = combine_poe(experts, 3);
    for (int z = 0; z < 3; ++z) {
        CHECK(a.mu[z] == doctest::Approx(b.mu[z]).epsilon(1e-12));
        CHECK(a.sigma[z] == doctest::Approx(b.sigma[z]).epsilon(1e-12));
    }
}

TEST_CASE("kl divergence closed form") {
    LatentGaussian std_normal = LatentGaussian::standard(3);
    CHECK(kl_divergence(std_normal) == doctest::Approx(0.0));
    CHECK(kl_divergence(expert1d(1.0, 1.0)) == doctest::Approx(0.5).epsilon(1e-12));

    Rng rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        LatentGaussian g = expert1d(rng.uniform(-4.0, 4.0), rng.uniform(0.05, 5.0));
        CHECK(kl_divergence(g) >= 0.0);
    }
}

TEST_CASE("reparameterized sampling") {
    LatentGaussian g;
    g.mu = {1.0, -2.0};
    g.sigma = {0.5, 2.0};
    const auto z = sample_latent(g, {0.0, 0.0});
    CHECK(z[0] == 1.0);
    CHECK(z[1] == -2.0);

    LatentGaussian tight = g;
    tight.sigma = {1e-12, 1e-12};  // clamped to 1e-8 internally
    const auto zt = sample_latent(tight, {1.0, 1.0});
    CHECK(zt[0] == doctest::Approx(1.0).epsilon(1e-6));

    // Monte Carlo moments.
    Rng rng(24);
    LatentGaussian m = expert1d(2.0, 3.0);
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = sample_latent(m, {rng.normal()})[0];
        sum += v;
        sq += v * v;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sq / n - mean * mean);
    CHECK(std::abs(mean - 2.0) < 0.05);
    CHECK(std::abs(sd - 3.0) < 0.05);
}

TEST_CASE("poe backward matches finite differences") {
    Rng rng(25);
    const int Z = 2;
    std::vector<LatentGaussian> experts(3);
    for (auto& e : experts) {
        for (int z = 0; z < Z; ++z) {
            e.mu.push_back(rng.uniform(-1.0, 1.0));
            e.sigma.push_back(rng.uniform(0.4, 1.6));
        }
    }
    // Scalar loss: sum(c_mu * mu + c_sigma * sigma) of the joint.
    std::vector<double> c_mu(Z), c_sigma(Z);
    for (int z = 0; z < Z; ++z) {
        c_mu[z] = rng.uniform(-1.0, 1.0);
        c_sigma[z] = rng.uniform(-1.0, 1.0);
    }
    auto loss = [&](const std::vector<LatentGaussian>& ex) {
        const auto j = combine_poe(ex, Z);
        double l = 0.0;
        for (int z = 0; z < Z; ++z) l += c_mu[z] * j.mu[z] + c_sigma[z] * j.sigma[z];
        return l;
    };
    const auto joint = combine_poe(experts, Z);
    const auto grads = combine_poe_backward(experts, joint, c_mu, c_sigma);
    const double h = 1e-6;
    for (std::size_t i = 0; i < experts.size(); ++i) {
        for (int z = 0; z < Z; ++z) {
            auto up = experts, dn = experts;
            up[i].mu[z] += h;
            dn[i].mu[z] -= h;
            CHECK(grads[i].mu[z] ==
                  doctest::Approx((loss(up) - loss(dn)) / (2 * h)).epsilon(1e-5));
            up = experts;
            dn = experts;
            up[i].sigma[z] += h;
            dn[i].sigma[z] -= h;
            CHECK(grads[i].sigma[z] ==
                  doctest::Approx((loss(up) - loss(dn)) / (2 * h)).epsilon(1e-5));
        }
    }
}

TEST_SUITE_END();
