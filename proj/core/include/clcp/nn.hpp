// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clcp/rng.hpp"

namespace clcp {

// Minimal reverse-mode gradient core for the fixed layer set used by the
// prediction model: affine, 1-D convolution, batch norm, ReLU and an LSTM.
// Layers process one sample at a time and cache their forward activations;
// gradients accumulate into each parameter until the optimizer steps.

struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
};

struct Param {
    std::string name;
    std::vector<int> shape;
    std::vector<double> w;
    std::vector<double> g;
    std::vector<double> adam_m;
    std::vector<double> adam_v;

    void init(std::string n, std::vector<int> s) {
        name = std::move(n);
        shape = std::move(s);
        std::size_t total = 1;
        for (int d : shape) total *= static_cast<std::size_t>(d);
        w.assign(total, 0.0);
        g.assign(total, 0.0);
        adam_m.assign(total, 0.0);
        adam_v.assign(total, 0.0);
    }

    std::size_t size() const { return w.size(); }
    void zero_grad() { std::fill(g.begin(), g.end(), 0.0); }
};

// Fully connected y = W x + b.
class Linear {
  public:
    void init(const std::string& name, int in, int out, Rng& rng);
    void init_zero(const std::string& name, int in, int out);
    void fill_bias(double value);

    std::vector<double> forward(const std::vector<double>& x);
    std::vector<double> backward(const std::vector<double>& gy);

    // Row-wise application over a [T x in] sequence, with its own cache.
    Mat forward_seq(const Mat& x);
    Mat backward_seq(const Mat& gy);

    void collect(std::vector<Param*>& out) {
        out.push_back(&weight_);
        out.push_back(&bias_);
    }

    int in_dim() const { return in_; }
    int out_dim() const { return out_; }

  private:
    int in_ = 0, out_ = 0;
    Param weight_;  // [out, in]
    Param bias_;    // [out]
    std::vector<double> x_cache_;
    Mat xseq_cache_;
};

// 1-D convolution over [channels x length] with stride 1 and zero padding
// that preserves the length.
class Conv1d {
  public:
    void init(const std::string& name, int in_ch, int out_ch, int kernel, Rng& rng);

    Mat forward(const Mat& x);
    Mat backward(const Mat& gy);

    void collect(std::vector<Param*>& out) {
        out.push_back(&weight_);
        out.push_back(&bias_);
    }

  private:
    int in_ch_ = 0, out_ch_ = 0, kernel_ = 0, pad_ = 0;
    Param weight_;  // [out_ch, in_ch, kernel]
    Param bias_;    // [out_ch]
    Mat x_cache_;
};

// Per-channel batch normalization over the length dimension of one sample.
// Training mode normalizes with the sample statistics and maintains running
// statistics; eval mode applies the stored running statistics.
class BatchNorm1d {
  public:
    void init(const std::string& name, int channels);

    Mat forward(const Mat& x, bool train);
    Mat backward(const Mat& gy);  // valid after a training-mode forward

    void collect(std::vector<Param*>& out) {
        out.push_back(&gamma_);
        out.push_back(&beta_);
        out.push_back(&running_mean_);
        out.push_back(&running_var_);
    }

    static constexpr double kEps = 1e-5;
    static constexpr double kMomentum = 0.1;

  private:
    int channels_ = 0;
    Param gamma_, beta_;
    Param running_mean_, running_var_;  // state, not trained
    Mat xhat_cache_;
    std::vector<double> invstd_cache_;
    bool last_train_ = false;
};

// Element-wise max(0, x).
class ReLU {
  public:
    std::vector<double> forward(const std::vector<double>& x);
    std::vector<double> backward(const std::vector<double>& gy);

    Mat forward(const Mat& x);
    Mat backward_mat(const Mat& gy);

  private:
    std::vector<std::uint8_t> mask_;
};

// Single-layer LSTM over a [T x in] sequence producing [T x hidden].
class Lstm {
  public:
    void init(const std::string& name, int in, int hidden, Rng& rng);

    Mat forward(const Mat& x);       // x: [T x in] -> [T x hidden]
    Mat backward(const Mat& gy);     // gy: [T x hidden] -> [T x in]

    void collect(std::vector<Param*>& out) {
        out.push_back(&wx_);
        out.push_back(&wh_);
        out.push_back(&bias_);
    }

    int hidden_dim() const { return hidden_; }

  private:
    int in_ = 0, hidden_ = 0;
    Param wx_;    // [4*hidden, in]
    Param wh_;    // [4*hidden, hidden]
    Param bias_;  // [4*hidden]

    // forward caches, one row per step
    Mat x_cache_, h_cache_, c_cache_;        // h/c rows are post-step states
    Mat gates_i_, gates_f_, gates_g_, gates_o_, tanh_c_;
    int steps_ = 0;
};

// Adam optimizer over a fixed parameter list. `grad_scale` is applied to the
// accumulated gradients before the moment update (1/batch for mean-reduced
// batches); gradients are cleared after the step.
class Adam {
  public:
    Adam(std::vector<Param*> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8)
        : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(double grad_scale = 1.0);
    void set_lr(double lr) { lr_ = lr; }
    double lr() const { return lr_; }
    std::int64_t steps_taken() const { return t_; }
    void set_steps_taken(std::int64_t t) { t_ = t; }

  private:
    std::vector<Param*> params_;
    double lr_, beta1_, beta2_, eps_;
    std::int64_t t_ = 0;
};

}  // namespace clcp
