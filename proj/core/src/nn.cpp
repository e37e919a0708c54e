// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include "clcp/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace clcp {

namespace {

void uniform_init(Param& p, double limit, Rng& rng) {
    for (auto& w : p.w) w = rng.uniform(-limit, limit);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

// ---------------------------------------------------------------- Linear

void Linear::init(const std::string& name, int in, int out, Rng& rng) {
    in_ = in;
    out_ = out;
    weight_.init(name + ".weight", {out, in});
    bias_.init(name + ".bias", {out});
    uniform_init(weight_, 1.0 / std::sqrt(static_cast<double>(in)), rng);
}

void Linear::init_zero(const std::string& name, int in, int out) {
    in_ = in;
    out_ = out;
    weight_.init(name + ".weight", {out, in});
    bias_.init(name + ".bias", {out});
}

void Linear::fill_bias(double value) {
    std::fill(bias_.w.begin(), bias_.w.end(), value);
}

std::vector<double> Linear::forward(const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != in_) throw std::invalid_argument("Linear: bad input size");
    x_cache_ = x;
    std::vector<double> y(out_, 0.0);
    for (int o = 0; o < out_; ++o) {
        double acc = bias_.w[o];
        const double* wrow = &weight_.w[static_cast<std::size_t>(o) * in_];
        for (int i = 0; i < in_; ++i) acc += wrow[i] * x[i];
        y[o] = acc;
    }
    return y;
}

std::vector<double> Linear::backward(const std::vector<double>& gy) {
    std::vector<double> gx(in_, 0.0);
    for (int o = 0; o < out_; ++o) {
        const double g = gy[o];
        bias_.g[o] += g;
        double* grow = &weight_.g[static_cast<std::size_t>(o) * in_];
        const double* wrow = &weight_.w[static_cast<std::size_t>(o) * in_];
        for (int i = 0; i < in_; ++i) {
            grow[i] += g * x_cache_[i];
            gx[i] += g * wrow[i];
        }
    }
    return gx;
}

Mat Linear::forward_seq(const Mat& x) {
    if (x.cols != in_) throw std::invalid_argument("Linear: bad sequence width");
    xseq_cache_ = x;
    Mat y(x.rows, out_);
    for (int t = 0; t < x.rows; ++t)
        for (int o = 0; o < out_; ++o) {
            double acc = bias_.w[o];
            const double* wrow = &weight_.w[static_cast<std::size_t>(o) * in_];
            for (int i = 0; i < in_; ++i) acc += wrow[i] * x.at(t, i);
            y.at(t, o) = acc;
        }
    return y;
}

Mat Linear::backward_seq(const Mat& gy) {
    Mat gx(xseq_cache_.rows, in_);
    for (int t = 0; t < gy.rows; ++t)
        for (int o = 0; o < out_; ++o) {
            const double g = gy.at(t, o);
            bias_.g[o] += g;
            double* grow = &weight_.g[static_cast<std::size_t>(o) * in_];
            const double* wrow = &weight_.w[static_cast<std::size_t>(o) * in_];
            for (int i = 0; i < in_; ++i) {
                grow[i] += g * xseq_cache_.at(t, i);
                gx.at(t, i) += g * wrow[i];
            }
        }
    return gx;
}

// ---------------------------------------------------------------- Conv1d

void Conv1d::init(const std::string& name, int in_ch, int out_ch, int kernel, Rng& rng) {
    if (kernel % 2 == 0) throw std::invalid_argument("Conv1d: kernel must be odd");
    in_ch_ = in_ch;
    out_ch_ = out_ch;
    kernel_ = kernel;
    pad_ = kernel / 2;
    weight_.init(name + ".weight", {out_ch, in_ch, kernel});
    bias_.init(name + ".bias", {out_ch});
    uniform_init(weight_, 1.0 / std::sqrt(static_cast<double>(in_ch * kernel)), rng);
}

Mat Conv1d::forward(const Mat& x) {
    if (x.rows != in_ch_) throw std::invalid_argument("Conv1d: channel mismatch");
    x_cache_ = x;
    const int L = x.cols;
    Mat y(out_ch_, L);
    for (int oc = 0; oc < out_ch_; ++oc) {
        for (int t = 0; t < L; ++t) {
            double acc = bias_.w[oc];
            for (int ic = 0; ic < in_ch_; ++ic) {
                const double* wrow =
                    &weight_.w[(static_cast<std::size_t>(oc) * in_ch_ + ic) * kernel_];
                for (int k = 0; k < kernel_; ++k) {
                    const int src = t + k - pad_;
                    if (src >= 0 && src < L) acc += wrow[k] * x.at(ic, src);
                }
            }
            y.at(oc, t) = acc;
        }
    }
    return y;
}

Mat Conv1d::backward(const Mat& gy) {
    const int L = x_cache_.cols;
    Mat gx(in_ch_, L);
    for (int oc = 0; oc < out_ch_; ++oc) {
        for (int t = 0; t < L; ++t) {
            const double g = gy.at(oc, t);
            bias_.g[oc] += g;
            for (int ic = 0; ic < in_ch_; ++ic) {
                double* grow = &weight_.g[(static_cast<std::size_t>(oc) * in_ch_ + ic) * kernel_];
                const double* wrow =
                    &weight_.w[(static_cast<std::size_t>(oc) * in_ch_ + ic) * kernel_];
                for (int k = 0; k < kernel_; ++k) {
                    const int src = t + k - pad_;
                    if (src >= 0 && src < L) {
                        grow[k] += g * x_cache_.at(ic, src);
                        gx.at(ic, src) += g * wrow[k];
                    }
                }
            }
        }
    }
    return gx;
}

// ------------------------------------------------------------ BatchNorm1d

void BatchNorm1d::init(const std::string& name, int channels) {
    channels_ = channels;
    gamma_.init(name + ".gamma", {channels});
    beta_.init(name + ".beta", {channels});
    running_mean_.init(name + ".running_mean", {channels});
    running_var_.init(name + ".running_var", {channels});
    std::fill(gamma_.w.begin(), gamma_.w.end(), 1.0);
    std::fill(running_var_.w.begin(), running_var_.w.end(), 1.0);
}

Mat BatchNorm1d::forward(const Mat& x, bool train) {
    if (x.rows != channels_) throw std::invalid_argument("BatchNorm1d: channel mismatch");
    const int L = x.cols;
    last_train_ = train;
    Mat y(channels_, L);
    xhat_cache_ = Mat(channels_, L);
    invstd_cache_.assign(channels_, 0.0);
    for (int c = 0; c < channels_; ++c) {
        // Normalization always uses the running statistics; samples are
        // processed one at a time, and normalizing each sample by its own
        // statistics would erase the per-sample scale and shift the latent
        // code has to carry. Training mode folds the sample statistics
        // into the running estimates afterwards.
        const double mean = running_mean_.w[c];
        const double var = running_var_.w[c];
        if (train) {
            double smean = 0.0;
            for (int t = 0; t < L; ++t) smean += x.at(c, t);
            smean /= L;
            double svar = 0.0;
            for (int t = 0; t < L; ++t) {
                const double d = x.at(c, t) - smean;
                svar += d * d;
            }
            svar /= L;
            running_mean_.w[c] = (1.0 - kMomentum) * mean + kMomentum * smean;
            running_var_.w[c] = (1.0 - kMomentum) * var + kMomentum * svar;
        }
        const double invstd = 1.0 / std::sqrt(var + kEps);
        invstd_cache_[c] = invstd;
        for (int t = 0; t < L; ++t) {
            const double xh = (x.at(c, t) - mean) * invstd;
            xhat_cache_.at(c, t) = xh;
            y.at(c, t) = gamma_.w[c] * xh + beta_.w[c];
        }
    }
    return y;
}

Mat BatchNorm1d::backward(const Mat& gy) {
    const int L = gy.cols;
    Mat gx(channels_, L);
    for (int c = 0; c < channels_; ++c) {
        const double invstd = invstd_cache_[c];
        double sum_gy = 0.0, sum_gy_xhat = 0.0;
        for (int t = 0; t < L; ++t) {
            sum_gy += gy.at(c, t);
            sum_gy_xhat += gy.at(c, t) * xhat_cache_.at(c, t);
        }
        gamma_.g[c] += sum_gy_xhat;
        beta_.g[c] += sum_gy;
        // The normalization statistics are running constants.
        for (int t = 0; t < L; ++t) gx.at(c, t) = gy.at(c, t) * gamma_.w[c] * invstd;
    }
    return gx;
}

// ------------------------------------------------------------------ ReLU

std::vector<double> ReLU::forward(const std::vector<double>& x) {
    mask_.assign(x.size(), 0);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        mask_[i] = x[i] > 0.0;
        y[i] = mask_[i] ? x[i] : 0.0;
    }
    return y;
}

std::vector<double> ReLU::backward(const std::vector<double>& gy) {
    std::vector<double> gx(gy.size());
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] = mask_[i] ? gy[i] : 0.0;
    return gx;
}

Mat ReLU::forward(const Mat& x) {
    Mat y = x;
    mask_.assign(x.v.size(), 0);
    for (std::size_t i = 0; i < x.v.size(); ++i) {
        mask_[i] = x.v[i] > 0.0;
        if (!mask_[i]) y.v[i] = 0.0;
    }
    return y;
}

Mat ReLU::backward_mat(const Mat& gy) {
    Mat gx = gy;
    for (std::size_t i = 0; i < gy.v.size(); ++i)
        if (!mask_[i]) gx.v[i] = 0.0;
    return gx;
}

// ------------------------------------------------------------------ LSTM

void Lstm::init(const std::string& name, int in, int hidden, Rng& rng) {
    in_ = in;
    hidden_ = hidden;
    wx_.init(name + ".wx", {4 * hidden, in});
    wh_.init(name + ".wh", {4 * hidden, hidden});
    bias_.init(name + ".bias", {4 * hidden});
    const double limit = 1.0 / std::sqrt(static_cast<double>(hidden));
    uniform_init(wx_, limit, rng);
    uniform_init(wh_, limit, rng);
    // Forget gate bias starts at 1 so early training does not wipe state.
    for (int h = 0; h < hidden; ++h) bias_.w[hidden + h] = 1.0;
}

Mat Lstm::forward(const Mat& x) {
    if (x.cols != in_) throw std::invalid_argument("Lstm: input width mismatch");
    const int T = x.rows;
    steps_ = T;
    x_cache_ = x;
    h_cache_ = Mat(T, hidden_);
    c_cache_ = Mat(T, hidden_);
    gates_i_ = Mat(T, hidden_);
    gates_f_ = Mat(T, hidden_);
    gates_g_ = Mat(T, hidden_);
    gates_o_ = Mat(T, hidden_);
    tanh_c_ = Mat(T, hidden_);

    std::vector<double> h_prev(hidden_, 0.0), c_prev(hidden_, 0.0), z(4 * hidden_);
    for (int t = 0; t < T; ++t) {
        for (int r = 0; r < 4 * hidden_; ++r) {
            double acc = bias_.w[r];
            const double* wxr = &wx_.w[static_cast<std::size_t>(r) * in_];
            for (int i = 0; i < in_; ++i) acc += wxr[i] * x.at(t, i);
            const double* whr = &wh_.w[static_cast<std::size_t>(r) * hidden_];
            for (int i = 0; i < hidden_; ++i) acc += whr[i] * h_prev[i];
            z[r] = acc;
        }
        for (int hch = 0; hch < hidden_; ++hch) {
            const double ig = sigmoid(z[hch]);
            const double fg = sigmoid(z[hidden_ + hch]);
            const double gg = std::tanh(z[2 * hidden_ + hch]);
            const double og = sigmoid(z[3 * hidden_ + hch]);
            const double c = fg * c_prev[hch] + ig * gg;
            const double tc = std::tanh(c);
            gates_i_.at(t, hch) = ig;
            gates_f_.at(t, hch) = fg;
            gates_g_.at(t, hch) = gg;
            gates_o_.at(t, hch) = og;
            c_cache_.at(t, hch) = c;
            tanh_c_.at(t, hch) = tc;
            h_cache_.at(t, hch) = og * tc;
        }
        for (int hch = 0; hch < hidden_; ++hch) {
            h_prev[hch] = h_cache_.at(t, hch);
            c_prev[hch] = c_cache_.at(t, hch);
        }
    }
    return h_cache_;
}

Mat Lstm::backward(const Mat& gy) {
    const int T = steps_;
    Mat gx(T, in_);
    std::vector<double> gh_next(hidden_, 0.0), gc_next(hidden_, 0.0), gz(4 * hidden_);

    for (int t = T - 1; t >= 0; --t) {
        for (int hch = 0; hch < hidden_; ++hch) {
            const double gh = gy.at(t, hch) + gh_next[hch];
            const double og = gates_o_.at(t, hch);
            const double tc = tanh_c_.at(t, hch);
            const double go = gh * tc;
            double gc = gh * og * (1.0 - tc * tc) + gc_next[hch];

            const double ig = gates_i_.at(t, hch);
            const double fg = gates_f_.at(t, hch);
            const double gg = gates_g_.at(t, hch);
            const double c_prev = t > 0 ? c_cache_.at(t - 1, hch) : 0.0;

            gz[hch] = gc * gg * ig * (1.0 - ig);                     // input gate
            gz[hidden_ + hch] = gc * c_prev * fg * (1.0 - fg);       // forget gate
            gz[2 * hidden_ + hch] = gc * ig * (1.0 - gg * gg);       // cell candidate
            gz[3 * hidden_ + hch] = go * og * (1.0 - og);            // output gate
            gc_next[hch] = gc * fg;
        }

        std::fill(gh_next.begin(), gh_next.end(), 0.0);
        for (int r = 0; r < 4 * hidden_; ++r) {
            const double g = gz[r];
            bias_.g[r] += g;
            double* gwx = &wx_.g[static_cast<std::size_t>(r) * in_];
            const double* wxr = &wx_.w[static_cast<std::size_t>(r) * in_];
            for (int i = 0; i < in_; ++i) {
                gwx[i] += g * x_cache_.at(t, i);
                gx.at(t, i) += g * wxr[i];
            }
            double* gwh = &wh_.g[static_cast<std::size_t>(r) * hidden_];
            const double* whr = &wh_.w[static_cast<std::size_t>(r) * hidden_];
            if (t > 0) {
                for (int i = 0; i < hidden_; ++i) {
                    gwh[i] += g * h_cache_.at(t - 1, i);
                    gh_next[i] += g * whr[i];
                }
            }
        }
    }
    return gx;
}

// ------------------------------------------------------------------ Adam

void Adam::step(double grad_scale) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (Param* p : params_) {
        // Running statistics carry no gradient; skip anything named so.
        if (p->name.find("running_") != std::string::npos) {
            p->zero_grad();
            continue;
        }
        for (std::size_t i = 0; i < p->w.size(); ++i) {
            const double g = p->g[i] * grad_scale;
            p->adam_m[i] = beta1_ * p->adam_m[i] + (1.0 - beta1_) * g;
            p->adam_v[i] = beta2_ * p->adam_v[i] + (1.0 - beta2_) * g * g;
            const double mhat = p->adam_m[i] / bc1;
            const double vhat = p->adam_v[i] / bc2;
            p->w[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
        p->zero_grad();
    }
}

}  // namespace clcp
