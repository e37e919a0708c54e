// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include "clcp/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <stdexcept>

#include "clcp/channel.hpp"

namespace clcp {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr char kModelMagic[8] = {'C', 'L', 'C', 'P', 'M', 'D', 'L', '1'};
constexpr std::uint32_t kModelVersion = 1;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double softplus(double x) {
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

Mat transpose(const Mat& x) {
    Mat y(x.cols, x.rows);
    for (int r = 0; r < x.rows; ++r)
        for (int c = 0; c < x.cols; ++c) y.at(c, r) = x.at(r, c);
    return y;
}

std::vector<double> flatten(const Mat& x) { return x.v; }

Mat unflatten(const std::vector<double>& v, int rows, int cols) {
    Mat y(rows, cols);
    y.v = v;
    return y;
}

}  // namespace

void ModelConfig::validate() const {
    if (n_links < 1) throw std::invalid_argument("ModelConfig: n_links must be >= 1");
    if (latent_dim < 1 || max_paths < 1 || lstm_hidden < 1 || conv_ch1 < 1 || conv_ch2 < 1 ||
        fc_hidden < 1)
        throw std::invalid_argument("ModelConfig: dimensions must be >= 1");
    if (kernel < 1 || kernel % 2 == 0)
        throw std::invalid_argument("ModelConfig: kernel must be odd and >= 1");
    if (!(d_scale > 0.0)) throw std::invalid_argument("ModelConfig: d_scale must be > 0");
    if (!link_ids.empty() && static_cast<int>(link_ids.size()) != n_links)
        throw std::invalid_argument("ModelConfig: link_ids size mismatch");
}

Mat pathset_features(const PathSet& ps, int max_paths, double d_scale, double lambda_center) {
    Mat f(max_paths, 4);
    const int n = std::min<int>(ps.size(), max_paths);
    for (int l = 0; l < n; ++l) {
        const Path& p = ps.paths[l];
        const double psi = p.phi - 2.0 * kPi * p.d / lambda_center;
        f.at(l, 0) = p.theta / kPi;
        f.at(l, 1) = p.d / d_scale;
        f.at(l, 2) = p.a * std::cos(psi);
        f.at(l, 3) = p.a * std::sin(psi);
    }
    return f;
}

Path path_from_features(double f_theta, double f_d, double f_u, double f_v, double d_scale,
                        double lambda_center) {
    Path p;
    p.theta = kPi * std::clamp(f_theta, 0.0, 1.0);
    p.d = d_scale * std::max(0.0, f_d);
    p.a = std::max(std::hypot(f_u, f_v), 1e-9);
    const double psi = (p.a > 1e-9) ? std::atan2(f_v, f_u) : 0.0;
    p.phi = wrap_phase(psi + 2.0 * kPi * p.d / lambda_center);
    return p;
}

// ----------------------------------------------------------------- Encoder

void Encoder::init(const std::string& name, const ModelConfig& cfg, Rng& rng) {
    cfg_ = &cfg;
    lstm_.init(name + ".lstm", 4, cfg.lstm_hidden, rng);
    conv1_.init(name + ".conv1", cfg.lstm_hidden, cfg.conv_ch1, cfg.kernel, rng);
    bn1_.init(name + ".bn1", cfg.conv_ch1);
    conv2_.init(name + ".conv2", cfg.conv_ch1, cfg.conv_ch2, cfg.kernel, rng);
    bn2_.init(name + ".bn2", cfg.conv_ch2);
    fc_.init(name + ".fc", cfg.conv_ch2 * cfg.max_paths, cfg.fc_hidden, rng);
    // Zero weights keep a fresh encoder input-independent (zeroing the
    // log-variance bias as well recovers the exact prior). The default
    // bias starts the posterior narrow: a unit-variance latent at the
    // start of training drowns the views in sampling noise and the
    // decoders learn to ignore them.
    head_mu_.init_zero(name + ".head_mu", cfg.fc_hidden, cfg.latent_dim);
    head_logvar_.init_zero(name + ".head_logvar", cfg.fc_hidden, cfg.latent_dim);
    head_logvar_.fill_bias(-4.0);
}

LatentGaussian Encoder::forward(const PathSet& view, bool train) {
    const double lambda_c = kSpeedOfLight / cfg_->grid.center_freq_hz;
    const Mat feats = pathset_features(view, cfg_->max_paths, cfg_->d_scale, lambda_c);
    const Mat seq = lstm_.forward(feats);
    const Mat c1 = relu1_.forward(bn1_.forward(conv1_.forward(transpose(seq)), train));
    const Mat c2 = relu2_.forward(bn2_.forward(conv2_.forward(c1), train));
    const std::vector<double> h = relu_fc_.forward(fc_.forward(flatten(c2)));
    LatentGaussian g;
    g.mu = head_mu_.forward(h);
    std::vector<double> logvar = head_logvar_.forward(h);
    logvar_clamped_.assign(logvar.size(), 0);
    g.sigma.resize(logvar.size());
    for (std::size_t i = 0; i < logvar.size(); ++i) {
        if (logvar[i] > 20.0 || logvar[i] < -20.0) {
            logvar[i] = std::clamp(logvar[i], -20.0, 20.0);
            logvar_clamped_[i] = 1;
        }
        g.sigma[i] = std::exp(0.5 * logvar[i]);
    }
    sigma_cache_ = g.sigma;
    return g;
}

void Encoder::backward(const std::vector<double>& dmu, const std::vector<double>& dsigma) {
    std::vector<double> dlogvar(dsigma.size());
    for (std::size_t i = 0; i < dsigma.size(); ++i)
        dlogvar[i] = logvar_clamped_[i] ? 0.0 : dsigma[i] * 0.5 * sigma_cache_[i];
    std::vector<double> gh = head_mu_.backward(dmu);
    const std::vector<double> gh2 = head_logvar_.backward(dlogvar);
    for (std::size_t i = 0; i < gh.size(); ++i) gh[i] += gh2[i];
    const std::vector<double> gflat = fc_.backward(relu_fc_.backward(gh));
    Mat g = unflatten(gflat, cfg_->conv_ch2, cfg_->max_paths);
    g = conv2_.backward(bn2_.backward(relu2_.backward_mat(g)));
    g = conv1_.backward(bn1_.backward(relu1_.backward_mat(g)));
    lstm_.backward(transpose(g));
}

void Encoder::collect(std::vector<Param*>& out) {
    lstm_.collect(out);
    conv1_.collect(out);
    bn1_.collect(out);
    conv2_.collect(out);
    bn2_.collect(out);
    fc_.collect(out);
    head_mu_.collect(out);
    head_logvar_.collect(out);
}

// ----------------------------------------------------------------- Decoder

void Decoder::init(const std::string& name, const ModelConfig& cfg, Rng& rng) {
    cfg_ = &cfg;
    fc1_.init(name + ".fc1", cfg.latent_dim, cfg.fc_hidden, rng);
    fc2_.init(name + ".fc2", cfg.fc_hidden, cfg.conv_ch2 * cfg.max_paths, rng);
    conv_a_.init(name + ".conv_a", cfg.conv_ch2, cfg.conv_ch1, cfg.kernel, rng);
    bn_a_.init(name + ".bn_a", cfg.conv_ch1);
    conv_b_.init(name + ".conv_b", cfg.conv_ch1, cfg.conv_ch1, cfg.kernel, rng);
    bn_b_.init(name + ".bn_b", cfg.conv_ch1);
    lstm_.init(name + ".lstm", cfg.conv_ch1, cfg.lstm_hidden, rng);
    proj_.init(name + ".proj", cfg.lstm_hidden, 4, rng);

    const int S = cfg.grid.subcarriers;
    booster_w_.init(name + ".booster.weight", {S, 4});
    booster_b_.init(name + ".booster.bias", {S, 2});
    // Identity mix so an untrained booster passes the synthesis through.
    for (int s = 0; s < S; ++s) {
        booster_w_.w[static_cast<std::size_t>(s) * 4 + 0] = 1.0;
        booster_w_.w[static_cast<std::size_t>(s) * 4 + 3] = 1.0;
    }
}

Decoder::Output Decoder::forward(const std::vector<double>& z, bool train) {
    const std::vector<double> h1 = relu_fc1_.forward(fc1_.forward(z));
    const Mat grid_in = unflatten(fc2_.forward(h1), cfg_->conv_ch2, cfg_->max_paths);
    const Mat a = relu_a_.forward(bn_a_.forward(conv_a_.forward(grid_in), train));
    const Mat b = relu_b_.forward(bn_b_.forward(conv_b_.forward(a), train));
    proj_in_cache_ = lstm_.forward(transpose(b));
    raw_cache_ = proj_.forward_seq(proj_in_cache_);

    const int L = cfg_->max_paths;
    const double lambda_c = kSpeedOfLight / cfg_->grid.center_freq_hz;
    params_cache_ = Mat(L, 4);
    PathSet emitted;
    emitted.capacity = L;
    for (int l = 0; l < L; ++l) {
        // (theta/pi, d/d_scale, a cos psi, a sin psi); the raw (u, v) pair
        // is radially clamped onto the unit disc so amplitudes stay in (0, 1].
        const double p0 = sigmoid(raw_cache_.at(l, 0));
        const double p1 = softplus(raw_cache_.at(l, 1));
        const double u = std::tanh(raw_cache_.at(l, 2));
        const double v = std::tanh(raw_cache_.at(l, 3));
        const double h = std::hypot(u, v);
        const double scale = h > 1.0 ? 1.0 / h : 1.0;
        params_cache_.at(l, 0) = p0;
        params_cache_.at(l, 1) = p1;
        params_cache_.at(l, 2) = u * scale;
        params_cache_.at(l, 3) = v * scale;
        emitted.paths.push_back(path_from_features(p0, p1, u * scale, v * scale,
                                                   cfg_->d_scale, lambda_c));
    }

    Output out;
    out.params = params_cache_;
    synth_cache_ = Csi::zeros(cfg_->grid);
    for (const auto& p : emitted.paths) accumulate_path(synth_cache_, p);
    out.synthesized = synth_cache_;
    out.boosted = apply_booster(synth_cache_);
    return out;
}

Csi Decoder::apply_booster(const Csi& synth) const {
    Csi out = synth;
    const int S = synth.subcarriers;
    for (int s = 0; s < S; ++s) {
        const double* w = &booster_w_.w[static_cast<std::size_t>(s) * 4];
        const double* bb = &booster_b_.w[static_cast<std::size_t>(s) * 2];
        for (int m = 0; m < synth.antennas; ++m) {
            const double re = synth.at(m, s).real();
            const double im = synth.at(m, s).imag();
            out.at(m, s) = {w[0] * re + w[1] * im + bb[0], w[2] * re + w[3] * im + bb[1]};
        }
    }
    return out;
}

std::vector<double> Decoder::backward(const Mat& g_re, const Mat& g_im, const Mat& g_params) {
    const int L = cfg_->max_paths;
    const int S = cfg_->grid.subcarriers;
    const int M = cfg_->grid.antennas;
    const double spacing = cfg_->grid.spacing();

    // Booster backward: per-subcarrier affine over (re, im).
    Mat gs_re(M, S), gs_im(M, S);
    for (int s = 0; s < S; ++s) {
        double* gw = &booster_w_.g[static_cast<std::size_t>(s) * 4];
        double* gb = &booster_b_.g[static_cast<std::size_t>(s) * 2];
        const double* w = &booster_w_.w[static_cast<std::size_t>(s) * 4];
        for (int m = 0; m < M; ++m) {
            const double re = synth_cache_.at(m, s).real();
            const double im = synth_cache_.at(m, s).imag();
            const double gre = g_re.at(m, s);
            const double gim = g_im.at(m, s);
            gw[0] += gre * re;
            gw[1] += gre * im;
            gw[2] += gim * re;
            gw[3] += gim * im;
            gb[0] += gre;
            gb[1] += gim;
            gs_re.at(m, s) = gre * w[0] + gim * w[2];
            gs_im.at(m, s) = gre * w[1] + gim * w[3];
        }
    }

    // Eq.-2 synthesis backward to the feature-space parameters. With
    // phi = psi + 2*pi*d/lambda_c, the per-subcarrier phase becomes
    // psi + 2*pi*d*(1/lambda_c - 1/lambda_s) + antenna term, so the delay
    // gradient is band-limited instead of carrier-scaled.
    const double lambda_c = kSpeedOfLight / cfg_->grid.center_freq_hz;
    Mat graw(L, 4);
    for (int l = 0; l < L; ++l) {
        const double p0 = params_cache_.at(l, 0);
        const double p1 = params_cache_.at(l, 1);
        const double fu = params_cache_.at(l, 2);
        const double fv = params_cache_.at(l, 3);
        const double theta = kPi * p0;
        const double d = cfg_->d_scale * p1;
        const double amp = std::max(std::hypot(fu, fv), 1e-9);
        const double psi0 = amp > 1e-9 ? std::atan2(fv, fu) : 0.0;
        const double cos_t = std::cos(theta);
        const double sin_t = std::sin(theta);

        double g_theta = 0.0, g_d = 0.0, g_a = 0.0, g_psi0 = 0.0;
        for (int s = 0; s < S; ++s) {
            const double lambda = cfg_->grid.wavelength(s);
            const double base = psi0 + 2.0 * kPi * d * (1.0 / lambda_c - 1.0 / lambda);
            const double astep = -2.0 * kPi * spacing * cos_t / lambda;
            for (int m = 0; m < M; ++m) {
                const double psi = base + m * astep;
                const double cpsi = std::cos(psi);
                const double spsi = std::sin(psi);
                const double gre = gs_re.at(m, s);
                const double gim = gs_im.at(m, s);
                g_a += gre * cpsi + gim * spsi;
                const double g_psi = amp * (-gre * spsi + gim * cpsi);
                g_psi0 += g_psi;
                g_d += g_psi * 2.0 * kPi * (1.0 / lambda_c - 1.0 / lambda);
                g_theta += g_psi * (2.0 * kPi * m * spacing * sin_t / lambda);
            }
        }

        // (a, psi) -> (u', v') on the unit disc.
        double g_fu = g_a * (fu / amp) + g_psi0 * (-fv / (amp * amp));
        double g_fv = g_a * (fv / amp) + g_psi0 * (fu / (amp * amp));
        g_fu += g_params.at(l, 2);
        g_fv += g_params.at(l, 3);

        // (u', v') -> raw tanh outputs, through the radial clamp.
        const double u = std::tanh(raw_cache_.at(l, 2));
        const double v = std::tanh(raw_cache_.at(l, 3));
        const double h = std::hypot(u, v);
        double gu, gv;
        if (h > 1.0) {
            const double h3 = h * h * h;
            gu = g_fu * (v * v / h3) + g_fv * (-u * v / h3);
            gv = g_fu * (-u * v / h3) + g_fv * (u * u / h3);
        } else {
            gu = g_fu;
            gv = g_fv;
        }

        const double gn0 = g_theta * kPi + g_params.at(l, 0);
        const double gn1 = g_d * cfg_->d_scale + g_params.at(l, 1);
        graw.at(l, 0) = gn0 * p0 * (1.0 - p0);
        graw.at(l, 1) = gn1 * sigmoid(raw_cache_.at(l, 1));
        graw.at(l, 2) = gu * (1.0 - u * u);
        graw.at(l, 3) = gv * (1.0 - v * v);
    }

    Mat g = lstm_.backward(proj_.backward_seq(graw));
    g = conv_b_.backward(bn_b_.backward(relu_b_.backward_mat(transpose(g))));
    g = conv_a_.backward(bn_a_.backward(relu_a_.backward_mat(g)));
    const std::vector<double> gh1 = fc2_.backward(flatten(g));
    return fc1_.backward(relu_fc1_.backward(gh1));
}

void Decoder::collect(std::vector<Param*>& out) {
    fc1_.collect(out);
    fc2_.collect(out);
    conv_a_.collect(out);
    bn_a_.collect(out);
    conv_b_.collect(out);
    bn_b_.collect(out);
    lstm_.collect(out);
    proj_.collect(out);
    out.push_back(&booster_w_);
    out.push_back(&booster_b_);
}

// --------------------------------------------------------------- ClcpModel

ClcpModel::ClcpModel(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    if (cfg_.link_ids.empty()) {
        cfg_.link_ids.resize(cfg_.n_links);
        std::iota(cfg_.link_ids.begin(), cfg_.link_ids.end(), 0);
    }
    Rng rng(seed);
    encoders_.resize(cfg_.n_links);
    decoders_.resize(cfg_.n_links);
    for (int n = 0; n < cfg_.n_links; ++n) {
        Rng enc_rng = rng.fork(0x100 + n);
        Rng dec_rng = rng.fork(0x200 + n);
        encoders_[n].init("enc" + std::to_string(n), cfg_, enc_rng);
        decoders_[n].init("dec" + std::to_string(n), cfg_, dec_rng);
    }
}

LatentGaussian ClcpModel::encode(const PathSet& view, int encoder_index) {
    if (encoder_index < 0 || encoder_index >= cfg_.n_links)
        throw std::out_of_range("encode: encoder index out of range");
    return encoders_[encoder_index].forward(view, train_);
}

std::pair<PathSet, Csi> ClcpModel::decode(const std::vector<double>& z, int decoder_index) {
    if (decoder_index < 0 || decoder_index >= cfg_.n_links)
        throw std::out_of_range("decode: decoder index out of range");
    Decoder& dec = decoders_[decoder_index];
    const Decoder::Output out = dec.forward(z, train_);

    PathSet ps;
    ps.capacity = cfg_.max_paths;
    const double lambda_c = kSpeedOfLight / cfg_.grid.center_freq_hz;
    for (int l = 0; l < cfg_.max_paths; ++l)
        ps.paths.push_back(path_from_features(out.params.at(l, 0), out.params.at(l, 1),
                                              out.params.at(l, 2), out.params.at(l, 3),
                                              cfg_.d_scale, lambda_c));
    ps.canonicalize();
    // The returned channel estimate is the booster applied to the exact
    // Eq.-2 synthesis of the returned (canonical) path set.
    const Csi synth = synthesize_csi(ps, cfg_.grid);
    return {std::move(ps), dec.apply_booster(synth)};
}

std::map<int, Csi> ClcpModel::predict(const std::map<int, PathSet>& observed,
                                      const std::vector<int>& targets, bool prior_fallback) {
    if (observed.empty() && !prior_fallback)
        throw std::invalid_argument("predict: no observed views (strict mode)");
    const bool was_training = train_;
    train_ = false;
    std::vector<LatentGaussian> experts;
    for (const auto& [idx, ps] : observed) {
        if (idx < 0 || idx >= cfg_.n_links)
            throw std::out_of_range("predict: observed link index out of range");
        experts.push_back(encoders_[idx].forward(ps, false));
    }
    const LatentGaussian joint = combine_poe(experts, cfg_.latent_dim);
    std::map<int, Csi> out;
    for (int t : targets) out.emplace(t, decode(joint.mu, t).second);
    train_ = was_training;
    return out;
}

double ClcpModel::elbo_term(const std::vector<const PathSet*>& inputs,
                            const std::vector<const PathSet*>& param_targets,
                            const std::vector<const Csi*>& csi_targets, Rng& rng,
                            bool backprop) {
    const int N = cfg_.n_links;
    const int Z = cfg_.latent_dim;
    const int L = cfg_.max_paths;
    const int S = cfg_.grid.subcarriers;
    const int M = cfg_.grid.antennas;
    if (static_cast<int>(inputs.size()) != N || static_cast<int>(csi_targets.size()) != N ||
        static_cast<int>(param_targets.size()) != N)
        throw std::invalid_argument("elbo_term: view count mismatch");

    std::vector<int> observed;
    std::vector<LatentGaussian> experts;
    for (int n = 0; n < N; ++n)
        if (inputs[n]) {
            observed.push_back(n);
            experts.push_back(encoders_[n].forward(*inputs[n], train_));
        }

    const LatentGaussian joint = combine_poe(experts, Z);
    std::vector<double> eps(Z, 0.0);
    if (train_)
        for (auto& e : eps) e = rng.normal();
    const std::vector<double> z = sample_latent(joint, eps);

    double loss = 0.0;
    std::vector<double> gz(Z, 0.0);
    for (int n = 0; n < N; ++n) {
        const Csi& gt = *csi_targets[n];
        if (gt.subcarriers != S || gt.antennas != M)
            throw std::invalid_argument("elbo_term: target shape mismatch");
        const Decoder::Output out = decoders_[n].forward(z, train_);

        // Loss_mse_csi: mean over subcarriers of the squared error norm.
        double l_csi = 0.0;
        Mat g_re(M, S), g_im(M, S);
        for (int m = 0; m < M; ++m)
            for (int s = 0; s < S; ++s) {
                const double dre = out.boosted.at(m, s).real() - gt.at(m, s).real();
                const double dim = out.boosted.at(m, s).imag() - gt.at(m, s).imag();
                l_csi += dre * dre + dim * dim;
                g_re.at(m, s) = cfg_.alpha * 2.0 * dre / S;
                g_im.at(m, s) = cfg_.alpha * 2.0 * dim / S;
            }
        l_csi /= S;

        // Loss_mse_param: amplitude-weighted squared error on the
        // normalized 4-tuples, matched by canonical row order.
        const double lambda_c = kSpeedOfLight / cfg_.grid.center_freq_hz;
        const Mat gt_feats = pathset_features(*param_targets[n], L, cfg_.d_scale, lambda_c);
        double l_param = 0.0;
        Mat g_params(L, 4);
        for (int l = 0; l < L; ++l) {
            const double w =
                l < param_targets[n]->size() ? param_targets[n]->paths[l].a : 0.0;
            for (int f = 0; f < 4; ++f) {
                const double diff = out.params.at(l, f) - gt_feats.at(l, f);
                l_param += w * diff * diff;
                g_params.at(l, f) = cfg_.eta * 2.0 * w * diff;
            }
        }

        loss += cfg_.alpha * l_csi + cfg_.eta * l_param;
        if (backprop) {
            const std::vector<double> gzn = decoders_[n].backward(g_re, g_im, g_params);
            for (int i = 0; i < Z; ++i) gz[i] += gzn[i];
        }
    }

    const double kl = kl_divergence(joint);
    loss += cfg_.beta * kl;

    if (backprop) {
        std::vector<double> dmu(Z, 0.0), dsigma(Z, 0.0);
        for (int i = 0; i < Z; ++i) {
            dmu[i] += gz[i];
            if (joint.sigma[i] > 1e-8) dsigma[i] += gz[i] * eps[i];
        }
        kl_backward(joint, cfg_.beta, dmu, dsigma);
        if (!experts.empty()) {
            const auto expert_grads = combine_poe_backward(experts, joint, dmu, dsigma);
            for (std::size_t i = 0; i < observed.size(); ++i)
                encoders_[observed[i]].backward(expert_grads[i].mu, expert_grads[i].sigma);
        }
    }
    return loss;
}

std::vector<Param*> ClcpModel::parameters() {
    std::vector<Param*> out;
    for (auto& e : encoders_) e.collect(out);
    for (auto& d : decoders_) d.collect(out);
    return out;
}

// ------------------------------------------------------------ serialization

namespace {

void put_u32(std::FILE* f, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    std::fwrite(b, 1, 4, f);
}

void put_f64(std::FILE* f, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    std::fwrite(b, 1, 8, f);
}

void put_f32(std::FILE* f, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(f, bits);
}

std::uint32_t get_u32(std::FILE* f) {
    unsigned char b[4];
    if (std::fread(b, 1, 4, f) != 4) throw std::runtime_error("model: truncated file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

double get_f64(std::FILE* f) {
    unsigned char b[8];
    if (std::fread(b, 1, 8, f) != 8) throw std::runtime_error("model: truncated file");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

float get_f32(std::FILE* f) {
    const std::uint32_t bits = get_u32(f);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

}  // namespace

void ClcpModel::save(const std::string& path) const {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("model: cannot open for writing: " + path);
    std::fwrite(kModelMagic, 1, 8, f);
    put_u32(f, kModelVersion);
    put_u32(f, static_cast<std::uint32_t>(cfg_.n_links));
    put_u32(f, static_cast<std::uint32_t>(cfg_.latent_dim));
    put_u32(f, static_cast<std::uint32_t>(cfg_.max_paths));

    put_u32(f, static_cast<std::uint32_t>(cfg_.lstm_hidden));
    put_u32(f, static_cast<std::uint32_t>(cfg_.conv_ch1));
    put_u32(f, static_cast<std::uint32_t>(cfg_.conv_ch2));
    put_u32(f, static_cast<std::uint32_t>(cfg_.kernel));
    put_u32(f, static_cast<std::uint32_t>(cfg_.fc_hidden));
    put_u32(f, static_cast<std::uint32_t>(cfg_.grid.antennas));
    put_u32(f, static_cast<std::uint32_t>(cfg_.grid.subcarriers));
    put_f64(f, cfg_.grid.center_freq_hz);
    put_f64(f, cfg_.grid.delta_f_hz);
    put_f64(f, cfg_.grid.antenna_spacing_m);
    put_f64(f, cfg_.d_scale);
    put_f64(f, cfg_.alpha);
    put_f64(f, cfg_.eta);
    put_f64(f, cfg_.beta);
    put_u32(f, static_cast<std::uint32_t>(cfg_.link_ids.size()));
    for (int id : cfg_.link_ids) put_u32(f, static_cast<std::uint32_t>(id));

    auto params = const_cast<ClcpModel*>(this)->parameters();
    put_u32(f, static_cast<std::uint32_t>(params.size()));
    for (const Param* p : params) {
        put_u32(f, static_cast<std::uint32_t>(p->name.size()));
        std::fwrite(p->name.data(), 1, p->name.size(), f);
        put_u32(f, static_cast<std::uint32_t>(p->shape.size()));
        for (int d : p->shape) put_u32(f, static_cast<std::uint32_t>(d));
    }
    for (const Param* p : params)
        for (double w : p->w) put_f32(f, static_cast<float>(w));
    std::fclose(f);
}

ClcpModel ClcpModel::load(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("model: cannot open: " + path);
    struct Closer {
        std::FILE* f;
        ~Closer() { std::fclose(f); }
    } closer{f};

    char magic[8];
    if (std::fread(magic, 1, 8, f) != 8 || std::memcmp(magic, kModelMagic, 8) != 0)
        throw std::runtime_error("model: bad magic");
    if (get_u32(f) != kModelVersion) throw std::runtime_error("model: unsupported version");

    ModelConfig cfg;
    cfg.n_links = static_cast<int>(get_u32(f));
    cfg.latent_dim = static_cast<int>(get_u32(f));
    cfg.max_paths = static_cast<int>(get_u32(f));
    cfg.lstm_hidden = static_cast<int>(get_u32(f));
    cfg.conv_ch1 = static_cast<int>(get_u32(f));
    cfg.conv_ch2 = static_cast<int>(get_u32(f));
    cfg.kernel = static_cast<int>(get_u32(f));
    cfg.fc_hidden = static_cast<int>(get_u32(f));
    cfg.grid.antennas = static_cast<int>(get_u32(f));
    cfg.grid.subcarriers = static_cast<int>(get_u32(f));
    cfg.grid.center_freq_hz = get_f64(f);
    cfg.grid.delta_f_hz = get_f64(f);
    cfg.grid.antenna_spacing_m = get_f64(f);
    cfg.d_scale = get_f64(f);
    cfg.alpha = get_f64(f);
    cfg.eta = get_f64(f);
    cfg.beta = get_f64(f);
    const std::uint32_t n_ids = get_u32(f);
    cfg.link_ids.resize(n_ids);
    for (auto& id : cfg.link_ids) id = static_cast<int>(get_u32(f));

    ClcpModel model(cfg, 0);
    auto params = model.parameters();
    const std::uint32_t n_tensors = get_u32(f);
    if (n_tensors != params.size()) throw std::runtime_error("model: tensor table mismatch");
    for (Param* p : params) {
        const std::uint32_t name_len = get_u32(f);
        std::string name(name_len, '\0');
        if (std::fread(name.data(), 1, name_len, f) != name_len)
            throw std::runtime_error("model: truncated file");
        if (name != p->name) throw std::runtime_error("model: tensor name mismatch: " + name);
        const std::uint32_t ndim = get_u32(f);
        std::vector<int> shape(ndim);
        for (auto& d : shape) d = static_cast<int>(get_u32(f));
        if (shape != p->shape) throw std::runtime_error("model: tensor shape mismatch: " + name);
    }
    for (Param* p : params)
        for (double& w : p->w) w = static_cast<double>(get_f32(f));
    return model;
}

// ----------------------------------------------------------------- training

std::vector<TrainLogEntry> train_multistage(ClcpModel& model,
                                            const std::vector<TrainingInstant>& dataset,
                                            const TrainConfig& cfg,
                                            TrainerCheckpoint* checkpoint) {
    if (dataset.empty()) throw std::invalid_argument("train_multistage: empty dataset");
    const int N = model.cfg_.n_links;
    for (const auto& inst : dataset)
        if (static_cast<int>(inst.full_inputs.size()) != N ||
            static_cast<int>(inst.param_targets.size()) != N ||
            static_cast<int>(inst.csi_targets.size()) != N)
            throw std::invalid_argument("train_multistage: instant view count != N");
    if (cfg.batch_size < 1) throw std::invalid_argument("train_multistage: batch_size must be >= 1");

    const int k_auto = N >= 2 ? std::min(4, (1 << N) - N - 1) : 0;
    const int k = cfg.k_subsets >= 0 ? cfg.k_subsets : k_auto;

    Adam adam(model.parameters(), cfg.learning_rate);
    if (checkpoint) adam.set_steps_taken(checkpoint->adam_steps);
    model.set_train(true);

    std::vector<std::size_t> order(dataset.size());
    std::vector<TrainLogEntry> log;

    const int start_epoch = checkpoint ? checkpoint->next_epoch : 0;
    const int total_epochs = cfg.epochs_stage1 + cfg.epochs_stage2;
    for (int epoch = start_epoch; epoch < total_epochs; ++epoch) {
        const int stage = epoch < cfg.epochs_stage1 ? 1 : 2;
        adam.set_lr(stage == 2 && cfg.learning_rate_stage2 > 0.0 ? cfg.learning_rate_stage2
                                                                 : cfg.learning_rate);
        // Every epoch draws from its own fork of the training seed, so a
        // resumed run replays the exact same sample order and noise.
        Rng rng = Rng(cfg.seed).fork(0xe70000 + static_cast<std::uint64_t>(epoch));
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_int(i)]);

        int batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            double batch_loss = 0.0;
            for (std::size_t oi = start; oi < end; ++oi) {
                const TrainingInstant& inst = dataset[order[oi]];

                // Stage 2 swaps inputs for RU-masked estimates where available.
                std::vector<const PathSet*> views(N);
                for (int n = 0; n < N; ++n) {
                    views[n] = &inst.full_inputs[n];
                    if (stage == 2 && n < static_cast<int>(inst.masked_inputs.size()) &&
                        !inst.masked_inputs[n].empty()) {
                        const auto& variants = inst.masked_inputs[n];
                        views[n] = &variants[rng.uniform_int(variants.size())];
                    }
                }

                std::vector<const PathSet*> ptargets(N);
                std::vector<const Csi*> ctargets(N);
                for (int n = 0; n < N; ++n) {
                    ptargets[n] = &inst.param_targets[n];
                    ctargets[n] = &inst.csi_targets[n];
                }

                // (1) all views together.
                batch_loss += model.elbo_term(views, ptargets, ctargets, rng, true);
                // (2) each view alone.
                for (int n = 0; n < N; ++n) {
                    std::vector<const PathSet*> solo(N, nullptr);
                    solo[n] = views[n];
                    batch_loss += model.elbo_term(solo, ptargets, ctargets, rng, true);
                }
                // (3) k random subsets with at least two views.
                for (int j = 0; j < k; ++j) {
                    std::vector<const PathSet*> sub(N, nullptr);
                    int chosen = 0;
                    for (int attempt = 0; attempt < 32 && chosen < 2; ++attempt) {
                        chosen = 0;
                        for (int n = 0; n < N; ++n) {
                            sub[n] = (rng.next_u64() & 1u) ? views[n] : nullptr;
                            chosen += (sub[n] != nullptr);
                        }
                    }
                    if (chosen < 2) {
                        for (int n = 0; n < N; ++n) sub[n] = views[n];
                    }
                    batch_loss += model.elbo_term(sub, ptargets, ctargets, rng, true);
                }
            }
            const double count = static_cast<double>(end - start);
            adam.step(1.0 / count);
            log.push_back({epoch, stage, batch_index++, batch_loss / count});
        }
    }
    model.set_train(false);
    if (checkpoint) {
        checkpoint->next_epoch = total_epochs;
        checkpoint->adam_steps = adam.steps_taken();
    }
    return log;
}

// ------------------------------------------------------------- checkpoints

namespace {
constexpr char kCkptMagic[8] = {'C', 'L', 'C', 'P', 'C', 'K', 'P', 'T'};
}

void save_checkpoint(const std::string& path, ClcpModel& model,
                     const TrainerCheckpoint& ckpt) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("checkpoint: cannot open for writing: " + path);
    std::fwrite(kCkptMagic, 1, 8, f);
    put_u32(f, 1);
    put_u32(f, static_cast<std::uint32_t>(ckpt.next_epoch));
    put_f64(f, static_cast<double>(ckpt.adam_steps));
    const auto params = model.parameters();
    put_u32(f, static_cast<std::uint32_t>(params.size()));
    for (const Param* p : params) {
        put_u32(f, static_cast<std::uint32_t>(p->name.size()));
        std::fwrite(p->name.data(), 1, p->name.size(), f);
        put_u32(f, static_cast<std::uint32_t>(p->w.size()));
        for (double w : p->w) put_f64(f, w);
        for (double m : p->adam_m) put_f64(f, m);
        for (double v : p->adam_v) put_f64(f, v);
    }
    std::fclose(f);
}

TrainerCheckpoint load_checkpoint(const std::string& path, ClcpModel& model) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("checkpoint: cannot open: " + path);
    struct Closer {
        std::FILE* f;
        ~Closer() { std::fclose(f); }
    } closer{f};
    char magic[8];
    if (std::fread(magic, 1, 8, f) != 8 || std::memcmp(magic, kCkptMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic");
    if (get_u32(f) != 1) throw std::runtime_error("checkpoint: unsupported version");
    TrainerCheckpoint ckpt;
    ckpt.next_epoch = static_cast<int>(get_u32(f));
    ckpt.adam_steps = static_cast<std::int64_t>(get_f64(f));
    const auto params = model.parameters();
    if (get_u32(f) != params.size())
        throw std::runtime_error("checkpoint: parameter count mismatch");
    for (Param* p : params) {
        const std::uint32_t name_len = get_u32(f);
        std::string name(name_len, '\0');
        if (std::fread(name.data(), 1, name_len, f) != name_len)
            throw std::runtime_error("checkpoint: truncated");
        if (name != p->name) throw std::runtime_error("checkpoint: tensor mismatch: " + name);
        if (get_u32(f) != p->w.size())
            throw std::runtime_error("checkpoint: tensor size mismatch: " + name);
        for (double& w : p->w) w = get_f64(f);
        for (double& m : p->adam_m) m = get_f64(f);
        for (double& v : p->adam_v) v = get_f64(f);
    }
    return ckpt;
}

std::vector<LatentRow> export_latents(ClcpModel& model,
                                      const std::vector<TrainingInstant>& dataset) {
    model.set_train(false);
    std::vector<LatentRow> rows;
    const auto& cfg = model.config();
    for (const auto& inst : dataset) {
        for (int n = 0; n < cfg.n_links; ++n) {
            LatentRow row;
            row.link_id = cfg.link_ids.empty() ? n : cfg.link_ids[n];
            row.timestamp_us = inst.timestamp_us;
            row.mu = model.encode(inst.full_inputs[n], n).mu;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace clcp
