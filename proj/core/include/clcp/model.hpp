// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "clcp/csi.hpp"
#include "clcp/nn.hpp"
#include "clcp/paths.hpp"
#include "clcp/poe.hpp"

namespace clcp {

// Multiview variational channel prediction: one encoder and one decoder per
// link in a proximity group, a product-of-experts combiner over the encoded
// posteriors, and per-link decoders that emit path parameters, reconstruct
// the channel from them and apply a learned per-subcarrier correction (the
// resolution booster).

struct ModelConfig {
    int n_links = 2;      // N: radios in the group
    int latent_dim = 32;  // Z
    int max_paths = 8;    // L: path rows consumed/emitted per link
    int lstm_hidden = 64;
    int conv_ch1 = 16;
    int conv_ch2 = 32;
    int kernel = 3;
    int fc_hidden = 64;
    double d_scale = 30.0;  // meters; path lengths are trained as d/d_scale
    double alpha = 1.0;     // CSI reconstruction weight
    double eta = 0.1;       // path-parameter loss weight
    double beta = 1e-3;     // KL weight
    SubcarrierGrid grid;
    std::vector<int> link_ids;  // external link ids, size n_links (optional)

    void validate() const;
};

// Normalized 4-feature row per path: (theta/pi, d/d_scale, a cos psi,
// a sin psi), where psi = phi - 2*pi*d/lambda_center is the path's phase at
// the band center. The (cos, sin) pair keeps the representation continuous
// while the raw reflection phase wraps every half wavelength of motion, and
// the center-referenced form removes the delay's sub-wavelength ambiguity
// from the feature space: d only has to be band-resolution accurate.
Mat pathset_features(const PathSet& ps, int max_paths, double d_scale, double lambda_center);

// Inverse of the feature map for one row.
Path path_from_features(double f_theta, double f_d, double f_u, double f_v, double d_scale,
                        double lambda_center);

class Encoder {
  public:
    void init(const std::string& name, const ModelConfig& cfg, Rng& rng);

    // PathSet in canonical order, zero-padded to L rows. sigma comes from a
    // log-variance head through exp, so it is strictly positive.
    LatentGaussian forward(const PathSet& view, bool train);
    void backward(const std::vector<double>& dmu, const std::vector<double>& dsigma);

    void collect(std::vector<Param*>& out);

  private:
    const ModelConfig* cfg_ = nullptr;
    Lstm lstm_;
    Conv1d conv1_, conv2_;
    BatchNorm1d bn1_, bn2_;
    ReLU relu1_, relu2_, relu_fc_;
    Linear fc_, head_mu_, head_logvar_;
    std::vector<double> sigma_cache_;
    std::vector<std::uint8_t> logvar_clamped_;
};

class Decoder {
  public:
    void init(const std::string& name, const ModelConfig& cfg, Rng& rng);

    struct Output {
        Mat params;        // L x 4 normalized features, emitted row order
        Csi synthesized;   // Eq.-2 reconstruction before the booster
        Csi boosted;       // final prediction h_pred
    };

    Output forward(const std::vector<double>& z, bool train);

    // The learned per-subcarrier correction, applied to any channel of the
    // configured grid shape.
    Csi apply_booster(const Csi& synth) const;

    // d(loss)/d(h_pred) as two real matrices plus d(loss)/d(params);
    // returns d(loss)/d(z).
    std::vector<double> backward(const Mat& g_re, const Mat& g_im, const Mat& g_params);

    void collect(std::vector<Param*>& out);

  private:
    const ModelConfig* cfg_ = nullptr;
    Linear fc1_, fc2_;
    ReLU relu_fc1_, relu_a_, relu_b_;
    Conv1d conv_a_, conv_b_;
    BatchNorm1d bn_a_, bn_b_;
    Lstm lstm_;
    Linear proj_;
    Param booster_w_;  // [S, 4]: 2x2 real mix per subcarrier
    Param booster_b_;  // [S, 2]

    // forward caches
    Mat raw_cache_;     // L x 4 pre-squash
    Mat params_cache_;  // L x 4 squashed
    Csi synth_cache_;
    Mat proj_in_cache_;  // lstm output, L x hidden
};

struct TrainingInstant {
    std::uint64_t timestamp_us = 0;
    std::vector<PathSet> full_inputs;    // per link, full-band estimates
    std::vector<PathSet> param_targets;  // per link, path-parameter targets
    std::vector<Csi> csi_targets;        // per link, ground-truth channels
    // Per link: alternative inputs estimated from RU-masked observations,
    // used by the OFDMA-mimicking training stage.
    std::vector<std::vector<PathSet>> masked_inputs;
};

struct TrainConfig {
    int epochs_stage1 = 60;   // full-band input epochs (training steps 1-3)
    int epochs_stage2 = 20;   // repeat with random RU-masked inputs (step 4)
    int batch_size = 16;
    double learning_rate = 5e-6;
    double learning_rate_stage2 = 0.0;  // 0 keeps the stage-1 rate
    std::uint64_t seed = 1;
    int k_subsets = -1;  // ELBO terms from random view subsets; -1 = auto
};

struct TrainLogEntry {
    int epoch = 0;
    int stage = 1;
    int batch = 0;
    double loss = 0.0;
};

struct LatentRow {
    int link_id = 0;
    std::uint64_t timestamp_us = 0;
    std::vector<double> mu;
};

// Optimizer progress for exact training resume. Together with the model's
// full-precision weights and Adam moments (see save_checkpoint) a resumed
// run reproduces the uninterrupted one bit for bit: every epoch draws its
// randomness from a fork of the training seed.
struct TrainerCheckpoint {
    int next_epoch = 0;
    std::int64_t adam_steps = 0;
};

class ClcpModel {
  public:
    ClcpModel() = default;
    ClcpModel(const ModelConfig& cfg, std::uint64_t seed);

    const ModelConfig& config() const { return cfg_; }
    void set_train(bool train) { train_ = train; }

    // Single-view compression into variational parameters.
    LatentGaussian encode(const PathSet& view, int encoder_index);

    // Decodes the joint representation for one link: the emitted path
    // parameters (canonical order) and the boosted channel estimate. The
    // pre-booster channel equals synthesize_csi of the returned PathSet.
    std::pair<PathSet, Csi> decode(const std::vector<double>& z, int decoder_index);

    // Inference: encodes the observed views, combines them (dropping absent
    // encoders), decodes every target from the posterior mean. Keys are
    // link indices within the group. Throws on an empty observed set unless
    // prior_fallback allows decoding from the prior alone.
    std::map<int, Csi> predict(const std::map<int, PathSet>& observed,
                               const std::vector<int>& targets, bool prior_fallback = false);

    // One multiview ELBO term: encodes the non-null inputs, samples the
    // joint posterior (reparameterized; eps ~ N(0,I) in training, 0 in
    // eval), decodes all links and accumulates the loss
    //   alpha * Loss_mse_csi + eta * Loss_mse_param + beta * KL.
    // With `backprop`, gradients accumulate into the parameters.
    double elbo_term(const std::vector<const PathSet*>& inputs,
                     const std::vector<const PathSet*>& param_targets,
                     const std::vector<const Csi*>& csi_targets, Rng& rng, bool backprop);

    std::vector<Param*> parameters();

    void save(const std::string& path) const;
    static ClcpModel load(const std::string& path);

  private:
    ModelConfig cfg_;
    bool train_ = false;
    std::vector<Encoder> encoders_;
    std::vector<Decoder> decoders_;

    friend std::vector<TrainLogEntry> train_multistage(ClcpModel&,
                                                       const std::vector<TrainingInstant>&,
                                                       const TrainConfig&, TrainerCheckpoint*);
};

// Multi-stage trainer. Every batch sums one ELBO with all views, one ELBO
// per single view and k ELBOs over random view subsets, then steps Adam on
// the summed gradients. Stage 2 replaces encoder inputs with estimates from
// randomly chosen RU-masked observations. Returns one log entry per batch.
// With a checkpoint, training resumes at its epoch and updates it on return.
std::vector<TrainLogEntry> train_multistage(ClcpModel& model,
                                            const std::vector<TrainingInstant>& dataset,
                                            const TrainConfig& cfg,
                                            TrainerCheckpoint* checkpoint = nullptr);

// Full-precision training state (weights, Adam moments, progress) for exact
// resume; distinct from the float32 deployment model file.
void save_checkpoint(const std::string& path, ClcpModel& model,
                     const TrainerCheckpoint& ckpt);
TrainerCheckpoint load_checkpoint(const std::string& path, ClcpModel& model);

// Encoded posterior means for external visualization; one row per
// (instant, link).
std::vector<LatentRow> export_latents(ClcpModel& model,
                                      const std::vector<TrainingInstant>& dataset);

}  // namespace clcp
