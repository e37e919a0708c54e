// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include <fstream>
#include <map>
#include <string>

#include "clcp/dataset.hpp"
#include "clcp/manifest.hpp"
#include "clcp/model.hpp"
#include "clcp/trace_io.hpp"
#include "cli_common.hpp"
#include "commands.hpp"

namespace clcp::cli {

namespace {

struct TrainFileConfig {
    std::vector<std::vector<int>> groups;  // link ids per group
    ModelConfig model;
    TrainConfig train;
    DatasetOptions dataset;
    double center_freq_ghz = 5.25;
    int max_instants = 0;  // 0 = all
};

TrainFileConfig parse_train_config(const std::string& path, std::uint64_t seed_override,
                                   bool has_seed) {
    KeyValueConfig kv = [&] {
        try {
            return KeyValueConfig::parse_file(path);
        } catch (const std::exception& e) {
            throw DataError(e.what());
        }
    }();
    try {
        TrainFileConfig out;
        if (kv.get_string("kind") != "model") throw DataError(path + ": kind must be 'model'");
        out.groups = parse_groups(kv.get_string("groups"));
        if (out.groups.empty()) throw DataError(path + ": groups must name at least one group");

        out.model.latent_dim = static_cast<int>(kv.get_int("latent_dim", 32));
        out.model.max_paths = static_cast<int>(kv.get_int("max_paths", 8));
        out.model.lstm_hidden = static_cast<int>(kv.get_int("lstm_hidden", 64));
        out.model.conv_ch1 = static_cast<int>(kv.get_int("conv_ch1", 16));
        out.model.conv_ch2 = static_cast<int>(kv.get_int("conv_ch2", 32));
        out.model.kernel = static_cast<int>(kv.get_int("kernel", 3));
        out.model.fc_hidden = static_cast<int>(kv.get_int("fc_hidden", 64));
        out.model.d_scale = kv.get_double("d_scale", 30.0);
        out.model.alpha = kv.get_double("alpha", 1.0);
        out.model.eta = kv.get_double("eta", 0.1);
        out.model.beta = kv.get_double("beta", 1e-3);

        out.train.learning_rate = kv.get_double("learning_rate", 5e-6);
        out.train.batch_size = static_cast<int>(kv.get_int("batch_size", 16));
        out.train.epochs_stage1 = static_cast<int>(kv.get_int("epochs_stage1", 60));
        out.train.epochs_stage2 = static_cast<int>(kv.get_int("epochs_stage2", 20));
        out.train.k_subsets = static_cast<int>(kv.get_int("k_subsets", -1));
        out.train.seed = static_cast<std::uint64_t>(kv.get_int("seed", 1));
        if (has_seed) out.train.seed = seed_override;

        out.dataset.masked_variants = static_cast<int>(kv.get_int("masked_variants", 3));
        out.dataset.min_mask_level = static_cast<int>(kv.get_int("min_mask_level", 1));
        out.dataset.seed = out.train.seed;
        out.dataset.estimator.max_paths = out.model.max_paths;
        out.dataset.estimator.max_delay = kv.get_double("estimator_max_delay", 60.0);
        out.dataset.estimator.residual_stop = kv.get_double("estimator_residual_stop", 0.01);

        out.center_freq_ghz = kv.get_double("center_freq_ghz", 5.25);
        out.max_instants = static_cast<int>(kv.get_int("max_instants", 0));
        kv.finish();
        return out;
    } catch (const DataError&) {
        throw;
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }
}

}  // namespace

// Trains one model per configured link group and writes per-epoch loss logs.
int cmd_train(const TrainArgs& args) {
    TrainFileConfig cfg = parse_train_config(args.config, args.seed, args.has_seed);
    ensure_dir(args.out_dir);

    RunManifest manifest;
    manifest.command = "train";
    manifest.config_path = args.config;
    manifest.seeds = {cfg.train.seed};
    manifest.output_dir = args.out_dir;
    manifest.parameters["learning_rate"] = std::to_string(cfg.train.learning_rate);
    manifest.parameters["batch_size"] = std::to_string(cfg.train.batch_size);
    manifest.add_input(args.config);
    manifest.add_input(args.trace);

    try {
        int bw = 0;
        std::uint32_t n_links = 0, n_samples = 0;
        int antennas = 0;
        {
            TraceReader probe(args.trace);
            n_links = probe.header().link_count;
            n_samples = probe.header().sample_count;
            antennas = probe.header().antennas;
            switch (probe.header().subcarriers) {
                case 256: bw = 20; break;
                case 512: bw = 40; break;
                case 1024: bw = 80; break;
                case 2048: bw = 160; break;
                default: throw DataError("trace: non-standard subcarrier count");
            }
        }
        const SubcarrierGrid grid =
            SubcarrierGrid::for_bandwidth(bw, antennas, cfg.center_freq_ghz * 1e9);

        for (std::size_t gi = 0; gi < cfg.groups.size(); ++gi) {
            const auto& links = cfg.groups[gi];
            for (int l : links)
                if (l < 0 || l >= static_cast<int>(n_links))
                    throw DataError("train: group names link " + std::to_string(l) +
                                    " but the trace has " + std::to_string(n_links));

            TraceReader reader(args.trace, grid);
            const int usable = cfg.max_instants > 0
                                   ? std::min<int>(cfg.max_instants, n_samples)
                                   : static_cast<int>(n_samples);
            std::vector<std::vector<Csi>> group_csis;
            group_csis.reserve(usable);
            for (int t = 0; t < usable; ++t) {
                auto sample = reader.read_sample(t);
                std::vector<Csi> group;
                group.reserve(links.size());
                for (int l : links) group.push_back(std::move(sample[l]));
                group_csis.push_back(std::move(group));
            }

            const RuTree tree = build_ru_tree(bw);
            log_info("estimating path parameters for group " + std::to_string(gi));
            const auto dataset = build_training_dataset(group_csis, tree, cfg.dataset);

            ModelConfig mc = cfg.model;
            mc.n_links = static_cast<int>(links.size());
            mc.link_ids = links;
            mc.grid = group_csis.front().front().grid();
            ClcpModel model(mc, cfg.train.seed);
            TrainerCheckpoint ckpt;
            if (!args.resume.empty()) {
                if (cfg.groups.size() != 1)
                    throw DataError("train: --resume supports single-group configs");
                ckpt = load_checkpoint(args.resume, model);
                log_info("resuming group " + std::to_string(gi) + " at epoch " +
                         std::to_string(ckpt.next_epoch));
            }
            log_info("training group " + std::to_string(gi));
            const auto log = train_multistage(model, dataset, cfg.train, &ckpt);

            const std::string suffix =
                cfg.groups.size() == 1 ? "" : ".g" + std::to_string(gi);
            const std::string model_path =
                join_path(args.out_dir, "model" + suffix + ".clcpmdl");
            const std::string ckpt_path =
                join_path(args.out_dir, "checkpoint" + suffix + ".clcpckpt");
            const std::string log_path =
                join_path(args.out_dir, "loss_log" + suffix + ".csv");
            model.save(model_path);
            save_checkpoint(ckpt_path, model, ckpt);

            // Per-epoch, per-stage mean losses.
            std::ofstream out(log_path);
            out << "epoch,stage,loss\n";
            int epoch = -1, stage = 0, n = 0;
            double sum = 0.0;
            auto flush = [&]() {
                if (n > 0) out << epoch << ',' << stage << ',' << sum / n << '\n';
            };
            for (const auto& e : log) {
                if (e.epoch != epoch) {
                    flush();
                    epoch = e.epoch;
                    stage = e.stage;
                    sum = 0.0;
                    n = 0;
                }
                sum += e.loss;
                ++n;
            }
            flush();

            manifest.add_output(model_path);
            manifest.add_output(ckpt_path);
            manifest.add_output(log_path);
        }
    } catch (const DataError&) {
        throw;
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }

    manifest.write(join_path(args.out_dir, "manifest.json"));
    return 0;
}

}  // namespace clcp::cli
