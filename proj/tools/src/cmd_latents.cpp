// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include <fstream>
#include <string>

#include "clcp/dataset.hpp"
#include "clcp/manifest.hpp"
#include "clcp/trace_io.hpp"
#include "cli_common.hpp"
#include "commands.hpp"

namespace clcp::cli {

// Encodes trace instants through the trained model and dumps the posterior
// means for external embedding/visualization.
int cmd_latents(const LatentsArgs& args) {
    ensure_dir(args.out_dir);
    ClcpModel model = [&] {
        try {
            return ClcpModel::load(args.model);
        } catch (const std::exception& e) {
            throw DataError(e.what());
        }
    }();

    try {
        TraceReader reader(args.trace, model.config().grid);
        const auto& ids = model.config().link_ids;
        const int total = static_cast<int>(reader.header().sample_count);
        const int step = std::max(1, total / std::max(1, args.instants));

        DatasetOptions opts;
        opts.estimator.max_paths = model.config().max_paths;
        std::vector<TrainingInstant> dataset;
        for (int t = 0; t < total && static_cast<int>(dataset.size()) < args.instants;
             t += step) {
            auto sample = reader.read_sample(t);
            TrainingInstant inst;
            inst.timestamp_us = sample.front().timestamp_us;
            for (int l : ids) {
                inst.full_inputs.push_back(estimate_paths(sample[l], opts.estimator));
                inst.param_targets.push_back(inst.full_inputs.back());
                inst.csi_targets.push_back(sample[l]);
            }
            dataset.push_back(std::move(inst));
        }

        const auto rows = export_latents(model, dataset);
        const std::string out_path = join_path(args.out_dir, "latents.csv");
        std::ofstream out(out_path);
        out << "link_id,timestamp_us";
        for (int z = 0; z < model.config().latent_dim; ++z) out << ",mu" << z;
        out << '\n';
        for (const auto& r : rows) {
            out << r.link_id << ',' << r.timestamp_us;
            for (double v : r.mu) out << ',' << v;
            out << '\n';
        }
        out.close();

        RunManifest manifest;
        manifest.command = "latents";
        manifest.output_dir = args.out_dir;
        manifest.add_input(args.model);
        manifest.add_input(args.trace);
        manifest.add_output(out_path);
        manifest.write(join_path(args.out_dir, "manifest_latents.json"));
    } catch (const DataError&) {
        throw;
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }
    return 0;
}

}  // namespace clcp::cli
