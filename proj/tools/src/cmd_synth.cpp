// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include <string>

#include "clcp/channel.hpp"
#include "clcp/manifest.hpp"
#include "clcp/trace_io.hpp"
#include "cli_common.hpp"
#include "commands.hpp"

namespace clcp::cli {

// Generates a ground-truth channel trace plus an environment snapshot.
int cmd_synth(const CommonArgs& args) {
    const EnvFileConfig cfg = parse_env_config(args.config, args.seed, args.has_seed);
    const SubcarrierGrid grid = grid_for(cfg);
    ensure_dir(args.out_dir);

    Environment env = build_environment(cfg.env);
    const std::string trace_path = join_path(args.out_dir, "trace.clcptrc");
    const std::string env_path = join_path(args.out_dir, "env.json");

    {
        TraceWriter writer(trace_path, grid.antennas, grid.subcarriers, env.link_count(),
                           cfg.sample_period_us);
        std::vector<Csi> sample(env.link_count());
        for (int t = 0; t < cfg.samples; ++t) {
            const std::uint64_t t_us = static_cast<std::uint64_t>(t) * cfg.sample_period_us;
            for (int l = 0; l < env.link_count(); ++l)
                sample[l] = synthesize_csi(paths_for_link(env, l), grid, t_us);
            writer.append_sample(sample);
            env = advance(env, cfg.sample_period_us * 1e-6);
        }
    }
    write_env_snapshot(cfg, env, env_path);
    log_info("wrote " + trace_path);

    RunManifest manifest;
    manifest.command = "synth";
    manifest.config_path = args.config;
    manifest.seeds = {cfg.env.rng_seed};
    manifest.output_dir = args.out_dir;
    manifest.parameters["samples"] = std::to_string(cfg.samples);
    manifest.parameters["sample_period_us"] = std::to_string(cfg.sample_period_us);
    manifest.parameters["bandwidth_mhz"] = std::to_string(cfg.bandwidth_mhz);
    manifest.parameters["links"] = std::to_string(env.link_count());
    manifest.add_input(args.config);
    manifest.add_output(trace_path);
    manifest.add_output(env_path);
    manifest.write(join_path(args.out_dir, "manifest.json"));
    return 0;
}

}  // namespace clcp::cli
