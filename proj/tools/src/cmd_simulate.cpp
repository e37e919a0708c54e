// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include <map>
#include <memory>
#include <string>

#include "clcp/mac_sim.hpp"
#include "clcp/manifest.hpp"
#include "clcp/metrics_io.hpp"
#include "cli_common.hpp"
#include "commands.hpp"

namespace clcp::cli {

namespace {

SimConfig parse_sim_config(const std::string& path, const SimulateArgs& args,
                           std::string* env_config_path) {
    KeyValueConfig kv = [&] {
        try {
            return KeyValueConfig::parse_file(path);
        } catch (const std::exception& e) {
            throw DataError(e.what());
        }
    }();
    try {
        SimConfig cfg;
        if (kv.get_string("kind") != "sim") throw DataError(path + ": kind must be 'sim'");

        cfg.mode = sim_mode_from_name(
            (args.mode.empty() ? kv.get_string("mode", "baseline") : args.mode).c_str());
        cfg.bandwidth_mhz = args.bandwidth_mhz > 0
                                ? args.bandwidth_mhz
                                : static_cast<int>(kv.get_int("bandwidth_mhz", 20));
        cfg.users = args.users > 0 ? args.users : static_cast<int>(kv.get_int("users", 8));
        cfg.ap_antennas = static_cast<int>(kv.get_int("ap_antennas", 2));
        cfg.user_antennas = static_cast<int>(kv.get_int("user_antennas", 1));
        cfg.traffic_bps_per_user = kv.get_double("traffic_mbps_per_user", 5.0) * 1e6;
        cfg.coherence_time_s = kv.get_double("coherence_ms", 15.0) * 1e-3;
        cfg.duration_s = kv.get_double("duration_s", 2.0);
        cfg.seed = args.has_seed ? args.seed
                                 : static_cast<std::uint64_t>(kv.get_int("seed", 1));
        cfg.tx_power = kv.get_double("tx_power", 1.0);
        cfg.noise_power = kv.get_double("noise_power", 4e-4);
        cfg.t_min_time_s = kv.get_double("t_min_ms", 0.5) * 1e-3;
        cfg.reflectors = static_cast<int>(kv.get_int("reflectors", 3));
        if (kv.has("room")) {
            const auto r = kv.get_doubles("room");
            if (r.size() != 3) throw DataError("config: room needs three extents");
            cfg.room.lo = {0.0, 0.0, 0.0};
            cfg.room.hi = {r[0], r[1], r[2]};
        }

        cfg.feedback.csi_bits = static_cast<int>(kv.get_int("csi_bits", 8));
        cfg.feedback.subcarrier_group = static_cast<int>(kv.get_int("subcarrier_group", 4));
        cfg.feedback.feedback_mcs = static_cast<int>(kv.get_int("feedback_mcs", 7));
        cfg.measure_impairments = kv.get_bool("measure_impairments", false);
        cfg.oracle_predictor = kv.get_bool("oracle_predictor", false);
        if (kv.has("groups")) cfg.groups = parse_groups(kv.get_string("groups"));
        cfg.group_radius_m = kv.get_double("group_radius_m", 4.0);
        cfg.dq.beam_width = static_cast<int>(kv.get_int("dq_beam_width", 32));
        cfg.dq.exact_user_limit = static_cast<int>(kv.get_int("dq_exact_user_limit", 12));
        cfg.estimator.max_delay = kv.get_double("estimator_max_delay", 60.0);

        if (kv.has("env")) *env_config_path = kv.get_string("env");
        kv.finish();
        return cfg;
    } catch (const DataError&) {
        throw;
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }
}

}  // namespace

int cmd_simulate(const SimulateArgs& args) {
    std::string env_config_path;
    SimConfig cfg = parse_sim_config(args.config, args, &env_config_path);
    ensure_dir(args.out_dir);

    RunManifest manifest;
    manifest.command = "simulate";
    manifest.config_path = args.config;
    manifest.seeds = {cfg.seed};
    manifest.output_dir = args.out_dir;
    manifest.parameters["mode"] = sim_mode_name(cfg.mode);
    manifest.parameters["users"] = std::to_string(cfg.users);
    manifest.parameters["bandwidth_mhz"] = std::to_string(cfg.bandwidth_mhz);
    manifest.add_input(args.config);

    if (!env_config_path.empty()) {
        const EnvFileConfig env_cfg = parse_env_config(env_config_path, cfg.seed, true);
        cfg.environment = env_cfg.env;
        cfg.users = static_cast<int>(env_cfg.env.users.size());
        manifest.add_input(env_config_path);
    }

    // One trained model per proximity group in clcp mode; the oracle
    // substitute skips model inference but keeps the acquisition protocol.
    std::unique_ptr<ClcpModel> model;
    if (cfg.mode == SimMode::Clcp && !cfg.oracle_predictor) {
        if (args.model.empty())
            throw DataError("simulate: --model is required in clcp mode");
        try {
            model = std::make_unique<ClcpModel>(ClcpModel::load(args.model));
        } catch (const std::exception& e) {
            throw DataError(e.what());
        }
        manifest.add_input(args.model);
        if (cfg.groups.empty()) cfg.groups = {model->config().link_ids};
        for (std::size_t g = 0; g < cfg.groups.size(); ++g)
            if (cfg.groups[g].size() > 1) cfg.group_models[static_cast<int>(g)] = model.get();
    }

    SimMetrics metrics;
    try {
        metrics = run_simulation(cfg);
    } catch (const std::invalid_argument& e) {
        throw DataError(e.what());
    } catch (const std::runtime_error& e) {
        throw NumericalError(e.what());
    }

    const std::string tag = sim_mode_name(cfg.mode);
    const std::string csv = join_path(args.out_dir, "metrics_" + tag + ".csv");
    const std::string summary = join_path(args.out_dir, "summary_" + tag + ".json");
    const std::string events = join_path(args.out_dir, "events_" + tag + ".ndjson");
    write_metrics_csv(metrics, csv);
    write_summary_json(metrics, summary);
    write_events_ndjson(metrics, events);
    manifest.add_output(csv);
    manifest.add_output(summary);
    manifest.add_output(events);
    manifest.write(join_path(args.out_dir, "manifest_" + tag + ".json"));
    log_info("simulated " + tag + ": " + std::to_string(metrics.delivered_bits) +
             " bits delivered");
    return 0;
}

}  // namespace clcp::cli
