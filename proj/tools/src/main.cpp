// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include <iostream>

#include <CLI11.hpp>

#include "cli_common.hpp"
#include "commands.hpp"

using namespace clcp::cli;

int main(int argc, char** argv) {
    CLI::App app{"clcp-sim: cross-link channel prediction and 802.11ax uplink OFDMA simulation"};
    app.require_subcommand(1);

    CommonArgs synth_args;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic channel trace");
    synth->add_option("--config", synth_args.config, "Environment config file")->required();
    synth->add_option("--out", synth_args.out_dir, "Output directory");
    auto* synth_seed = synth->add_option("--seed", synth_args.seed, "Seed override");

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "Train prediction models from a trace");
    train->add_option("--trace", train_args.trace, "Input trace file")->required();
    train->add_option("--config", train_args.config, "Model config file")->required();
    train->add_option("--resume", train_args.resume, "Checkpoint to continue from");
    train->add_option("--out", train_args.out_dir, "Output directory");
    auto* train_seed = train->add_option("--seed", train_args.seed, "Seed override");

    SimulateArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "Run the uplink OFDMA simulation");
    sim->add_option("--config", sim_args.config, "Simulation config file")->required();
    sim->add_option("--model", sim_args.model, "Trained model file (clcp mode)");
    sim->add_option("--mode", sim_args.mode, "baseline | crossband | clcp | oracle")
        ->check(CLI::IsMember({"baseline", "crossband", "clcp", "oracle"}));
    sim->add_option("--users", sim_args.users, "User count override");
    sim->add_option("--bandwidth", sim_args.bandwidth_mhz, "Bandwidth override (MHz)");
    sim->add_option("--out", sim_args.out_dir, "Output directory");
    auto* sim_seed = sim->add_option("--seed", sim_args.seed, "Seed override");

    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "Summarize simulation outputs");
    report->add_option("--inputs", report_args.inputs, "summary_<mode>.json files")
        ->required()
        ->expected(-1);
    report->add_option("--out", report_args.out_dir, "Output directory");

    LatentsArgs latents_args;
    auto* latents = app.add_subcommand("latents", "Export encoder posteriors for a trace");
    latents->add_option("--model", latents_args.model, "Trained model file")->required();
    latents->add_option("--trace", latents_args.trace, "Input trace file")->required();
    latents->add_option("--out", latents_args.out_dir, "Output directory");
    latents->add_option("--instants", latents_args.instants, "Time instants to export");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*synth) {
            synth_args.has_seed = synth_seed->count() > 0;
            return cmd_synth(synth_args);
        }
        if (*train) {
            train_args.has_seed = train_seed->count() > 0;
            return cmd_train(train_args);
        }
        if (*sim) {
            sim_args.has_seed = sim_seed->count() > 0;
            return cmd_simulate(sim_args);
        }
        if (*report) return cmd_report(report_args);
        if (*latents) return cmd_latents(latents_args);
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 2;
}
