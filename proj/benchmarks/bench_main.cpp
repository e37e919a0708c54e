// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include <benchmark/benchmark.h>

#include <map>

#include "clcp/channel.hpp"
#include "clcp/detect.hpp"
#include "clcp/estimator.hpp"
#include "clcp/model.hpp"
#include "clcp/rng.hpp"
#include "clcp/scheduler.hpp"

using namespace clcp;

namespace {

PathSet bench_paths(Rng& rng, int n) {
    PathSet ps;
    ps.capacity = 8;
    for (int i = 0; i < n; ++i)
        ps.paths.push_back({rng.uniform(0.2, 2.9), rng.uniform(2.0, 50.0),
                            rng.uniform(0.2, 1.0), rng.uniform(-3.0, 3.0)});
    ps.canonicalize();
    return ps;
}

void BM_SynthesizeCsi(benchmark::State& state) {
    Rng rng(1);
    const SubcarrierGrid grid =
        SubcarrierGrid::for_bandwidth(static_cast<int>(state.range(0)), 2);
    const PathSet ps = bench_paths(rng, 4);
    for (auto _ : state) benchmark::DoNotOptimize(synthesize_csi(ps, grid));
}
BENCHMARK(BM_SynthesizeCsi)->Arg(20)->Arg(160);

void BM_EstimatePaths(benchmark::State& state) {
    Rng rng(2);
    const SubcarrierGrid grid = SubcarrierGrid::for_bandwidth(20, 2);
    const PathSet ps = bench_paths(rng, static_cast<int>(state.range(0)));
    const Csi csi = synthesize_csi(ps, grid);
    EstimatorConfig cfg;
    cfg.refine_iters = 8;
    cfg.escape_attempts = 1;
    for (auto _ : state) benchmark::DoNotOptimize(estimate_paths(csi, cfg));
}
BENCHMARK(BM_EstimatePaths)->Arg(1)->Arg(3);

void BM_DivideConquer(benchmark::State& state) {
    Rng rng(3);
    const int users = static_cast<int>(state.range(0));
    const SubcarrierGrid grid = SubcarrierGrid::for_bandwidth(20, 1);
    const RuTree tree = build_ru_tree(20);
    std::map<int, Csi> csis;
    for (int u = 0; u < users; ++u) csis.emplace(u, synthesize_csi(bench_paths(rng, 3), grid));
    const CapacityModel cap(tree, csis, 1.0, 1e-3, 1, 1);
    std::vector<SchedUserInfo> infos;
    for (int u = 0; u < users; ++u)
        infos.push_back({u, 1 + rng.uniform_int(4'000'000), static_cast<int>(rng.uniform_int(12))});
    const UserPoolSet pools = assign_user_pools(infos, tree, McsTable::builtin());
    for (auto _ : state) benchmark::DoNotOptimize(divide_conquer(pools, cap));
}
BENCHMARK(BM_DivideConquer)->Arg(6)->Arg(32)->Arg(64);

void BM_ModelPredict(benchmark::State& state) {
    Rng rng(4);
    ModelConfig mc;
    mc.n_links = 4;
    mc.latent_dim = 16;
    mc.max_paths = 6;
    mc.lstm_hidden = 32;
    mc.conv_ch1 = 8;
    mc.conv_ch2 = 16;
    mc.fc_hidden = 32;
    mc.grid = SubcarrierGrid::for_bandwidth(20, 2);
    ClcpModel model(mc, 5);
    std::map<int, PathSet> obs;
    obs[0] = bench_paths(rng, 4);
    obs[1] = bench_paths(rng, 4);
    for (auto _ : state) benchmark::DoNotOptimize(model.predict(obs, {0, 1, 2, 3}));
}
BENCHMARK(BM_ModelPredict);

void BM_DetectMl(benchmark::State& state) {
    Rng rng(6);
    const auto pts = constellation(Modulation::QAM16);
    CMat h(4, 4);
    for (auto& v : h.v) v = {rng.normal(), rng.normal()};
    std::vector<std::complex<double>> y(4);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) y[r] += h.at(r, c) * pts[rng.uniform_int(16)];
    for (auto _ : state)
        benchmark::DoNotOptimize(detect_mu(y, h, DetectionMethod::Ml, Modulation::QAM16, 0.01));
}
BENCHMARK(BM_DetectMl);

}  // namespace

BENCHMARK_MAIN();
