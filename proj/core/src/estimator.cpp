// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include "clcp/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "clcp/channel.hpp"
#include "clcp/linalg.hpp"

namespace clcp {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Workspace {
    const Csi* csi = nullptr;
    std::vector<int> observed;       // observed subcarrier indices
    std::vector<double> inv_lambda;  // 1/lambda per observed subcarrier
    double spacing = 0.0;
    int antennas = 0;
    double norm = 0.0;  // M * |observed|, the dictionary column energy
};

// <v(theta, d), r> over observed entries, with v the unit-amplitude
// zero-phase Eq.-2 column.
std::complex<double> correlate(const Workspace& ws,
                               const std::vector<std::complex<double>>& residual, double theta,
                               double d) {
    const double cos_t = std::cos(theta);
    std::complex<double> acc{0.0, 0.0};
    const int S = ws.csi->subcarriers;
    for (std::size_t oi = 0; oi < ws.observed.size(); ++oi) {
        const int s = ws.observed[oi];
        const double il = ws.inv_lambda[oi];
        const double base = 2.0 * kPi * d * il;           // conj of -2*pi*d/lambda
        const double step = 2.0 * kPi * ws.spacing * cos_t * il;
        std::complex<double> w{std::cos(base), std::sin(base)};
        const std::complex<double> rot{std::cos(step), std::sin(step)};
        for (int m = 0; m < ws.antennas; ++m) {
            acc += residual[static_cast<std::size_t>(m) * S + s] * w;
            w *= rot;
        }
    }
    return acc;
}

void add_path(const Workspace& ws, std::vector<std::complex<double>>& residual, const Path& p,
              double scale) {
    const int S = ws.csi->subcarriers;
    for (std::size_t oi = 0; oi < ws.observed.size(); ++oi) {
        const int s = ws.observed[oi];
        const double lambda = 1.0 / ws.inv_lambda[oi];
        const double base = path_base_phase(p, lambda);
        const double step = path_antenna_phase_step(p, ws.spacing, lambda);
        std::complex<double> v{p.a * scale * std::cos(base), p.a * scale * std::sin(base)};
        const std::complex<double> rot{std::cos(step), std::sin(step)};
        for (int m = 0; m < ws.antennas; ++m) {
            residual[static_cast<std::size_t>(m) * S + s] += v;
            v *= rot;
        }
    }
}

double residual_energy(const Workspace& ws, const std::vector<std::complex<double>>& residual) {
    double e = 0.0;
    const int S = ws.csi->subcarriers;
    for (int s : ws.observed)
        for (int m = 0; m < ws.antennas; ++m)
            e += std::norm(residual[static_cast<std::size_t>(m) * S + s]);
    return e;
}

// Coarse grid search maximizing |<v, r>|^2. The delay sweep reuses the
// per-theta antenna-collapsed products and advances the delay phasor
// incrementally, so the cost is O(angles * delays * observed).
void coarse_search(const Workspace& ws, const std::vector<std::complex<double>>& residual,
                   const EstimatorConfig& cfg, double delay_step, double& best_theta,
                   double& best_d, double& best_score) {
    const int S = ws.csi->subcarriers;
    const int n_angle = static_cast<int>(kPi / cfg.angle_grid_step) + 1;
    const int n_delay = std::max(1, static_cast<int>(cfg.max_delay / delay_step) + 1);

    std::vector<std::complex<double>> collapsed(ws.observed.size());
    std::vector<std::complex<double>> rot(ws.observed.size());
    best_score = -1.0;
    for (int ai = 0; ai < n_angle; ++ai) {
        const double theta = std::min(kPi, ai * cfg.angle_grid_step);
        const double cos_t = std::cos(theta);
        for (std::size_t oi = 0; oi < ws.observed.size(); ++oi) {
            const int s = ws.observed[oi];
            const double il = ws.inv_lambda[oi];
            const double step = 2.0 * kPi * ws.spacing * cos_t * il;
            std::complex<double> w{1.0, 0.0};
            const std::complex<double> r{std::cos(step), std::sin(step)};
            std::complex<double> acc{0.0, 0.0};
            for (int m = 0; m < ws.antennas; ++m) {
                acc += residual[static_cast<std::size_t>(m) * S + s] * w;
                w *= r;
            }
            collapsed[oi] = acc;
            const double dstep = 2.0 * kPi * delay_step * il;
            rot[oi] = {std::cos(dstep), std::sin(dstep)};
        }
        for (int di = 0; di < n_delay; ++di) {
            std::complex<double> corr{0.0, 0.0};
            for (std::size_t oi = 0; oi < ws.observed.size(); ++oi) corr += collapsed[oi];
            const double score = std::norm(corr);
            if (score > best_score) {
                best_score = score;
                best_theta = theta;
                best_d = di * delay_step;
            }
            if (di + 1 < n_delay)
                for (std::size_t oi = 0; oi < ws.observed.size(); ++oi)
                    collapsed[oi] *= rot[oi];
        }
    }
}

// Local 1-D hill polish around the current value with a shrinking bracket.
template <typename F>
double polish_axis(F&& score, double x0, double width, double lo, double hi, int rounds) {
    double best_x = x0;
    double best = score(x0);
    for (int it = 0; it < rounds; ++it) {
        const double offs[4] = {-width, -0.5 * width, 0.5 * width, width};
        for (double o : offs) {
            const double x = std::clamp(x0 + o, lo, hi);
            const double v = score(x);
            if (v > best) {
                best = v;
                best_x = x;
            }
        }
        x0 = best_x;
        width *= 0.45;
    }
    return best_x;
}

struct RefineGrid {
    double width_theta;
    double width_d;
    double max_theta;
    double max_d;
};

// Joint linear least squares over all tuples' complex gains given their
// geometries: solve the Gram system of the Eq.-2 dictionary columns. Far
// stronger than per-path fitting when mainlobes overlap. Leaves the paths
// untouched if the Gram matrix is numerically singular.
void joint_gain_fit(const Workspace& ws, std::vector<std::complex<double>>& residual,
                    std::vector<Path>& paths) {
    const int L = static_cast<int>(paths.size());
    if (L < 1) return;
    for (auto& p : paths) add_path(ws, residual, p, 1.0);

    // <v_l, v_m> and <v_l, y> over observed entries.
    CMat gram(L, L);
    std::vector<std::complex<double>> rhs(L);
    const int S = ws.csi->subcarriers;
    std::vector<std::vector<std::complex<double>>> cols(L);
    for (int l = 0; l < L; ++l) {
        Path unit = paths[l];
        unit.a = 1.0;
        unit.phi = 0.0;
        cols[l].assign(ws.observed.size() * ws.antennas, {});
        std::size_t k = 0;
        for (std::size_t oi = 0; oi < ws.observed.size(); ++oi) {
            const int s = ws.observed[oi];
            const double lambda = 1.0 / ws.inv_lambda[oi];
            const double base = path_base_phase(unit, lambda);
            const double step = path_antenna_phase_step(unit, ws.spacing, lambda);
            std::complex<double> v{std::cos(base), std::sin(base)};
            const std::complex<double> rot{std::cos(step), std::sin(step)};
            for (int m = 0; m < ws.antennas; ++m) {
                cols[l][k++] = v;
                v *= rot;
            }
        }
    }
    for (int l = 0; l < L; ++l) {
        std::complex<double> b{0.0, 0.0};
        std::size_t k = 0;
        for (std::size_t oi = 0; oi < ws.observed.size(); ++oi) {
            const int s = ws.observed[oi];
            for (int m = 0; m < ws.antennas; ++m, ++k)
                b += std::conj(cols[l][k]) * residual[static_cast<std::size_t>(m) * S + s];
        }
        rhs[l] = b;
        for (int m2 = l; m2 < L; ++m2) {
            std::complex<double> g{0.0, 0.0};
            for (std::size_t k2 = 0; k2 < cols[l].size(); ++k2)
                g += std::conj(cols[l][k2]) * cols[m2][k2];
            gram.at(l, m2) = g;
            gram.at(m2, l) = std::conj(g);
        }
    }

    CMat inv;
    if (invert(gram, inv, 1e-9)) {
        for (int l = 0; l < L; ++l) {
            std::complex<double> c{0.0, 0.0};
            for (int m2 = 0; m2 < L; ++m2) c += inv.at(l, m2) * rhs[m2];
            paths[l].a = std::abs(c);
            paths[l].phi = std::arg(c);
        }
    }
    for (auto& p : paths) add_path(ws, residual, p, -1.0);
}

// 2-D pattern search over (theta, d): compass and diagonal moves with a
// shrinking step, which cuts through the diagonal ridges where separable
// axis descent zigzag-stalls.
template <typename F>
void pattern_search_2d(F&& score, double& x, double& y, double wx, double wy, double lo_x,
                       double hi_x, double lo_y, double hi_y, int rounds) {
    double best = score(x, y);
    for (int it = 0; it < rounds; ++it) {
        static const int dx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
        static const int dy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
        bool moved = true;
        int hops = 0;
        while (moved && hops < 4) {
            moved = false;
            for (int k = 0; k < 8; ++k) {
                const double cx = std::clamp(x + dx[k] * wx, lo_x, hi_x);
                const double cy = std::clamp(y + dy[k] * wy, lo_y, hi_y);
                const double v = score(cx, cy);
                if (v > best) {
                    best = v;
                    x = cx;
                    y = cy;
                    moved = true;
                }
            }
            ++hops;
        }
        wx *= 0.5;
        wy *= 0.5;
    }
}

// One refinement sweep over all tuples: each path is added back to the
// residual, its (theta, d) re-optimized locally, gains re-fit jointly, and
// the updated path subtracted again.
void refine_sweep(const Workspace& ws, std::vector<std::complex<double>>& residual,
                  std::vector<Path>& paths, const RefineGrid& grid) {
    for (auto& p : paths) {
        add_path(ws, residual, p, 1.0);
        auto score = [&](double t, double dd) {
            return std::norm(correlate(ws, residual, t, dd));
        };
        pattern_search_2d(score, p.theta, p.d, grid.width_theta, grid.width_d, 0.0,
                          grid.max_theta, 0.0, grid.max_d, 3);
        const std::complex<double> c = correlate(ws, residual, p.theta, p.d) / ws.norm;
        p.a = std::abs(c);
        p.phi = std::arg(c);
        add_path(ws, residual, p, -1.0);
    }
    joint_gain_fit(ws, residual, paths);
}

}  // namespace

void EstimatorConfig::validate() const {
    if (max_paths < 1) throw std::invalid_argument("EstimatorConfig: max_paths must be >= 1");
    if (angle_grid_step <= 0.0 || delay_grid_step < 0.0)
        throw std::invalid_argument("EstimatorConfig: grid steps must be positive");
    if (!(residual_stop > 0.0 && residual_stop < 1.0))
        throw std::invalid_argument("EstimatorConfig: residual_stop must be in (0, 1)");
    if (refine_iters < 0) throw std::invalid_argument("EstimatorConfig: negative refine_iters");
    if (escape_attempts < 0)
        throw std::invalid_argument("EstimatorConfig: negative escape_attempts");
    if (!(max_delay > 0.0)) throw std::invalid_argument("EstimatorConfig: max_delay must be > 0");
}

PathSet estimate_paths(const Csi& csi, const EstimatorConfig& cfg,
                       std::vector<double>* residual_trajectory) {
    cfg.validate();
    if (residual_trajectory) residual_trajectory->clear();
    csi.validate();

    Workspace ws;
    ws.csi = &csi;
    ws.spacing = csi.antenna_spacing;
    ws.antennas = csi.antennas;
    for (int s = 0; s < csi.subcarriers; ++s)
        if (csi.observed[s]) {
            ws.observed.push_back(s);
            ws.inv_lambda.push_back(1.0 / csi.wavelengths[s]);
        }
    if (ws.observed.empty())
        throw std::invalid_argument("estimate_paths: empty observation mask");
    ws.norm = static_cast<double>(ws.antennas) * ws.observed.size();

    PathSet result;
    result.capacity = cfg.max_paths;

    std::vector<std::complex<double>> residual = csi.values;
    const double total_power = residual_energy(ws, residual);
    if (total_power <= 0.0) return result;  // zero channel: nothing to extract

    const SubcarrierGrid grid = csi.grid();
    const double delay_step = cfg.delay_grid_step > 0.0
                                  ? cfg.delay_grid_step
                                  : kSpeedOfLight / (2.0 * grid.bandwidth_hz());
    const double ambiguous_range = kSpeedOfLight / grid.delta_f_hz;

    // Greedy successive extraction. Each new tuple is polished off the
    // coarse grid before subtraction, and the set refined jointly after
    // every extraction, so later iterations see a clean residual instead of
    // grid-quantization ghosts.
    while (result.size() < cfg.max_paths) {
        if (residual_energy(ws, residual) / total_power <= cfg.residual_stop) break;
        double theta = 0.0, d = 0.0, score = 0.0;
        coarse_search(ws, residual, cfg, delay_step, theta, d, score);
        if (score / ws.norm <= 1e-14 * total_power) break;  // nothing correlates

        for (int pass = 0; pass < 6; ++pass) {
            auto score_theta = [&](double t) { return std::norm(correlate(ws, residual, t, d)); };
            theta = polish_axis(score_theta, theta, cfg.angle_grid_step * std::pow(0.5, pass),
                                0.0, kPi, 3);
            auto score_d = [&](double dd) {
                return std::norm(correlate(ws, residual, theta, dd));
            };
            d = polish_axis(score_d, d, delay_step * std::pow(0.5, pass), 0.0, cfg.max_delay, 3);
        }

        const std::complex<double> c = correlate(ws, residual, theta, d) / ws.norm;
        Path p;
        p.theta = theta;
        p.d = d;
        p.a = std::abs(c);
        p.phi = std::arg(c);
        if (p.a <= 0.0) break;
        add_path(ws, residual, p, -1.0);
        result.paths.push_back(p);

        // Cyclic re-fit of everything found so far.
        RefineGrid rg{0.5 * cfg.angle_grid_step, 0.5 * delay_step, kPi, cfg.max_delay};
        for (int it = 0; it < 2; ++it) {
            refine_sweep(ws, residual, result.paths, rg);
            rg.width_theta *= 0.5;
            rg.width_d *= 0.5;
        }
        if (residual_trajectory)
            residual_trajectory->push_back(residual_energy(ws, residual) / total_power);
    }

    // Joint coordinate-descent refinement with a slowly shrinking bracket.
    auto joint_refine = [&](int iters) {
        RefineGrid rg{0.5 * cfg.angle_grid_step, 0.5 * delay_step, kPi, cfg.max_delay};
        for (int it = 0; it < iters && !result.paths.empty(); ++it) {
            refine_sweep(ws, residual, result.paths, rg);
            rg.width_theta *= 0.7;
            rg.width_d *= 0.7;
        }
        // Deep polish: the (d, phi) trade-off leaves a nearly flat valley
        // whose floor sits well below the decayed bracket, so finish with a
        // few aggressively shrinking sweeps.
        for (int it = 0; it < 6 && !result.paths.empty(); ++it) {
            refine_sweep(ws, residual, result.paths, rg);
            rg.width_theta *= 0.25;
            rg.width_d *= 0.25;
        }
    };
    joint_refine(cfg.refine_iters);

    // Escape passes for entangled local optima: drop one or two tuples back
    // into the residual, re-extract them greedily and refine; keep the
    // outcome only when it actually improves the fit.
    auto extract_one = [&]() {
        double theta = 0.0, d = 0.0, score = 0.0;
        coarse_search(ws, residual, cfg, delay_step, theta, d, score);
        for (int pass = 0; pass < 6; ++pass) {
            auto score_theta = [&](double t) { return std::norm(correlate(ws, residual, t, d)); };
            theta = polish_axis(score_theta, theta, cfg.angle_grid_step * std::pow(0.5, pass),
                                0.0, kPi, 3);
            auto score_d = [&](double dd) {
                return std::norm(correlate(ws, residual, theta, dd));
            };
            d = polish_axis(score_d, d, delay_step * std::pow(0.5, pass), 0.0, cfg.max_delay, 3);
        }
        const std::complex<double> c = correlate(ws, residual, theta, d) / ws.norm;
        Path p;
        p.theta = theta;
        p.d = d;
        p.a = std::abs(c);
        p.phi = std::arg(c);
        add_path(ws, residual, p, -1.0);
        result.paths.push_back(p);
    };

    for (int attempt = 0; attempt < cfg.escape_attempts && result.size() > 1; ++attempt) {
        const double before = residual_energy(ws, residual);
        if (before / total_power <= 1e-4) break;
        const std::vector<Path> paths_snapshot = result.paths;
        const std::vector<std::complex<double>> residual_snapshot = residual;

        std::vector<std::size_t> order(result.paths.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return result.paths[a].a < result.paths[b].a;
        });
        // Attempts 0-2 re-seed single tuples by ascending amplitude,
        // attempts 3-4 re-seed pairs, attempts 5-6 grow the model by one
        // extra tuple for structure the fixed set cannot reach.
        std::vector<std::size_t> victims;
        if (attempt < 3) {
            victims = {order[attempt % order.size()]};
        } else if (attempt < 5 && order.size() >= 2) {
            victims = {order[0], order[attempt - 2 < order.size() ? attempt - 2 : 1]};
        } else if (result.size() >= cfg.max_paths) {
            break;  // cannot grow further
        }
        std::sort(victims.begin(), victims.end());
        victims.erase(std::unique(victims.begin(), victims.end()), victims.end());
        for (auto it = victims.rbegin(); it != victims.rend(); ++it) {
            add_path(ws, residual, result.paths[*it], 1.0);
            result.paths.erase(result.paths.begin() + *it);
        }
        const std::size_t to_extract = victims.empty() ? 1 : victims.size();
        for (std::size_t k = 0; k < to_extract; ++k) {
            extract_one();
            RefineGrid rg{0.5 * cfg.angle_grid_step, 0.5 * delay_step, kPi, cfg.max_delay};
            refine_sweep(ws, residual, result.paths, rg);
        }
        joint_refine(cfg.refine_iters);

        if (residual_energy(ws, residual) >= 0.9 * before) {
            result.paths = paths_snapshot;
            residual = residual_snapshot;
        }
    }

    if (residual_trajectory)
        residual_trajectory->push_back(residual_energy(ws, residual) / total_power);

    // Normalize into the domain invariants: drop degenerate paths and wrap
    // delays into the unambiguous range.
    std::vector<Path> kept;
    for (auto& p : result.paths) {
        if (p.a <= 1e-12) continue;
        p.d = std::fmod(p.d, ambiguous_range);
        if (p.d < 0.0) p.d += ambiguous_range;
        kept.push_back(p);
    }
    result.paths = std::move(kept);

    // Amplitudes live in (0, 1]. When the unconstrained fit wants more,
    // pin the violators to 1 and re-fit the remaining gains against what is
    // left of the channel.
    bool any_clamped = false;
    for (auto& p : result.paths)
        if (p.a > 1.0) {
            p.a = 1.0;
            any_clamped = true;
        }
    if (any_clamped && !result.paths.empty()) {
        std::vector<std::complex<double>> res2 = csi.values;
        for (const auto& p : result.paths) add_path(ws, res2, p, -1.0);
        std::vector<Path> free_paths;
        std::vector<std::size_t> free_idx;
        for (std::size_t i = 0; i < result.paths.size(); ++i)
            if (result.paths[i].a < 1.0) {
                free_paths.push_back(result.paths[i]);
                free_idx.push_back(i);
            }
        if (!free_paths.empty()) {
            joint_gain_fit(ws, res2, free_paths);
            for (std::size_t i = 0; i < free_paths.size(); ++i) {
                free_paths[i].a = std::min(free_paths[i].a, 1.0);
                result.paths[free_idx[i]] = free_paths[i];
            }
        }
    }

    result.canonicalize();
    return result;
}

double residual_power(const Csi& csi, const PathSet& ps) {
    csi.validate();
    const double denom = csi.observed_power();
    if (denom <= 0.0) throw std::invalid_argument("residual_power: zero-power channel");

    std::vector<std::complex<double>> residual = csi.values;
    Csi model = Csi::zeros(csi.grid());
    for (const auto& p : ps.paths) accumulate_path(model, p);
    double num = 0.0;
    for (int m = 0; m < csi.antennas; ++m)
        for (int s = 0; s < csi.subcarriers; ++s)
            if (csi.observed[s]) num += std::norm(csi.at(m, s) - model.at(m, s));
    return num / denom;
}

}  // namespace clcp
