/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The vcell authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "vcell/harness.hpp"
#include "vcell/oracles.hpp"

using namespace vcell;

namespace {

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::size_t jobs = 1;
};

void add_common(CLI::App* cmd, Common& c, bool with_jobs) {
    cmd->add_option("--config", c.config, "key = value config file")->check(CLI::ExistingFile);
    cmd->add_option("--out", c.out, "output path");
    cmd->add_option("--seed-override", c.seed, "replace the configured seed");
    if (with_jobs) cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
}

harness::ExperimentConfig load_config(const Common& c) {
    auto cfg = c.config.empty() ? harness::ExperimentConfig::defaults() : harness::ExperimentConfig::load(c.config);
    if (c.seed) cfg.scenario.seed = *c.seed;
    return cfg;
}

// Scenario for the single-drop subcommands: a dumped file, or realization r of the config.
netgen::NetworkScenario pick_scenario(const harness::ExperimentConfig& cfg, const std::string& file, std::size_t r) {
    if (!file.empty()) return netgen::load_scenario(file);
    auto sc = cfg.scenario;
    sc.seed = harness::realization_seed(cfg, r);
    return netgen::generate_scenario(sc);
}

int cmd_run(const Common& c) {
    auto cfg = load_config(c);
    cfg.jobs = c.jobs;
    const auto t0 = std::chrono::steady_clock::now();
    const auto report = harness::run_experiment(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::printf("%-3s %-20s %-13s %-10s %14s %12s %5s %7s\n", "V", "method", "rule", "scheme", "mean_bps",
                "stderr_bps", "n", "flagged");
    for (const auto& r : report.rows) {
        std::printf("%-3zu %-20s %-13s %-10s %14.1f %12.1f %5zu %7zu\n", r.v, r.method.c_str(), r.rule.c_str(),
                    r.scheme.c_str(), r.mean_bps, r.stderr_bps, r.n, r.flagged);
    }
    std::printf("%zu realizations in %.1f s\n", cfg.realizations, secs);

    if (!c.out.empty()) {
        std::filesystem::create_directories(c.out);
        const auto csv = (std::filesystem::path(c.out) / "report.csv").string();
        harness::write_csv(report, csv);
        std::printf("wrote %s\n", csv.c_str());
        for (const auto& p : harness::emit_plot_data(report, cfg, c.out)) std::printf("wrote %s\n", p.c_str());
    }
    return 0;
}

int cmd_cluster(const Common& c, const std::string& scenario_file, std::size_t realization,
                const std::string& dump) {
    const auto cfg = load_config(c);
    const auto s = pick_scenario(cfg, scenario_file, realization);
    if (!dump.empty()) netgen::save_scenario(dump, s);
    const auto dend = cluster::minimax_dendrogram(s.bs_pos);
    if (c.out.empty()) {
        cluster::write_dendrogram(std::cout, dend);
    } else {
        std::ofstream f(c.out);
        if (!f) throw std::runtime_error("cannot write " + c.out);
        cluster::write_dendrogram(f, dend);
    }
    return 0;
}

struct CellArgs {
    std::string scenario;
    std::size_t realization = 0;
    std::size_t v = 1;
    std::size_t cell = 0;
    std::string method = "hierarchical";
    std::string rule = "best-channel";
    std::string scheme = "JD";
};

int cmd_solve_cell(const Common& c, const CellArgs& a) {
    const auto cfg = load_config(c);
    const auto s = pick_scenario(cfg, a.scenario, a.realization);
    if (a.v < 1 || a.v > s.n_bs()) throw std::invalid_argument("--v outside [1, n_bs]");
    const auto method = harness::ClusteringMethod::parse(a.method);
    // Same clustering seeds as the sweep uses for this realization.
    const std::uint64_t seed = netgen::splitmix64(harness::realization_seed(cfg, a.realization));
    cluster::BsPartition part;
    switch (method.kind) {
        case harness::MethodKind::hierarchical: part = cluster::cut(cluster::minimax_dendrogram(s.bs_pos), a.v); break;
        case harness::MethodKind::kmeans: part = cluster::kmeans_cluster(s.bs_pos, a.v, netgen::substream_seed(seed, 2 * a.v)); break;
        case harness::MethodKind::spectral: part = cluster::spectral_cluster(s.bs_pos, a.v, method.sigma, netgen::substream_seed(seed, 2 * a.v + 1)); break;
    }
    const auto layout = cluster::affiliate_users(s, part, cluster::parse_affiliation_rule(a.rule));
    if (a.cell >= a.v) throw std::invalid_argument("--cell must be below --v");
    const auto users = layout.users_of(a.cell), bss = layout.bss_of(a.cell);
    const auto cell = ic::CellProblem::from_scenario(s, users, bss);
    std::printf("cell %zu: %zu users, %zu BSs, %zu bands\n", a.cell, users.size(), bss.size(), cell.n_bands());

    std::ostream* trace = &std::cout;
    std::ofstream file;
    if (!c.out.empty()) {
        file.open(c.out);
        if (!file) throw std::runtime_error("cannot write " + c.out);
        trace = &file;
    }
    const auto scheme = harness::parse_scheme(a.scheme);
    if (scheme == harness::Scheme::jd) {
        const auto r = comp::comp_allocate(comp::CompProblem::from_cell(cell), cfg.comp);
        std::printf("rate %.3f bit/s, sweeps %d, converged %d\n", r.rate, r.sweeps, r.converged ? 1 : 0);
        *trace << "# update objective\n";
        for (std::size_t i = 0; i < r.objective_trace.size(); ++i) *trace << i + 1 << ' ' << r.objective_trace[i] << '\n';
        return 0;
    }
    ic::AllocationResult r;
    switch (scheme) {
        case harness::Scheme::continuous: r = ic::continuous_then_consolidate(cell, cfg.solver); break;
        case harness::Scheme::uc: r = ic::alternating_allocate(cell, ic::ChannelScheme::uc, cfg.solver); break;
        case harness::Scheme::bsc: r = ic::alternating_allocate(cell, ic::ChannelScheme::bsc, cfg.solver); break;
        case harness::Scheme::msrm: r = ic::alternating_allocate(cell, ic::ChannelScheme::msrm, cfg.solver); break;
        case harness::Scheme::jd: break;
    }
    std::printf("rate %.3f bit/s, iterations %d, converged %d\n", r.rate, r.iterations, r.converged ? 1 : 0);
    *trace << "# iteration rate\n";
    for (std::size_t i = 0; i < r.rate_trace.size(); ++i) *trace << i + 1 << ' ' << r.rate_trace[i] << '\n';
    *trace << "# user bs band power_mw\n";
    for (std::size_t u = 0; u < cell.n_users(); ++u) {
        for (std::size_t b = 0; b < cell.n_bss(); ++b) {
            for (std::size_t k = 0; k < cell.n_bands(); ++k) {
                if (r.power.p(u, b, k) > 0.0) {
                    *trace << users[u] << ' ' << bss[b] << ' ' << k << ' ' << r.power.p(u, b, k) << '\n';
                }
            }
        }
    }
    return 0;
}

int cmd_oracle(const Common& c, std::size_t ic_cases) {
    const std::uint64_t seed = c.seed.value_or(1);
    using Suite = oracle::SuiteResult (*)(std::size_t, std::uint64_t);
    const std::pair<Suite, std::size_t> suites[] = {{oracle::hungarian_suite, 100}, {oracle::minimax_suite, 50},
                                                   {oracle::waterfill_suite, 100}, {oracle::ic_solver_suite, ic_cases},
                                                   {oracle::kernel_suite, 100}};
    int failed = 0;
    for (std::size_t i = 0; i < std::size(suites); ++i) {
        const auto r = suites[i].first(suites[i].second, netgen::substream_seed(seed, i));
        std::printf("%s  %s (%zu cases): %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.cases, r.detail.c_str());
        if (!r.passed) ++failed;
    }
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Virtual cell formation and uplink resource allocation"};
    app.require_subcommand(1);

    Common common;
    auto* run = app.add_subcommand("run", "Monte Carlo sweep; --out names a directory for report.csv and plot data");
    add_common(run, common, true);

    std::string scenario_file, dump;
    std::size_t realization = 0;
    auto* clus = app.add_subcommand("cluster", "Minimax dendrogram of one drop's BSs");
    add_common(clus, common, false);
    clus->add_option("--scenario", scenario_file, "load a dumped scenario instead of generating one")
        ->check(CLI::ExistingFile);
    clus->add_option("--realization", realization, "realization index of the config's seed");
    clus->add_option("--dump-scenario", dump, "also write the scenario in text tensor format");

    CellArgs cell;
    auto* solve = app.add_subcommand("solve-cell", "Solve one virtual cell and print its trace");
    add_common(solve, common, false);
    solve->add_option("--scenario", cell.scenario, "load a dumped scenario")->check(CLI::ExistingFile);
    solve->add_option("--realization", cell.realization, "realization index of the config's seed");
    solve->add_option("--v", cell.v, "number of virtual cells");
    solve->add_option("--cell", cell.cell, "virtual cell index");
    solve->add_option("--method", cell.method, "hierarchical, kmeans or spectral:<sigma>");
    solve->add_option("--rule", cell.rule, "best-channel or closest-bs");
    solve->add_option("--scheme", cell.scheme, "continuous, UC, BSC, MSRM or JD");

    std::size_t ic_cases = 20;
    auto* orc = app.add_subcommand("oracle", "Brute-force reference checks");
    add_common(orc, common, false);
    orc->add_option("--ic-cases", ic_cases, "cells in the allocation-solver suite");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(common);
        if (*clus) return cmd_cluster(common, scenario_file, realization, dump);
        if (*solve) return cmd_solve_cell(common, cell);
        if (*orc) return cmd_oracle(common, ic_cases);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
