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
// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "vcell/harness.hpp"
#include "vcell/oracles.hpp"

using namespace vcell;
using namespace vcell::harness;

namespace {

struct Verdict {
    bool passed = false;
    std::string detail;
};

std::string fmt(const char* f, double a = 0.0, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

Verdict from_suite(const oracle::SuiteResult& r) { return {r.passed, r.detail}; }

const std::vector<Scheme> kSud = {Scheme::continuous, Scheme::uc, Scheme::bsc, Scheme::msrm};

// --- Monte Carlo criteria -------------------------------------------------------

struct Sweep {
    ExperimentConfig cfg;
    Report report;
    std::vector<RealizationResult> raw;
};

Sweep run_sweep(std::size_t realizations, std::size_t jobs) {
    Sweep s;
    s.cfg = ExperimentConfig::defaults();
    s.cfg.realizations = realizations;
    s.cfg.jobs = jobs;
    // Loose enough for a 200-drop full sweep on a desk machine.
    s.cfg.solver.tol_outer = 1e-4;
    s.cfg.solver.tol_fixed = 1e-6;

    s.raw.resize(realizations);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t r; (r = next.fetch_add(1)) < realizations;) {
            auto sc = s.cfg.scenario;
            sc.seed = realization_seed(s.cfg, r);
            s.raw[r] = evaluate_realization(netgen::generate_scenario(sc), s.cfg, netgen::splitmix64(sc.seed));
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(jobs, realizations); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    s.report = aggregate(s.cfg, s.raw);
    return s;
}

const ReportRow& row(const Sweep& s, std::size_t v, const std::string& method, cluster::AffiliationRule rule,
                     const std::string& scheme) {
    const auto* r = s.report.find(v, method, cluster::to_string(rule), scheme);
    if (!r) throw std::logic_error("missing report row");
    return *r;
}

std::size_t method_index(const Sweep& s, const std::string& id) {
    for (std::size_t i = 0; i < s.cfg.methods.size(); ++i) {
        if (s.cfg.methods[i].id() == id) return i;
    }
    throw std::logic_error("missing method");
}

Verdict ic_gain(const Sweep& s) {
    double best1 = 0.0, best15 = 0.0;
    for (auto rule : s.cfg.rules) {
        best1 = std::max(best1, row(s, 1, "hierarchical", rule, kMaxSud).mean_bps);
        best15 = std::max(best15, row(s, 15, "hierarchical", rule, kMaxSud).mean_bps);
    }
    const double gain = best1 / best15 - 1.0;
    return {gain >= 0.10 && gain <= 0.35,
            fmt("best SUD average %.4g Mbps at V=1 vs %.4g Mbps at V=15, gain %.1f%% (band 10-35%%)", best1 / 1e6,
                best15 / 1e6, 100.0 * gain)};
}

Verdict comp_gain(const Sweep& s) {
    const auto rule = cluster::AffiliationRule::best_channel;
    const double r1 = row(s, 1, "hierarchical", rule, "JD").mean_bps;
    const double r15 = row(s, 15, "hierarchical", rule, "JD").mean_bps;
    const double ratio = r1 / r15;
    return {ratio >= 3.0 && ratio <= 6.0,
            fmt("JD best channel %.4g Mbps at V=1 vs %.4g Mbps at V=15, ratio %.2f (band 3-6)", r1 / 1e6, r15 / 1e6,
                ratio)};
}

Verdict crossover(const Sweep& s) {
    // Per realization, JD against the best of the four SUD schemes on the same drop.
    const std::size_t hier = method_index(s, "hierarchical");
    bool ok = true;
    std::string detail;
    for (std::size_t ri = 0; ri < s.cfg.rules.size(); ++ri) {
        std::size_t wins = 0;
        for (const auto& r : s.raw) {
            double jd = -1.0, sud = -1.0;
            for (const auto& o : r.outcomes) {
                if (o.v != 1 || o.method != hier || o.rule != ri) continue;
                if (o.scheme == Scheme::jd) jd = o.system_rate;
                if (is_sud(o.scheme)) sud = std::max(sud, o.system_rate);
            }
            if (jd >= sud) ++wins;
        }
        const double frac = static_cast<double>(wins) / static_cast<double>(s.raw.size());
        ok = ok && frac >= 0.95;
        detail += (detail.empty() ? "" : ", ") + cluster::to_string(s.cfg.rules[ri]) +
                  fmt(" JD >= max SUD at V=1 in %.1f%% of drops", 100.0 * frac);
    }
    return {ok, detail + " (need 95%)"};
}

Verdict clustering(const Sweep& s) {
    bool ok = true;
    std::string worst;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (auto rule : s.cfg.rules) {
        for (const char* scheme : {kMaxSud, "JD"}) {
            auto avg = [&](const std::string& method, double& slack) {
                double sum = 0.0, se = 0.0;
                for (std::size_t v = 2; v <= 14; ++v) {
                    const auto& h = row(s, v, "hierarchical", rule, scheme);
                    const auto& o = row(s, v, method, rule, scheme);
                    sum += o.mean_bps;
                    se += std::hypot(h.stderr_bps, o.stderr_bps);
                }
                slack = se / 13.0;
                return sum / 13.0;
            };
            double unused = 0.0;
            const double hier = avg("hierarchical", unused);
            for (const auto& m : s.cfg.methods) {
                if (m.kind == MethodKind::hierarchical) continue;
                double slack = 0.0;
                const double other = avg(m.id(), slack);
                const double margin = (hier - other + slack) / other;
                if (hier < other - slack) ok = false;
                if (margin < worst_margin) {
                    worst_margin = margin;
                    worst = m.id() + " / " + scheme + " / " + cluster::to_string(rule) +
                            fmt(": hierarchical %.4g vs %.4g Mbps, slack %.3g Mbps", hier / 1e6, other / 1e6,
                                slack / 1e6);
                }
            }
        }
    }
    return {ok, "closest comparison " + worst};
}

// --- property criteria ----------------------------------------------------------

ic::CellProblem generated_cell(std::uint64_t seed, std::size_t users, std::size_t bss, std::size_t bands) {
    netgen::ScenarioConfig sc;
    sc.n_bs = bss;
    sc.n_users = users;
    sc.n_bands = bands;
    sc.seed = seed;
    const auto s = netgen::generate_scenario(sc);
    std::vector<std::size_t> u(users), b(bss);
    for (std::size_t i = 0; i < users; ++i) u[i] = i;
    for (std::size_t i = 0; i < bss; ++i) b[i] = i;
    return ic::CellProblem::from_scenario(s, u, b);
}

Verdict monotonicity() {
    constexpr double kSlack = 1e-9;  // relative rounding allowance
    std::size_t alg_bad = 0, alg_runs = 0, ascent_bad = 0, ascent_runs = 0, cons_bad = 0, cons_runs = 0;
    double alg_worst = 0.0, ascent_worst = 0.0, cons_worst = 0.0;

    ic::SolverOptions opts;
    opts.alpha0 = ic::Alpha0Policy::gamma_sinr_bar;
    for (std::uint64_t c = 0; c < 12; ++c) {
        const auto cell = generated_cell(netgen::substream_seed(91, c), 2 + c % 5, 1 + c % 4, 1 + c % 3);
        for (auto scheme : {ic::ChannelScheme::uc, ic::ChannelScheme::msrm}) {
            const auto r = ic::alternating_allocate(cell, scheme, opts);
            ++alg_runs;
            bool bad = false;
            for (std::size_t i = 1; i < r.rate_trace.size(); ++i) {
                const double drop = (r.rate_trace[i - 1] - r.rate_trace[i]) / r.rate_trace[i - 1];
                alg_worst = std::max(alg_worst, drop);
                if (drop > kSlack) bad = true;
            }
            if (bad) ++alg_bad;
        }
        const auto jd = comp::comp_allocate(comp::CompProblem::from_cell(cell));
        ++ascent_runs;
        bool bad = false;
        for (std::size_t i = 1; i < jd.objective_trace.size(); ++i) {
            const double drop = (jd.objective_trace[i - 1] - jd.objective_trace[i]) / jd.objective_trace[i - 1];
            ascent_worst = std::max(ascent_worst, drop);
            if (drop > kSlack) bad = true;
        }
        if (bad) ++ascent_bad;
    }

    // Consolidation on random feasible powers, small cells.
    std::mt19937_64 rng(92);
    std::uniform_real_distribution<double> w(0.0, 1.0);
    for (int c = 0; c < 200; ++c) {
        const auto cell = oracle::random_cell(rng, 2, 2, 2);
        auto p = ic::PowerAllocation::zeros(cell);
        for (std::size_t u = 0; u < 2; ++u) {
            double sum = 0.0;
            for (std::size_t i = 0; i < 4; ++i) sum += p.p.flat()[u * 4 + i] = w(rng);
            const double scale = w(rng) * cell.budget_mw[u] / sum;
            for (std::size_t i = 0; i < 4; ++i) p.p.flat()[u * 4 + i] *= scale;
        }
        auto before = ic::ChannelAssignment::zeros(cell);
        for (std::size_t u = 0; u < 2; ++u) {
            for (std::size_t k = 0; k < 2; ++k) {
                before.gamma(u, ic::sinr(cell, p, u, 1, k) > ic::sinr(cell, p, u, 0, k) ? 1 : 0, k) = 1;
            }
        }
        const auto [gamma, q] = ic::consolidate(cell, p);
        const double r0 = ic::cell_sum_rate(cell, before, p), r1 = ic::cell_sum_rate(cell, gamma, q);
        ++cons_runs;
        const double drop = (r0 - r1) / std::max(r0, 1e-300);
        cons_worst = std::max(cons_worst, drop);
        if (drop > kSlack) ++cons_bad;
    }
    return {alg_bad == 0 && ascent_bad == 0 && cons_bad == 0,
            fmt("alternating %.0f/%.0f runs decrease, ", alg_bad, alg_runs) +
                fmt("cyclic ascent %.0f/%.0f, consolidation %.0f/%.0f; ", ascent_bad, ascent_runs, cons_bad, cons_runs) +
                fmt("largest relative drops %.2g, %.2g, %.2g", alg_worst, ascent_worst, cons_worst)};
}

Verdict determinism() {
    auto cfg = ExperimentConfig::defaults();
    cfg.realizations = 8;
    cfg.v_list = {1, 5, 15};
    cfg.solver.tol_outer = 1e-4;
    cfg.solver.tol_fixed = 1e-6;
    cfg.jobs = 1;
    const auto serial = run_experiment(cfg);
    cfg.jobs = 8;
    const auto parallel = run_experiment(cfg);
    std::size_t differing = 0;
    for (std::size_t i = 0; i < std::min(serial.rows.size(), parallel.rows.size()); ++i) {
        if (!(serial.rows[i] == parallel.rows[i])) ++differing;
    }
    const bool same = serial == parallel;
    return {same, fmt("%.0f rows, %.0f differ between 1 and 8 workers", static_cast<double>(serial.rows.size()),
                      static_cast<double>(differing)) +
                      (serial.metadata == parallel.metadata ? ", metadata equal" : ", metadata differ")};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    std::size_t realizations = 200;
    std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
    std::string csv;
    std::vector<int> only;
    app.add_option("--realizations", realizations, "drops in the Monte Carlo sweep")->check(CLI::PositiveNumber);
    app.add_option("--jobs", jobs, "worker threads for the sweep")->check(CLI::PositiveNumber);
    app.add_option("--csv", csv, "write the sweep report here");
    app.add_option("--only", only, "run only these criteria")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    auto wanted = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };
    int failed = 0;
    auto report = [&](int id, const char* name, const std::function<Verdict()>& fn) {
        if (!wanted(id)) return;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %2d %s: %s [%.1f s]\n", v.passed ? "PASS" : "FAIL", id, name, v.detail.c_str(), secs);
        std::fflush(stdout);
        if (!v.passed) ++failed;
    };

    if (wanted(1) || wanted(2) || wanted(3) || wanted(4)) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto sweep = run_sweep(realizations, jobs);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::size_t flagged = 0;
        for (const auto& r : sweep.report.rows) flagged += r.flagged;
        std::printf("sweep: %zu drops, %zu rows, %zu row-drops with a capped solver, %.0f s on %zu workers\n",
                    realizations, sweep.report.rows.size(), flagged, secs, jobs);
        if (!csv.empty()) write_csv(sweep.report, csv);
        report(1, "interference-coordination gain", [&] { return ic_gain(sweep); });
        report(2, "joint-decoding gain", [&] { return comp_gain(sweep); });
        report(3, "joint decoding vs max SUD at V=1", [&] { return crossover(sweep); });
        report(4, "clustering comparison", [&] { return clustering(sweep); });
    }
    report(5, "Hungarian oracle", [] { return from_suite(oracle::hungarian_suite(100, 501)); });
    report(6, "minimax linkage oracle", [] { return from_suite(oracle::minimax_suite(50, 502)); });
    report(7, "waterfilling oracle", [] { return from_suite(oracle::waterfill_suite(100, 503)); });
    report(8, "allocation solver oracles", [] { return from_suite(oracle::ic_solver_suite(20, 504)); });
    report(9, "monotonicity", [] { return monotonicity(); });
    report(10, "numerical kernel", [] { return from_suite(oracle::kernel_suite(100, 510)); });
    report(11, "determinism", [] { return determinism(); });

    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
