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
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "vcell/hungarian.hpp"
#include "vcell/netgen.hpp"
#include "vcell/oracles.hpp"

namespace vcell::oracle {

namespace {

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

double rel_gap(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace

SuiteResult hungarian_suite(std::size_t cases, std::uint64_t seed) {
    SuiteResult res{"hungarian vs permutations", true, cases, {}};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> w(0.0, 10.0);
    std::size_t mismatches = 0;
    for (std::size_t c = 0; c < cases; ++c) {
        Grid2<double> m(6, 6);
        for (auto& x : m.flat()) x = w(rng);
        const auto fast = ic::hungarian_max(m);
        const auto ref = best_matching_exhaustive(m);
        std::vector<bool> used(6, false);
        bool valid = fast.size() == 6;
        for (const auto& col : fast) {
            if (!col || *col >= 6 || used[*col]) {
                valid = false;
                break;
            }
            used[*col] = true;
        }
        if (!valid || matching_value(m, fast) != matching_value(m, ref)) ++mismatches;
    }
    res.passed = mismatches == 0;
    res.detail = fmt("%.0f of %.0f matrices disagree", static_cast<double>(mismatches), static_cast<double>(cases));
    return res;
}

SuiteResult minimax_suite(std::size_t cases, std::uint64_t seed) {
    SuiteResult res{"minimax linkage vs exhaustive re-evaluation", true, cases, {}};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(0.0, 1000.0);
    std::uniform_int_distribution<std::size_t> size(1, 12);
    std::size_t mismatches = 0, inversions = 0;
    for (std::size_t c = 0; c < cases; ++c) {
        std::vector<Point> pts(size(rng));
        for (auto& p : pts) p = {coord(rng), coord(rng)};
        const auto fast = cluster::minimax_dendrogram(pts);
        const auto ref = minimax_dendrogram_exhaustive(pts);
        if (fast.leaves != ref.leaves || fast.merges != ref.merges) ++mismatches;
        for (std::size_t i = 1; i < fast.merges.size(); ++i) {
            if (fast.merges[i].height < fast.merges[i - 1].height) {
                ++inversions;
                break;
            }
        }
    }
    res.passed = mismatches == 0 && inversions == 0;
    res.detail = fmt("%.0f mismatching dendrograms, %.0f with height inversions", static_cast<double>(mismatches),
                     static_cast<double>(inversions));
    return res;
}

SuiteResult waterfill_suite(std::size_t cases, std::uint64_t seed) {
    SuiteResult res{"waterfilling vs grid search and equal marginals", true, cases, {}};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> db(-10.0, 20.0), width(0.5, 2.0);
    double worst_obj = 0.0, worst_kkt = 0.0, worst_budget = 0.0;
    for (std::size_t c = 0; c < cases; ++c) {
        std::vector<double> g(3), W(3);
        for (std::size_t k = 0; k < 3; ++k) {
            g[k] = std::pow(10.0, db(rng) / 10.0);
            W[k] = width(rng);
        }
        const double budget = 1.0;
        const auto wf = comp::waterfill(g, W, budget);
        double obj = 0.0, used = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            obj += W[k] * std::log2(1.0 + g[k] * wf.p[k]);
            used += wf.p[k];
        }
        const auto grid = waterfill_grid(g, W, budget, 1e-3 * budget);
        worst_obj = std::max(worst_obj, rel_gap(obj, grid.value));
        worst_budget = std::max(worst_budget, std::abs(used - budget) / budget);

        // Active bands share one marginal W g / (1 + g p); inactive ones sit below it.
        double lam = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            if (wf.p[k] > 0.0) lam = std::max(lam, W[k] * g[k] / (1.0 + g[k] * wf.p[k]));
        }
        for (std::size_t k = 0; k < 3; ++k) {
            const double marginal = W[k] * g[k] / (1.0 + g[k] * wf.p[k]);
            const double dev = wf.p[k] > 0.0 ? std::abs(marginal - lam) / lam : std::max(0.0, marginal - lam) / lam;
            worst_kkt = std::max(worst_kkt, dev);
        }
    }
    res.passed = worst_obj <= 1e-3 && worst_kkt <= 1e-6 && worst_budget <= 1e-9;
    res.detail = fmt("objective gap %.3g, marginal spread %.3g, budget error %.3g", worst_obj, worst_kkt, worst_budget);
    return res;
}

SuiteResult ic_solver_suite(std::size_t cases, std::uint64_t seed) {
    SuiteResult res{"interference-coordination solvers vs joint grid optimum", true, cases, {}};
    double worst_ratio = std::numeric_limits<double>::infinity(), worst_agree = 0.0;
    std::string worst_name = "-";
    std::size_t below = 0;
    for (std::size_t c = 0; c < cases; ++c) {
        // Two users and two BSs dropped by the network model, so gains follow its path loss and fading.
        netgen::ScenarioConfig sc;
        sc.n_bs = 2;
        sc.n_users = 2;
        sc.n_bands = 1 + c % 2;
        sc.seed = netgen::substream_seed(seed, c);
        const auto scenario = netgen::generate_scenario(sc);
        const std::vector<std::size_t> ids{0, 1};
        const auto cell = ic::CellProblem::from_scenario(scenario, ids, ids);
        const double opt = ic_joint_optimum(cell, sc.n_bands == 1 ? 200 : 30);

        const auto dual = ic::continuous_allocate_dual(cell);
        const auto fast = ic::continuous_allocate_fast(cell);
        auto single_bs = [&](const ic::ContinuousResult& r) {
            const auto [gamma, power] = ic::consolidate(cell, r.power);
            return ic::cell_sum_rate(cell, gamma, power);
        };
        const auto uc = ic::alternating_allocate(cell, ic::ChannelScheme::uc);
        const auto msrm = ic::alternating_allocate(cell, ic::ChannelScheme::msrm);
        const std::pair<const char*, double> rates[] = {
            {"dual", single_bs(dual)}, {"fast", single_bs(fast)}, {"UC", uc.rate}, {"MSRM", msrm.rate}};
        bool ok = true;
        for (const auto& [name, r] : rates) {
            if (r < 0.99 * opt) ok = false;
            if (r / opt < worst_ratio) {
                worst_ratio = r / opt;
                worst_name = name;
            }
        }
        if (!ok) ++below;
        worst_agree = std::max(worst_agree, rel_gap(dual.rate, fast.rate));
    }
    res.passed = worst_ratio >= 0.99 && worst_agree <= 1e-3;
    res.detail = fmt("%.0f cells below 0.99, worst rate / optimum %.4f, dual-fast gap %.3g",
                     static_cast<double>(below), worst_ratio, worst_agree) +
                 " (worst solver " + worst_name + ")";
    return res;
}

SuiteResult kernel_suite(std::size_t cases, std::uint64_t seed) {
    SuiteResult res{"log-det, effective gain and capacity gradient", true, cases, {}};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> dim(1, 5);
    std::uniform_real_distribution<double> unit(0.2, 1.0);
    double worst_det = 0.0, worst_gain = 0.0, worst_grad = 0.0;
    for (std::size_t c = 0; c < cases; ++c) {
        const std::size_t n = dim(rng);
        const auto m = random_hpd(rng, n);
        const auto h = random_cvector(rng, n);
        const double ld = linalg::hermitian_logdet(m);
        const double ld_ref = std::log2(det_cofactor(m).real());
        worst_det = std::max(worst_det, std::abs(ld - ld_ref) / std::max(1.0, std::abs(ld_ref)));
        const double eg = linalg::effective_gain(h, m);
        const double eg_ref = (h.adjoint() * inverse_gauss_jordan(m) * h)(0, 0).real();
        worst_gain = std::max(worst_gain, rel_gap(eg, eg_ref));

        // Joint-decoding objective: d/dp_{u,k} = W_k g / (ln2 (1 + g p)), g seen against the others.
        const std::size_t users = 2 + c % 2, bss = 1 + c % 3, bands = 2;
        comp::CompProblem prob;
        for (std::size_t u = 0; u < users; ++u) prob.users.push_back(u);
        for (std::size_t b = 0; b < bss; ++b) prob.bss.push_back(b);
        for (std::size_t i = 0; i < users * bands; ++i) prob.h.push_back(random_cvector(rng, bss));
        for (std::size_t k = 0; k < bands; ++k) prob.noise_cov.push_back(random_hpd(rng, bss));
        prob.band_width_hz.assign(bands, 1.0);
        prob.budget_mw.assign(users, 2.0);
        comp::CompPower p{Grid2<double>(users, bands)};
        for (auto& x : p.p.flat()) x = unit(rng);
        for (std::size_t u = 0; u < users; ++u) {
            for (std::size_t k = 0; k < bands; ++k) {
                linalg::CMatrix sigma = prob.noise_cov[k];
                for (std::size_t j = 0; j < users; ++j) {
                    if (j != u) sigma += p.p(j, k) * prob.h_vec(j, k) * prob.h_vec(j, k).adjoint();
                }
                const double g = linalg::effective_gain(prob.h_vec(u, k), sigma);
                const double analytic = prob.band_width_hz[k] * g / (std::log(2.0) * (1.0 + g * p.p(u, k)));
                const double step = 1e-4 * std::min(p.p(u, k), 1.0 / g);
                auto plus = p, minus = p;
                plus.p(u, k) += step;
                minus.p(u, k) -= step;
                const double fd =
                    (comp::comp_sum_capacity(prob, plus) - comp::comp_sum_capacity(prob, minus)) / (2.0 * step);
                worst_grad = std::max(worst_grad, rel_gap(analytic, fd));
            }
        }
    }
    res.passed = worst_det <= 1e-9 && worst_gain <= 1e-9 && worst_grad <= 1e-5;
    res.detail = fmt("log-det %.3g, effective gain %.3g, gradient %.3g", worst_det, worst_gain, worst_grad);
    return res;
}

}  // namespace vcell::oracle
