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
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "vcell/hungarian.hpp"
#include "vcell/ic_alloc.hpp"
#include "vcell/oracles.hpp"

using namespace vcell;
using namespace vcell::ic;

namespace {

// Real channels with the given power gains, unit noise, widths and budgets unless set.
CellProblem make_cell(std::size_t U, std::size_t B, std::size_t K, const std::vector<double>& gains,
                      double budget = 1.0) {
    Tensor3<cplx> h(U, B, K);
    for (std::size_t i = 0; i < gains.size(); ++i) h.flat()[i] = std::sqrt(gains[i]);
    return CellProblem::from_channels(std::move(h), Grid2<double>(B, K, 1.0), std::vector<double>(K, 1.0),
                                      std::vector<double>(U, budget));
}

// Two users, two BSs, one band; user u hears BS u best, and the cross links
// are weak enough that both users transmit at the optimum.
CellProblem toy_cell() { return make_cell(2, 2, 1, {100.0, 10.0, 3.0, 60.0}); }

bool feasible(const CellProblem& cell, const PowerAllocation& p) {
    for (double x : p.p.flat()) {
        if (x < 0.0) return false;
    }
    for (std::size_t u = 0; u < cell.n_users(); ++u) {
        if (p.user_power(u) > cell.budget_mw[u] * (1.0 + 1e-9)) return false;
    }
    return true;
}

PowerAllocation random_power(std::mt19937_64& rng, const CellProblem& cell) {
    std::uniform_real_distribution<double> w(0.0, 1.0);
    auto p = PowerAllocation::zeros(cell);
    for (std::size_t u = 0; u < cell.n_users(); ++u) {
        double s = 0.0;
        for (std::size_t b = 0; b < cell.n_bss(); ++b) {
            for (std::size_t k = 0; k < cell.n_bands(); ++k) s += p.p(u, b, k) = w(rng);
        }
        const double scale = w(rng) * cell.budget_mw[u] / s;
        for (std::size_t b = 0; b < cell.n_bss(); ++b) {
            for (std::size_t k = 0; k < cell.n_bands(); ++k) p.p(u, b, k) *= scale;
        }
    }
    return p;
}

}  // namespace

TEST_CASE("stream SINR") {
    auto one = make_cell(1, 1, 1, {2.0});
    auto p = PowerAllocation::zeros(one);
    p.p(0, 0, 0) = 0.5;
    CHECK(sinr(one, p, 0, 0, 0) == doctest::Approx(1.0));
    p.p(0, 0, 0) = 0.0;
    CHECK(sinr(one, p, 0, 0, 0) == 0.0);

    // Receiver b's gain applies to every interfering stream, own streams to other BSs included.
    const auto cell = make_cell(2, 2, 1, {4.0, 1.0, 2.0, 3.0});
    auto q = PowerAllocation::zeros(cell);
    q.p(0, 0, 0) = 0.5;
    q.p(0, 1, 0) = 0.25;
    q.p(1, 0, 0) = 0.2;
    q.p(1, 1, 0) = 0.4;
    CHECK(sinr(cell, q, 0, 0, 0) == doctest::Approx(4.0 * 0.5 / (1.0 + 4.0 * 0.25 + 2.0 * 0.6)));
    CHECK(sinr(cell, q, 1, 1, 0) == doctest::Approx(3.0 * 0.4 / (1.0 + 3.0 * 0.2 + 1.0 * 0.75)));
}

TEST_CASE("SINR with the user's band power on one BS") {
    auto one = make_cell(1, 2, 1, {2.0, 5.0});
    auto p = PowerAllocation::zeros(one);
    p.p(0, 0, 0) = 0.3;
    p.p(0, 1, 0) = 0.2;
    CHECK(sinr_bar(one, p, 0, 1, 0) == doctest::Approx(5.0 * 0.5));
    CHECK(sinr_bar(one, PowerAllocation::zeros(one), 0, 0, 0) == 0.0);

    const auto cell = make_cell(2, 2, 1, {4.0, 1.0, 2.0, 3.0});
    auto q = PowerAllocation::zeros(cell);
    q.p(0, 0, 0) = 0.5;
    q.p(0, 1, 0) = 0.25;
    q.p(1, 0, 0) = 0.2;
    q.p(1, 1, 0) = 0.4;
    CHECK(sinr_bar(cell, q, 0, 0, 0) == doctest::Approx(4.0 * 0.75 / (1.0 + 2.0 * 0.6)));
    CHECK(sinr_bar(cell, q, 1, 0, 0) == doctest::Approx(2.0 * 0.6 / (1.0 + 4.0 * 0.75)));
}

TEST_CASE("high-SINR bound coefficients") {
    auto ab = alpha_beta(1.0);
    CHECK(ab.alpha == doctest::Approx(0.5));
    CHECK(ab.beta == doctest::Approx(1.0));
    CHECK(alpha_beta(1e12).alpha == doctest::Approx(1.0));
    ab = alpha_beta(0.0);
    CHECK(ab.alpha == 0.0);
    CHECK(ab.beta == 0.0);

    for (double z0 : {1e-3, 0.1, 1.0, 7.5, 1e3}) {
        const auto c = alpha_beta(z0);
        CHECK(c.alpha >= 0.0);
        CHECK(c.alpha <= 1.0);
        CHECK(c.alpha * std::log2(z0) + c.beta == doctest::Approx(std::log2(1.0 + z0)));
        for (double e = -6.0; e <= 6.0; e += 0.05) {
            const double z = std::pow(10.0, e);
            CHECK(c.alpha * std::log2(z) + c.beta <= std::log2(1.0 + z) + 1e-12);
        }
    }
}

TEST_CASE("rate of a single link") {
    const auto cell = make_cell(1, 1, 1, {3.0}, 2.0);
    auto g = ChannelAssignment::zeros(cell);
    auto p = PowerAllocation::zeros(cell);
    p.p(0, 0, 0) = 2.0;
    CHECK(cell_sum_rate(cell, g, p) == 0.0);
    g.gamma(0, 0, 0) = 1;
    CHECK(cell_sum_rate(cell, g, p) == doctest::Approx(std::log2(7.0)));
}

TEST_CASE("single-BS rate on a hand instance") {
    const auto cell = make_cell(2, 2, 1, {4.0, 1.0, 2.0, 3.0});
    auto g = ChannelAssignment::zeros(cell);
    g.gamma(0, 0, 0) = 1;
    g.gamma(1, 1, 0) = 1;
    auto p = PowerAllocation::zeros(cell);
    p.p(0, 0, 0) = 0.5;
    p.p(1, 1, 0) = 0.4;
    const double expect = std::log2(1.0 + 4.0 * 0.5 / (1.0 + 2.0 * 0.4)) + std::log2(1.0 + 3.0 * 0.4 / (1.0 + 1.0 * 0.5));
    CHECK(cell_sum_rate(cell, g, p) == doctest::Approx(expect));
    CHECK(oracle::ic_rate_direct(cell, g.gamma, p.p) == doctest::Approx(expect));
}

TEST_CASE("continuous solvers on one link use full power") {
    const auto cell = make_cell(1, 1, 1, {50.0}, 2.0);
    for (const auto& r : {continuous_allocate_dual(cell), continuous_allocate_fast(cell)}) {
        CHECK(r.power.p(0, 0, 0) == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(r.rate == doctest::Approx(std::log2(101.0)).epsilon(1e-6));
    }
}

TEST_CASE("continuous solvers on the two-link toy") {
    const auto cell = toy_cell();
    const auto dual = continuous_allocate_dual(cell);
    const auto fast = continuous_allocate_fast(cell);
    CHECK(feasible(cell, dual.power));
    CHECK(feasible(cell, fast.power));
    CHECK(dual.rate == doctest::Approx(fast.rate).epsilon(1e-4));
    const double opt = oracle::continuous_optimum_one_band(cell, 100);
    CHECK(fast.rate == doctest::Approx(opt).epsilon(1e-3));
    CHECK(dual.rate == doctest::Approx(opt).epsilon(1e-3));

    REQUIRE(fast.converged);
    const auto kkt = kkt_residuals(cell, fast.coeffs.alpha, fast.power, fast.lambda);
    CHECK(kkt.stationarity <= 1e-6);
    CHECK(kkt.slackness <= 1e-6);
    CHECK(kkt.feasibility <= 1e-9);
}

TEST_CASE("continuous solvers stay feasible on generated cells") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        netgen::ScenarioConfig sc;
        sc.n_bs = 3;
        sc.n_users = 4;
        sc.n_bands = 2;
        sc.seed = seed;
        const auto s = netgen::generate_scenario(sc);
        const std::vector<std::size_t> users{0, 1, 2, 3}, bss{0, 1, 2};
        const auto cell = CellProblem::from_scenario(s, users, bss);
        const auto dual = continuous_allocate_dual(cell);
        const auto fast = continuous_allocate_fast(cell);
        CHECK(feasible(cell, dual.power));
        CHECK(feasible(cell, fast.power));
        CHECK(fast.rate == doctest::Approx(continuous_sum_rate(cell, fast.power)));
    }
}

TEST_CASE("consolidation") {
    SUBCASE("single-BS powers are left alone") {
        const auto cell = toy_cell();
        auto p = PowerAllocation::zeros(cell);
        p.p(0, 0, 0) = 0.7;
        p.p(1, 1, 0) = 0.4;
        const auto [g, q] = consolidate(cell, p);
        CHECK(q.p == p.p);
        CHECK(g.gamma(0, 0, 0) == 1);
        CHECK(g.gamma(1, 1, 0) == 1);
    }
    SUBCASE("a split moves to the better BS") {
        const auto cell = make_cell(1, 2, 1, {1.0, 9.0});
        auto p = PowerAllocation::zeros(cell);
        p.p(0, 0, 0) = 0.5;
        p.p(0, 1, 0) = 0.5;
        const auto [g, q] = consolidate(cell, p);
        CHECK(q.p(0, 0, 0) == 0.0);
        CHECK(q.p(0, 1, 0) == doctest::Approx(1.0));
        CHECK(g.gamma(0, 1, 0) == 1);
        CHECK(g.single_bs_per_user_band());
    }
    SUBCASE("never lowers the single-BS objective") {
        std::mt19937_64 rng(21);
        for (int c = 0; c < 200; ++c) {
            const auto cell = oracle::random_cell(rng, 2, 2, 2);
            const auto p = random_power(rng, cell);
            // Pre-consolidation assignment: each (u, k) counts its best stream.
            auto before = ChannelAssignment::zeros(cell);
            for (std::size_t u = 0; u < 2; ++u) {
                for (std::size_t k = 0; k < 2; ++k) {
                    const std::size_t b = sinr(cell, p, u, 1, k) > sinr(cell, p, u, 0, k) ? 1 : 0;
                    before.gamma(u, b, k) = 1;
                }
            }
            const auto [g, q] = consolidate(cell, p);
            CHECK(feasible(cell, q));
            CHECK(cell_sum_rate(cell, g, q) >= cell_sum_rate(cell, before, p) * (1.0 - 1e-12));
            CHECK(continuous_sum_rate(cell, q) >= continuous_sum_rate(cell, p) * (1.0 - 1e-12));
        }
    }
}

TEST_CASE("user-centric channel allocation") {
    auto single = make_cell(3, 1, 2, {1, 2, 3, 4, 5, 6});
    auto p = PowerAllocation::zeros(single);
    for (auto& x : p.p.flat()) x = 0.1;
    auto g = channel_alloc_uc(single, p);
    for (auto x : g.gamma.flat()) CHECK(x == 1);

    const auto cell = toy_cell();
    auto q = PowerAllocation::zeros(cell);
    for (auto& x : q.p.flat()) x = 0.25;
    g = channel_alloc_uc(cell, q);
    CHECK(g.gamma(0, 0, 0) == 1);
    CHECK(g.gamma(1, 1, 0) == 1);

    std::mt19937_64 rng(2);
    for (int c = 0; c < 20; ++c) {
        const auto rc = oracle::random_cell(rng, 3, 3, 2);
        const auto gr = channel_alloc_uc(rc, random_power(rng, rc));
        for (std::size_t u = 0; u < 3; ++u) {
            for (std::size_t k = 0; k < 2; ++k) {
                int n = 0;
                for (std::size_t b = 0; b < 3; ++b) n += gr.gamma(u, b, k);
                CHECK(n == 1);
            }
        }
    }
}

TEST_CASE("BS-centric channel allocation") {
    auto single = make_cell(1, 3, 2, {1, 2, 3, 4, 5, 6});
    auto p = PowerAllocation::zeros(single);
    for (auto& x : p.p.flat()) x = 0.1;
    auto g = channel_alloc_bsc(single, p);
    for (auto x : g.gamma.flat()) CHECK(x == 1);

    const auto cell = toy_cell();
    auto q = PowerAllocation::zeros(cell);
    for (auto& x : q.p.flat()) x = 0.25;
    g = channel_alloc_bsc(cell, q);
    CHECK(g.gamma(0, 0, 0) == 1);
    CHECK(g.gamma(1, 1, 0) == 1);
    CHECK(g.gamma(0, 1, 0) == 0);
    CHECK(g.gamma(1, 0, 0) == 0);

    std::mt19937_64 rng(3);
    for (int c = 0; c < 20; ++c) {
        const auto rc = oracle::random_cell(rng, 3, 2, 2);
        const auto gr = channel_alloc_bsc(rc, random_power(rng, rc));
        for (std::size_t b = 0; b < 2; ++b) {
            for (std::size_t k = 0; k < 2; ++k) {
                int n = 0;
                for (std::size_t u = 0; u < 3; ++u) n += gr.gamma(u, b, k);
                CHECK(n == 1);
            }
        }
    }
}

TEST_CASE("Hungarian matching") {
    Grid2<double> m(2, 2);
    m(0, 0) = 1;
    m(0, 1) = 2;
    m(1, 0) = 2;
    m(1, 1) = 1;
    auto r = hungarian_max(m);
    CHECK(r[0] == std::optional<std::size_t>{1});
    CHECK(r[1] == std::optional<std::size_t>{0});
    CHECK(oracle::matching_value(m, r) == 4.0);

    Grid2<double> d(4, 4, 1.0);
    for (std::size_t i = 0; i < 4; ++i) d(i, i) = 10.0;
    r = hungarian_max(d);
    for (std::size_t i = 0; i < 4; ++i) CHECK(r[i] == std::optional<std::size_t>{i});

    // Rectangular both ways.
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> w(0.0, 10.0);
    for (auto [rows, cols] : {std::pair<std::size_t, std::size_t>{2, 5}, {5, 2}, {3, 3}, {1, 4}}) {
        for (int c = 0; c < 20; ++c) {
            Grid2<double> x(rows, cols);
            for (auto& v : x.flat()) v = w(rng);
            const auto fast = hungarian_max(x);
            CHECK(oracle::matching_value(x, fast) == oracle::matching_value(x, oracle::best_matching_exhaustive(x)));
        }
    }
}

TEST_CASE("Hungarian matches permutations on 6x6") {
    const auto r = oracle::hungarian_suite(100, 17);
    INFO(r.detail);
    CHECK(r.passed);
}

TEST_CASE("max sum rate matching") {
    auto single = make_cell(1, 1, 2, {3.0, 0.0});
    auto p = PowerAllocation::zeros(single);
    p.p(0, 0, 0) = 0.5;
    p.p(0, 0, 1) = 0.5;
    auto g = channel_alloc_msrm(single, p);
    CHECK(g.gamma(0, 0, 0) == 1);
    CHECK(g.gamma(0, 0, 1) == 0);  // zero rate stays unmatched

    std::mt19937_64 rng(6);
    for (int c = 0; c < 30; ++c) {
        const std::size_t U = 2 + c % 5, B = 2 + (c / 5) % 5;
        const auto cell = oracle::random_cell(rng, U, B, 2);
        const auto q = random_power(rng, cell);
        g = channel_alloc_msrm(cell, q);
        for (std::size_t k = 0; k < 2; ++k) {
            Grid2<double> w(U, B);
            for (std::size_t u = 0; u < U; ++u) {
                for (std::size_t b = 0; b < B; ++b) w(u, b) = std::log2(1.0 + sinr_bar(cell, q, u, b, k));
            }
            double got = 0.0;
            for (std::size_t u = 0; u < U; ++u) {
                int row = 0;
                for (std::size_t b = 0; b < B; ++b) {
                    row += g.gamma(u, b, k);
                    if (g.gamma(u, b, k)) got += w(u, b);
                }
                CHECK(row <= 1);
            }
            for (std::size_t b = 0; b < B; ++b) {
                int col = 0;
                for (std::size_t u = 0; u < U; ++u) col += g.gamma(u, b, k);
                CHECK(col <= 1);
            }
            CHECK(got == doctest::Approx(oracle::matching_value(w, oracle::best_matching_exhaustive(w))));
        }
    }
}

TEST_CASE("power allocation for a fixed assignment") {
    const auto cell = toy_cell();
    auto g = ChannelAssignment::zeros(cell);
    auto r = power_allocate_given_gamma(cell, g, Alpha0Policy::gamma, nullptr);
    for (double x : r.power.p.flat()) CHECK(x == 0.0);
    CHECK(cell_sum_rate(cell, g, r.power) == 0.0);

    g.gamma(1, 1, 0) = 1;
    r = power_allocate_given_gamma(cell, g, Alpha0Policy::gamma, nullptr);
    CHECK(r.power.p(1, 1, 0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.power.p(0, 0, 0) == 0.0);

    g.gamma(0, 0, 0) = 1;
    r = power_allocate_given_gamma(cell, g, Alpha0Policy::gamma, nullptr);
    CHECK(feasible(cell, r.power));
    for (std::size_t u = 0; u < 2; ++u) {
        for (std::size_t b = 0; b < 2; ++b) {
            if (!g.gamma(u, b, 0)) CHECK(r.power.p(u, b, 0) == 0.0);
        }
    }
    REQUIRE(r.converged);
    const auto kkt = kkt_residuals(cell, r.coeffs.alpha, r.power, r.lambda);
    CHECK(kkt.stationarity <= 1e-6);
    CHECK(kkt.slackness <= 1e-6);
}

TEST_CASE("alternating optimization") {
    const auto link = make_cell(1, 1, 1, {20.0}, 3.0);
    for (auto scheme : {ChannelScheme::uc, ChannelScheme::bsc, ChannelScheme::msrm}) {
        const auto r = alternating_allocate(link, scheme);
        CHECK(r.gamma.gamma(0, 0, 0) == 1);
        CHECK(r.power.p(0, 0, 0) == doctest::Approx(3.0).epsilon(1e-6));
        CHECK(r.rate == doctest::Approx(std::log2(61.0)).epsilon(1e-6));
    }

    const auto cell = toy_cell();
    const double opt = oracle::ic_joint_optimum(cell, 200);
    for (auto scheme : {ChannelScheme::uc, ChannelScheme::bsc, ChannelScheme::msrm}) {
        const auto r = alternating_allocate(cell, scheme);
        CHECK(r.rate >= 0.99 * opt);
        CHECK(r.rate == doctest::Approx(cell_sum_rate(cell, r.gamma, r.power)));
        CHECK(r.rate == *std::max_element(r.rate_trace.begin(), r.rate_trace.end()));
    }
}

TEST_CASE("alternating optimization keeps assignments and budgets valid") {
    netgen::ScenarioConfig sc;
    sc.n_bs = 3;
    sc.n_users = 6;
    sc.n_bands = 3;
    const auto s = netgen::generate_scenario(sc);
    const std::vector<std::size_t> users{0, 1, 2, 3, 4, 5}, bss{0, 1, 2};
    const auto cell = CellProblem::from_scenario(s, users, bss);
    for (auto scheme : {ChannelScheme::uc, ChannelScheme::bsc, ChannelScheme::msrm}) {
        const auto r = alternating_allocate(cell, scheme);
        CHECK(feasible(cell, r.power));
        CHECK(r.gamma.single_bs_per_user_band());
        CHECK(r.rate == *std::max_element(r.rate_trace.begin(), r.rate_trace.end()));
    }
    const auto c = continuous_then_consolidate(cell);
    CHECK(feasible(cell, c.power));
    CHECK(c.gamma.single_bs_per_user_band());
}

TEST_CASE("alternating rate sequence is nondecreasing under the sinr_bar start") {
    SolverOptions opts;
    opts.alpha0 = Alpha0Policy::gamma_sinr_bar;
    opts.delta_rel = 1e-9;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        netgen::ScenarioConfig sc;
        sc.n_bs = 3;
        sc.n_users = 5;
        sc.n_bands = 2;
        sc.seed = seed;
        const auto s = netgen::generate_scenario(sc);
        const std::vector<std::size_t> users{0, 1, 2, 3, 4}, bss{0, 1, 2};
        const auto cell = CellProblem::from_scenario(s, users, bss);
        for (auto scheme : {ChannelScheme::uc, ChannelScheme::msrm}) {
            const auto r = alternating_allocate(cell, scheme, opts);
            for (std::size_t i = 1; i < r.rate_trace.size(); ++i) {
                CHECK(r.rate_trace[i] >= r.rate_trace[i - 1] * (1.0 - 1e-9));
            }
        }
    }
}

TEST_CASE("empty cell") {
    Tensor3<cplx> h(0, 2, 2);
    const auto cell = CellProblem::from_channels(h, Grid2<double>(2, 2, 1.0), {1.0, 1.0}, {});
    CHECK(continuous_allocate_fast(cell).rate == 0.0);
    CHECK(continuous_allocate_dual(cell).rate == 0.0);
    CHECK(alternating_allocate(cell, ChannelScheme::msrm).rate == 0.0);
}

TEST_CASE("solver options") {
    SolverOptions o;
    o.tol_outer = 1e-4;
    o.alpha0 = Alpha0Policy::gamma_sinr_bar;
    KeyValueFile kv;
    o.to_kv(kv);
    std::ostringstream out;
    kv.write(out);
    const auto back = SolverOptions::from_kv(KeyValueFile::parse_string(out.str()));
    CHECK(back.tol_outer == 1e-4);
    CHECK(back.alpha0 == Alpha0Policy::gamma_sinr_bar);

    o.m_max = 0;
    CHECK_THROWS(o.validate());
    o = {};
    o.tol_dual = 0.0;
    CHECK_THROWS(o.validate());
    CHECK_THROWS(parse_alpha0_policy("sometimes"));
}
