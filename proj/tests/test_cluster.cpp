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
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "vcell/cluster.hpp"
#include "vcell/oracles.hpp"

using namespace vcell;
using namespace vcell::cluster;

namespace {

std::vector<Point> line(std::initializer_list<double> xs) {
    std::vector<Point> out;
    for (double x : xs) out.push_back({x, 0.0});
    return out;
}

std::vector<Point> random_points(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> c(0.0, 2000.0);
    std::vector<Point> pts(n);
    for (auto& p : pts) p = {c(rng), c(rng)};
    return pts;
}

// Hand-built scenario with unit channels scaled per (user, bs).
netgen::NetworkScenario toy_scenario(std::vector<Point> bs, std::vector<Point> users, const Grid2<double>& energy) {
    netgen::NetworkScenario s;
    s.bs_pos = std::move(bs);
    s.user_pos = std::move(users);
    s.h = Tensor3<cplx>(s.user_pos.size(), s.bs_pos.size(), 1);
    for (std::size_t u = 0; u < s.user_pos.size(); ++u) {
        for (std::size_t b = 0; b < s.bs_pos.size(); ++b) s.h(u, b, 0) = std::sqrt(energy(u, b));
    }
    s.noise_mw = Grid2<double>(s.bs_pos.size(), 1, 1.0);
    s.band_width_hz = {1.0};
    s.max_power_mw.assign(s.user_pos.size(), 1.0);
    return s;
}

bool is_proper(const BsPartition& p, std::size_t n) {
    if (p.label.size() != n) return false;
    std::set<std::size_t> seen(p.label.begin(), p.label.end());
    return seen.size() == p.n_clusters && *seen.rbegin() == p.n_clusters - 1;
}

}  // namespace

TEST_CASE("set radius") {
    CHECK(set_radius({0, 0}, std::vector<Point>{{0, 0}}) == 0.0);
    const auto pts = line({0, 1, 10});
    CHECK(set_radius(pts[0], pts) == 10.0);
    CHECK(set_radius(pts[1], pts) == 9.0);
    CHECK_THROWS_AS(set_radius({0, 0}, std::vector<Point>{}), std::domain_error);
}

TEST_CASE("minimax radius") {
    auto r = minimax_radius(std::vector<Point>{{0, 0}});
    CHECK(r.center == 0);
    CHECK(r.radius == 0.0);

    r = minimax_radius(line({0, 1, 10}));
    CHECK(r.center == 1);
    CHECK(r.radius == 9.0);

    r = minimax_radius(line({0, 1}));
    CHECK(r.center == 0);
    CHECK(r.radius == 1.0);
    CHECK_THROWS_AS(minimax_radius(std::vector<Point>{}), std::domain_error);
}

TEST_CASE("dendrogram on three points") {
    const auto d = minimax_dendrogram(line({0, 1, 10}));
    REQUIRE(d.merges.size() == 2);
    CHECK(d.merges[0] == Merge{0, 1, 1.0, 0});
    CHECK(d.merges[1] == Merge{2, 3, 9.0, 1});
    CHECK(d.members(4) == std::vector<std::size_t>{0, 1, 2});

    CHECK(minimax_dendrogram(line({5})).merges.empty());

    CHECK(cut(d, 3) == BsPartition{{0, 1, 2}, 3});
    CHECK(cut(d, 1) == BsPartition{{0, 0, 0}, 1});
    CHECK(cut(d, 2) == BsPartition{{0, 0, 1}, 2});
    CHECK_THROWS(cut(d, 0));
    CHECK_THROWS(cut(d, 4));
}

TEST_CASE("dendrogram text export") {
    std::ostringstream out;
    write_dendrogram(out, minimax_dendrogram(line({0, 1, 10})));
    std::istringstream in(out.str());
    std::size_t l, r, p;
    double h;
    in >> l >> r >> h >> p;
    CHECK(l == 0);
    CHECK(r == 1);
    CHECK(h == 1.0);
    CHECK(p == 0);
}

TEST_CASE("dendrogram matches exhaustive linkage and has no inversions") {
    std::mt19937_64 rng(3);
    for (std::size_t n = 1; n <= 12; ++n) {
        const auto pts = random_points(rng, n);
        const auto d = minimax_dendrogram(pts);
        const auto ref = oracle::minimax_dendrogram_exhaustive(pts);
        CHECK(d.merges == ref.merges);
        for (std::size_t i = 1; i < d.merges.size(); ++i) CHECK(d.merges[i].height >= d.merges[i - 1].height);
        for (const auto& m : d.merges) {
            // The prototype is a member attaining the merged set's minimax radius.
            const auto members = d.members(n + static_cast<std::size_t>(&m - d.merges.data()));
            CHECK(std::find(members.begin(), members.end(), m.prototype) != members.end());
            std::vector<Point> sub;
            for (auto i : members) sub.push_back(pts[i]);
            CHECK(set_radius(pts[m.prototype], sub) == doctest::Approx(m.height));
        }
    }
}

TEST_CASE("cuts are nested proper clusterings") {
    std::mt19937_64 rng(5);
    const auto pts = random_points(rng, 15);
    const auto d = minimax_dendrogram(pts);
    for (std::size_t v = 1; v <= 15; ++v) {
        const auto p = cut(d, v);
        CHECK(is_proper(p, 15));
        if (v == 1) continue;
        // Going from v to v-1 clusters merges exactly two and keeps the rest.
        auto fine = p.clusters(), coarse = cut(d, v - 1).clusters();
        std::set<std::vector<std::size_t>> a(fine.begin(), fine.end()), b(coarse.begin(), coarse.end());
        std::vector<std::vector<std::size_t>> only_fine, only_coarse;
        std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(only_fine));
        std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(only_coarse));
        REQUIRE(only_fine.size() == 2);
        REQUIRE(only_coarse.size() == 1);
        auto merged = only_fine[0];
        merged.insert(merged.end(), only_fine[1].begin(), only_fine[1].end());
        std::sort(merged.begin(), merged.end());
        CHECK(merged == only_coarse[0]);
    }
}

TEST_CASE("k-means") {
    const std::vector<Point> groups{{0, 0}, {1, 0}, {0, 1}, {100, 100}, {101, 100}, {100, 101}};
    CHECK(kmeans_cluster(groups, 2, 7) == BsPartition{{0, 0, 0, 1, 1, 1}, 2});
    CHECK(kmeans_cluster(groups, 6, 7) == BsPartition{{0, 1, 2, 3, 4, 5}, 6});

    std::mt19937_64 rng(8);
    const auto pts = random_points(rng, 15);
    for (std::size_t v = 1; v <= 15; ++v) {
        const auto p = kmeans_cluster(pts, v, 11);
        CHECK(is_proper(p, 15));
        CHECK(p == kmeans_cluster(pts, v, 11));
    }
    CHECK_THROWS(kmeans_cluster(pts, 0, 1));
    CHECK_THROWS(kmeans_cluster(pts, 16, 1));
}

TEST_CASE("spectral clustering") {
    const std::vector<Point> pairs{{0, 0}, {1, 0}, {1000, 1000}, {1001, 1000}};
    CHECK(spectral_cluster(pairs, 2, 10.0, 3) == BsPartition{{0, 0, 1, 1}, 2});
    CHECK(spectral_cluster(pairs, 4, 10.0, 3) == BsPartition{{0, 1, 2, 3}, 4});

    std::mt19937_64 rng(9);
    const auto pts = random_points(rng, 15);
    for (double sigma : {std::sqrt(2000.0), 2000.0}) {
        for (std::size_t v = 1; v <= 15; ++v) {
            const auto p = spectral_cluster(pts, v, sigma, 4);
            CHECK(is_proper(p, 15));
            CHECK(p == spectral_cluster(pts, v, sigma, 4));
        }
    }
    CHECK_THROWS(spectral_cluster(pts, 2, 0.0, 1));
    CHECK_THROWS(spectral_cluster(pts, 16, 1.0, 1));
}

TEST_CASE("user affiliation") {
    Grid2<double> energy(2, 2, 1.0);
    energy(1, 1) = 5.0;  // user 1 hears BS 1 best though BS 0 is closer
    const auto s = toy_scenario({{0, 0}, {100, 0}}, {{1, 0}, {50, 0}}, energy);
    const BsPartition split{{0, 1}, 2}, one{{0, 0}, 1};

    auto lay = affiliate_users(s, split, AffiliationRule::closest_bs);
    CHECK(lay.user_cell == std::vector<std::size_t>{0, 0});  // user 1 is equidistant: lower index
    lay = affiliate_users(s, split, AffiliationRule::best_channel);
    CHECK(lay.user_cell == std::vector<std::size_t>{0, 1});  // user 0 ties on energy: lower index
    CHECK(lay.users_of(1) == std::vector<std::size_t>{1});
    CHECK(lay.bss_of(1) == std::vector<std::size_t>{1});

    for (auto rule : {AffiliationRule::closest_bs, AffiliationRule::best_channel}) {
        lay = affiliate_users(s, one, rule);
        CHECK(lay.user_cell == std::vector<std::size_t>{0, 0});
    }
}

TEST_CASE("affiliation on a generated drop is a proper clustering") {
    netgen::ScenarioConfig cfg;
    const auto s = netgen::generate_scenario(cfg);
    const auto d = minimax_dendrogram(s.bs_pos);
    for (std::size_t v : {1, 4, 15}) {
        const auto lay = affiliate_users(s, cut(d, v), AffiliationRule::best_channel);
        std::size_t total = 0;
        for (std::size_t c = 0; c < v; ++c) total += lay.users_of(c).size();
        CHECK(total == s.n_users());
        if (v == 15) {
            // One BS per cell: each user's cell holds its strongest BS.
            for (std::size_t u = 0; u < s.n_users(); ++u) {
                std::size_t best = 0;
                double e_best = -1.0;
                for (std::size_t b = 0; b < s.n_bs(); ++b) {
                    double e = 0.0;
                    for (std::size_t k = 0; k < s.n_bands(); ++k) e += std::norm(s.h(u, b, k));
                    if (e > e_best) {
                        e_best = e;
                        best = b;
                    }
                }
                CHECK(lay.bss_of(lay.user_cell[u]) == std::vector<std::size_t>{best});
            }
        }
    }
}

TEST_CASE("affiliation rule names") {
    CHECK(to_string(AffiliationRule::best_channel) == "best-channel");
    CHECK(parse_affiliation_rule("closest-bs") == AffiliationRule::closest_bs);
    CHECK_THROWS_AS(parse_affiliation_rule("nearest"), std::invalid_argument);
}
