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
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "vcell/cluster.hpp"

namespace vcell::cluster {

void BsPartition::validate() const {
    if (n_clusters == 0 || n_clusters > label.size()) {
        throw std::invalid_argument("BsPartition: cluster count out of range");
    }
    std::vector<bool> seen(n_clusters, false);
    for (auto l : label) {
        if (l >= n_clusters) throw std::invalid_argument("BsPartition: label out of range");
        seen[l] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
        throw std::invalid_argument("BsPartition: empty cluster");
    }
}

std::vector<std::vector<std::size_t>> BsPartition::clusters() const {
    std::vector<std::vector<std::size_t>> out(n_clusters);
    for (std::size_t i = 0; i < label.size(); ++i) out[label[i]].push_back(i);
    return out;
}

BsPartition BsPartition::canonical(std::span<const std::size_t> raw_labels) {
    BsPartition p;
    p.label.resize(raw_labels.size());
    std::vector<std::pair<std::size_t, std::size_t>> remap;  // raw -> canonical
    for (std::size_t i = 0; i < raw_labels.size(); ++i) {
        auto it = std::find_if(remap.begin(), remap.end(), [&](const auto& e) { return e.first == raw_labels[i]; });
        if (it == remap.end()) {
            remap.emplace_back(raw_labels[i], remap.size());
            p.label[i] = remap.size() - 1;
        } else {
            p.label[i] = it->second;
        }
    }
    p.n_clusters = remap.size();
    return p;
}

std::vector<std::size_t> Dendrogram::members(std::size_t id) const {
    if (id < leaves) return {id};
    const auto merge_index = id - leaves;
    if (merge_index >= merges.size()) throw std::out_of_range("Dendrogram::members: unknown id");
    auto out = members(merges[merge_index].left);
    auto right = members(merges[merge_index].right);
    out.insert(out.end(), right.begin(), right.end());
    std::sort(out.begin(), out.end());
    return out;
}

double set_radius(const Point& center, std::span<const Point> points) {
    if (points.empty()) throw std::domain_error("set_radius: empty point set");
    double r = 0.0;
    for (const auto& p : points) r = std::max(r, distance(center, p));
    return r;
}

MinimaxCenter minimax_radius(std::span<const Point> points) {
    if (points.empty()) throw std::domain_error("minimax_radius: empty point set");
    MinimaxCenter best{0, std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double r = set_radius(points[i], points);
        if (r < best.radius) best = {i, r};
    }
    return best;
}

namespace {

struct Linkage {
    double height;
    std::size_t prototype;  // leaf index
};

Linkage link(std::span<const Point> all, const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    std::vector<std::size_t> idx;
    idx.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(idx));
    std::vector<Point> pts;
    pts.reserve(idx.size());
    for (auto i : idx) pts.push_back(all[i]);
    const auto c = minimax_radius(pts);
    return {c.radius, idx[c.center]};
}

}  // namespace

Dendrogram minimax_dendrogram(std::span<const Point> points) {
    const std::size_t n = points.size();
    Dendrogram dend;
    dend.leaves = n;
    if (n <= 1) return dend;

    const std::size_t ids = 2 * n - 1;
    std::vector<std::vector<std::size_t>> members(ids);
    std::vector<std::size_t> active(n);
    for (std::size_t i = 0; i < n; ++i) {
        members[i] = {i};
        active[i] = i;
    }
    // Linkage cache, indexed by (smaller id, larger id).
    Grid2<Linkage> cache(ids, ids, Linkage{0.0, 0});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) cache(i, j) = link(points, members[i], members[j]);
    }

    for (std::size_t step = 0; step + 1 < n; ++step) {
        // `active` stays sorted, so the first strict minimum is the lexicographic one.
        std::size_t bi = 0, bj = 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < active.size(); ++a) {
            for (std::size_t b = a + 1; b < active.size(); ++b) {
                const double d = cache(active[a], active[b]).height;
                if (d < best) {
                    best = d;
                    bi = a;
                    bj = b;
                }
            }
        }
        const std::size_t left = active[bi], right = active[bj];
        const std::size_t id = n + step;
        dend.merges.push_back({left, right, cache(left, right).height, cache(left, right).prototype});

        std::merge(members[left].begin(), members[left].end(), members[right].begin(), members[right].end(),
                   std::back_inserter(members[id]));
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(bi));
        for (auto g : active) cache(g, id) = link(points, members[g], members[id]);
        active.push_back(id);
    }
    return dend;
}

BsPartition cut(const Dendrogram& dend, std::size_t n_clusters) {
    const std::size_t n = dend.leaves;
    if (n_clusters < 1 || n_clusters > n) {
        throw std::out_of_range("cut: cluster count must be in [1, " + std::to_string(n) + "]");
    }
    // Union-find over subtree ids.
    std::vector<std::size_t> parent(2 * n, 0);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t i = 0; i < n - n_clusters; ++i) {
        const auto& m = dend.merges[i];
        parent[find(m.left)] = n + i;
        parent[find(m.right)] = n + i;
    }
    std::vector<std::size_t> raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = find(i);
    return BsPartition::canonical(raw);
}

void write_dendrogram(std::ostream& out, const Dendrogram& dend) {
    const auto old = out.precision(17);
    for (const auto& m : dend.merges) {
        out << m.left << ' ' << m.right << ' ' << m.height << ' ' << m.prototype << '\n';
    }
    out.precision(old);
}

}  // namespace vcell::cluster
