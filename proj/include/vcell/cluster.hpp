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
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vcell/netgen.hpp"
#include "vcell/tensor.hpp"

namespace vcell::cluster {

/// Result of merging two subtrees. Leaves are ids 0..n-1; the i-th merge
/// creates id n+i.
struct Merge {
    std::size_t left = 0;   // smaller child id
    std::size_t right = 0;  // larger child id
    double height = 0.0;    // minimax radius of the merged set
    std::size_t prototype = 0;  // leaf index of the minimax center

    friend bool operator==(const Merge&, const Merge&) = default;
};

struct Dendrogram {
    std::size_t leaves = 0;
    std::vector<Merge> merges;  // exactly leaves - 1 entries

    /// Members (leaf indices, ascending) of subtree `id`.
    std::vector<std::size_t> members(std::size_t id) const;
};

/// Partition of the BS set. Labels are 0..n_clusters-1, numbered in order
/// of each cluster's smallest member, so equal partitions compare equal.
struct BsPartition {
    std::vector<std::size_t> label;  // per BS
    std::size_t n_clusters = 0;

    /// Throws std::invalid_argument unless labels are in range and every cluster is nonempty.
    void validate() const;
    std::vector<std::vector<std::size_t>> clusters() const;

    /// Relabels by first occurrence; the input may use any label values.
    static BsPartition canonical(std::span<const std::size_t> raw_labels);

    friend bool operator==(const BsPartition&, const BsPartition&) = default;
};

enum class AffiliationRule { closest_bs, best_channel };

std::string to_string(AffiliationRule rule);
AffiliationRule parse_affiliation_rule(const std::string& name);

struct VirtualCellLayout {
    BsPartition bs_partition;
    std::vector<std::size_t> user_cell;  // per user, a label of bs_partition
    AffiliationRule rule = AffiliationRule::closest_bs;

    std::vector<std::size_t> users_of(std::size_t cell) const;
    std::vector<std::size_t> bss_of(std::size_t cell) const;
};

// --- minimax linkage -----------------------------------------------------------

/// max distance from `center` to the members of `points`.
double set_radius(const Point& center, std::span<const Point> points);

struct MinimaxCenter {
    std::size_t center = 0;  // index into the input set
    double radius = 0.0;
};

/// Member with the smallest set radius; ties go to the lowest index.
MinimaxCenter minimax_radius(std::span<const Point> points);

/// Agglomerative clustering under minimax linkage d(G,H) = r(G u H).
/// The argmin over pairs is taken lexicographically on (smaller id, larger id)
/// among exact ties.
Dendrogram minimax_dendrogram(std::span<const Point> points);

/// Partition after exactly n - n_clusters merges.
BsPartition cut(const Dendrogram& dend, std::size_t n_clusters);

/// One merge per line: `left right height prototype`.
void write_dendrogram(std::ostream& out, const Dendrogram& dend);

// --- baselines -----------------------------------------------------------------

struct KMeansOptions {
    std::size_t restarts = 10;
    std::size_t max_iterations = 300;
};

/// Lloyd's algorithm with k-means++ seeding; best inertia over restarts.
/// Points are rows of `data` (any dimension).
BsPartition kmeans_rows(const Grid2<double>& data, std::size_t k, std::uint64_t seed,
                        const KMeansOptions& opts = {});
BsPartition kmeans_cluster(std::span<const Point> points, std::size_t k, std::uint64_t seed,
                           const KMeansOptions& opts = {});

/// Normalized spectral clustering with Gaussian affinity exp(-d^2 / (2 sigma^2)).
BsPartition spectral_cluster(std::span<const Point> points, std::size_t k, double sigma, std::uint64_t seed);

// --- user affiliation -----------------------------------------------------------

VirtualCellLayout affiliate_users(const netgen::NetworkScenario& scenario, const BsPartition& partition,
                                  AffiliationRule rule);

}  // namespace vcell::cluster
