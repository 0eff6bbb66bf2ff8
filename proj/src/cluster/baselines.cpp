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
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "vcell/cluster.hpp"

namespace vcell::cluster {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

struct KMeansRun {
    std::vector<std::size_t> assignment;
    double inertia = std::numeric_limits<double>::infinity();
};

Grid2<double> seed_plus_plus(const Grid2<double>& data, std::size_t k, std::mt19937_64& rng) {
    const std::size_t n = data.rows(), dim = data.cols();
    Grid2<double> centers(k, dim);
    std::vector<bool> chosen(n, false);
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());

    std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t pick = first;
        if (c > 0) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) total += d2[i];
            if (total > 0.0) {
                double r = std::uniform_real_distribution<double>(0.0, total)(rng);
                pick = n;
                for (std::size_t i = 0; i < n; ++i) {
                    if (d2[i] <= 0.0) continue;
                    pick = i;
                    if (r < d2[i]) break;
                    r -= d2[i];
                }
            } else {
                // All remaining points coincide with a center.
                pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
            }
        }
        chosen[pick] = true;
        std::copy(data.row(pick).begin(), data.row(pick).end(), centers.row(c).begin());
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(data.row(i), centers.row(c)));
    }
    return centers;
}

KMeansRun lloyd(const Grid2<double>& data, Grid2<double> centers, std::size_t max_iterations) {
    const std::size_t n = data.rows(), k = centers.rows(), dim = data.cols();
    KMeansRun run;
    run.assignment.assign(n, k);  // k = unassigned

    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double d = sq_dist(data.row(i), centers.row(c));
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (run.assignment[i] != best) {
                run.assignment[i] = best;
                changed = true;
            }
        }

        // Empty-cluster repair: hand the farthest point of a multi-member cluster to the empty one.
        std::vector<std::size_t> count(k, 0);
        for (auto a : run.assignment) ++count[a];
        for (std::size_t c = 0; c < k; ++c) {
            if (count[c] > 0) continue;
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                const auto a = run.assignment[i];
                if (count[a] < 2) continue;
                const double d = sq_dist(data.row(i), centers.row(a));
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            --count[run.assignment[far]];
            run.assignment[far] = c;
            count[c] = 1;
            std::copy(data.row(far).begin(), data.row(far).end(), centers.row(c).begin());
            changed = true;
        }

        Grid2<double> sums(k, dim, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto row = sums.row(run.assignment[i]);
            for (std::size_t d = 0; d < dim; ++d) row[d] += data(i, d);
        }
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t d = 0; d < dim; ++d) centers(c, d) = sums(c, d) / static_cast<double>(count[c]);
        }
        if (!changed) break;
    }

    run.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) run.inertia += sq_dist(data.row(i), centers.row(run.assignment[i]));
    return run;
}

}  // namespace

BsPartition kmeans_rows(const Grid2<double>& data, std::size_t k, std::uint64_t seed, const KMeansOptions& opts) {
    const std::size_t n = data.rows();
    if (k < 1 || k > n) throw std::out_of_range("kmeans: cluster count must be in [1, n]");
    KMeansRun best;
    const std::size_t restarts = std::max<std::size_t>(opts.restarts, 1);
    for (std::size_t r = 0; r < restarts; ++r) {
        std::mt19937_64 rng(netgen::substream_seed(seed, r));
        auto run = lloyd(data, seed_plus_plus(data, k, rng), opts.max_iterations);
        if (run.inertia < best.inertia) best = std::move(run);
    }
    return BsPartition::canonical(best.assignment);
}

BsPartition kmeans_cluster(std::span<const Point> points, std::size_t k, std::uint64_t seed,
                           const KMeansOptions& opts) {
    Grid2<double> data(points.size(), 2);
    for (std::size_t i = 0; i < points.size(); ++i) {
        data(i, 0) = points[i].x;
        data(i, 1) = points[i].y;
    }
    return kmeans_rows(data, k, seed, opts);
}

BsPartition spectral_cluster(std::span<const Point> points, std::size_t k, double sigma, std::uint64_t seed) {
    const std::size_t n = points.size();
    if (k < 1 || k > n) throw std::out_of_range("spectral: cluster count must be in [1, n]");
    if (!(sigma > 0.0)) throw std::invalid_argument("spectral: sigma must be > 0");

    const auto N = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd affinity = Eigen::MatrixXd::Zero(N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
        for (Eigen::Index j = i + 1; j < N; ++j) {
            const double d = distance(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
            affinity(i, j) = affinity(j, i) = std::exp(-d * d / (2.0 * sigma * sigma));
        }
    }
    const Eigen::VectorXd degree = affinity.rowwise().sum();
    Eigen::MatrixXd normalized(N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
        for (Eigen::Index j = 0; j < N; ++j) {
            const double denom = std::sqrt(degree(i) * degree(j));
            normalized(i, j) = denom > 0.0 ? affinity(i, j) / denom : 0.0;
        }
        // A point whose affinities all underflow is its own connected component.
        if (degree(i) == 0.0) normalized(i, i) = 1.0;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normalized);
    if (eig.info() != Eigen::Success) throw std::runtime_error("spectral: eigen decomposition failed");
    // Eigenvalues ascend; the top k eigenvectors are the trailing columns.
    Eigen::MatrixXd top = eig.eigenvectors().rightCols(static_cast<Eigen::Index>(k));
    for (Eigen::Index c = 0; c < top.cols(); ++c) {
        Eigen::Index arg = 0;
        for (Eigen::Index r = 1; r < N; ++r) {
            if (std::abs(top(r, c)) > std::abs(top(arg, c))) arg = r;
        }
        if (top(arg, c) < 0.0) top.col(c) *= -1.0;
    }

    Grid2<double> rows(n, k);
    for (Eigen::Index r = 0; r < N; ++r) {
        const double norm = top.row(r).norm();
        for (Eigen::Index c = 0; c < top.cols(); ++c) {
            rows(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = norm > 0.0 ? top(r, c) / norm : 0.0;
        }
    }
    return kmeans_rows(rows, k, seed);
}

std::string to_string(AffiliationRule rule) {
    return rule == AffiliationRule::closest_bs ? "closest-bs" : "best-channel";
}

AffiliationRule parse_affiliation_rule(const std::string& name) {
    if (name == "closest-bs") return AffiliationRule::closest_bs;
    if (name == "best-channel") return AffiliationRule::best_channel;
    throw std::invalid_argument("unknown affiliation rule '" + name + "' (expected closest-bs or best-channel)");
}

std::vector<std::size_t> VirtualCellLayout::users_of(std::size_t cell) const {
    std::vector<std::size_t> out;
    for (std::size_t u = 0; u < user_cell.size(); ++u) {
        if (user_cell[u] == cell) out.push_back(u);
    }
    return out;
}

std::vector<std::size_t> VirtualCellLayout::bss_of(std::size_t cell) const {
    std::vector<std::size_t> out;
    for (std::size_t b = 0; b < bs_partition.label.size(); ++b) {
        if (bs_partition.label[b] == cell) out.push_back(b);
    }
    return out;
}

VirtualCellLayout affiliate_users(const netgen::NetworkScenario& scenario, const BsPartition& partition,
                                  AffiliationRule rule) {
    if (partition.label.size() != scenario.n_bs()) {
        throw std::invalid_argument("affiliate_users: partition does not cover the scenario's BSs");
    }
    partition.validate();
    VirtualCellLayout layout{partition, std::vector<std::size_t>(scenario.n_users()), rule};
    for (std::size_t u = 0; u < scenario.n_users(); ++u) {
        std::size_t best = 0;
        double best_score = 0.0;
        for (std::size_t b = 0; b < scenario.n_bs(); ++b) {
            double score = 0.0;
            if (rule == AffiliationRule::closest_bs) {
                score = -distance(scenario.user_pos[u], scenario.bs_pos[b]);
            } else {
                for (std::size_t k = 0; k < scenario.n_bands(); ++k) score += std::norm(scenario.h(u, b, k));
            }
            if (b == 0 || score > best_score) {
                best = b;
                best_score = score;
            }
        }
        layout.user_cell[u] = partition.label[best];
    }
    return layout;
}

}  // namespace vcell::cluster
