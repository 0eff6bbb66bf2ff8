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
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "vcell/cluster.hpp"
#include "vcell/comp_alloc.hpp"
#include "vcell/ic_alloc.hpp"
#include "vcell/linalg.hpp"
#include "vcell/tensor.hpp"

/// Slow reference implementations. Everything here is written from the
/// definitions, without reusing the production solvers, and is only meant
/// for small instances.
namespace vcell::oracle {

// --- assignment ------------------------------------------------------------------

using Matching = std::vector<std::optional<std::size_t>>;  // row -> column

/// Sum of matched weights, rows in ascending order.
double matching_value(const Grid2<double>& w, const Matching& m);

/// Maximum over all permutations of the zero-padded square matrix.
Matching best_matching_exhaustive(const Grid2<double>& w);

// --- minimax linkage -----------------------------------------------------------------

/// Agglomeration that re-evaluates r(G u H) from the member points for every
/// pair in every round.
cluster::Dendrogram minimax_dendrogram_exhaustive(std::span<const Point> points);

// --- dense linear algebra -----------------------------------------------------------

/// Laplace expansion along the first row.
cplx det_cofactor(const linalg::CMatrix& m);
/// Gauss-Jordan elimination with partial pivoting.
linalg::CMatrix inverse_gauss_jordan(const linalg::CMatrix& m);

// --- rate formulas ------------------------------------------------------------------

/// Single-BS objective: gamma selects the decoding BS, the user's band power
/// is the sum of its P over BSs.
double ic_rate_direct(const ic::CellProblem& cell, const Tensor3<std::uint8_t>& gamma, const Tensor3<double>& p);
/// Continuous objective: every (u, b, k) stream decoded separately.
double continuous_rate_direct(const ic::CellProblem& cell, const Tensor3<double>& p);
/// Log-det capacity with determinants from cofactor expansion.
double comp_rate_direct(const comp::CompProblem& prob, const Grid2<double>& p);

// --- grid searches --------------------------------------------------------------------

struct GridOptimum {
    double value = 0.0;
    std::vector<double> point;
};

/// max sum_k W_k log2(1 + g_k p_k) over the budget simplex with sum p = budget,
/// grid step `step` (absolute).
GridOptimum waterfill_grid(std::span<const double> gains, std::span<const double> widths, double budget,
                           double step);

/// Single-BS joint problem (BS choice and power per user and band) for cells
/// with at most 2 users and 2 bands. Every BS-choice pattern is grid searched
/// with `divisions` steps per budget and then refined by a shrinking pattern search.
double ic_joint_optimum(const ic::CellProblem& cell, int divisions);

/// Continuous problem on one band: every user splits its budget over the BSs.
/// Same grid-then-refine strategy.
double continuous_optimum_one_band(const ic::CellProblem& cell, int divisions);

/// Joint decoding with 2 bands: each user's budget binds, so a user is one
/// scalar. Grid with `divisions` steps per user.
GridOptimum comp_two_band_grid(const comp::CompProblem& prob, int divisions);

// --- random instances ---------------------------------------------------------------

/// Cell with gains log-uniform over [gain_db_lo, gain_db_hi] relative to unit
/// noise, unit budgets and unit band widths.
ic::CellProblem random_cell(std::mt19937_64& rng, std::size_t users, std::size_t bss, std::size_t bands,
                            double gain_db_lo = 0.0, double gain_db_hi = 30.0);

/// Random Hermitian positive definite matrix, condition number moderate.
linalg::CMatrix random_hpd(std::mt19937_64& rng, std::size_t n);
linalg::CVector random_cvector(std::mt19937_64& rng, std::size_t n);

// --- suites ----------------------------------------------------------------------------

struct SuiteResult {
    std::string name;
    bool passed = false;
    std::size_t cases = 0;
    std::string detail;  // worst deviation observed
};

/// Hungarian vs exhaustive permutations on random 6x6 matrices.
SuiteResult hungarian_suite(std::size_t cases, std::uint64_t seed);
/// Minimax dendrogram vs exhaustive re-evaluation on random sets of up to 12 points.
SuiteResult minimax_suite(std::size_t cases, std::uint64_t seed);
/// Waterfilling vs grid search on 3 bands, and the equal-marginal condition.
SuiteResult waterfill_suite(std::size_t cases, std::uint64_t seed);
/// Continuous (both variants, consolidated) and alternating (UC, MSRM) vs the
/// joint grid optimum on 2-user, 2-BS, 1-2 band cells drawn from the network
/// model; dual vs fast agreement on the continuous rate.
SuiteResult ic_solver_suite(std::size_t cases, std::uint64_t seed);
/// Log-det, effective gain and the capacity gradient against direct formulas.
SuiteResult kernel_suite(std::size_t cases, std::uint64_t seed);

}  // namespace vcell::oracle
