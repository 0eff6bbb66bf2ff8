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

#include <span>
#include <vector>

#include "vcell/ic_alloc.hpp"
#include "vcell/linalg.hpp"
#include "vcell/netgen.hpp"

/// Joint decoding across all BSs of a virtual cell: the cell is a
/// multiple-access channel with one receive antenna per BS.
namespace vcell::comp {

using linalg::CMatrix;
using linalg::CVector;

struct CompProblem {
    std::vector<std::size_t> users;
    std::vector<std::size_t> bss;
    std::vector<CVector> h;          // h[u * n_bands + k], length n_bss
    std::vector<CMatrix> noise_cov;  // per band, n_bss x n_bss
    std::vector<double> band_width_hz;
    std::vector<double> budget_mw;

    std::size_t n_users() const { return users.size(); }
    std::size_t n_bss() const { return bss.size(); }
    std::size_t n_bands() const { return band_width_hz.size(); }
    const CVector& h_vec(std::size_t u, std::size_t k) const { return h[u * n_bands() + k]; }

    void validate() const;

    /// Diagonal noise covariance from the per-BS noise powers.
    static CompProblem from_scenario(const netgen::NetworkScenario& s, std::span<const std::size_t> users,
                                     std::span<const std::size_t> bss);
    static CompProblem from_cell(const ic::CellProblem& cell);
};

/// p(u, k) in mW.
struct CompPower {
    Grid2<double> p;

    static CompPower zeros(const CompProblem& prob);
    double user_power(std::size_t u) const;
};

struct CompOptions {
    double tol = 1e-8;  // relative objective gain per sweep
    int max_sweeps = 200;

    void validate() const;
};

/// sum_k W_k [log2 det(N_k + sum_u p_{u,k} h h^H) - log2 det(N_k)].
double comp_sum_capacity(const CompProblem& prob, const CompPower& power);

struct Waterfill {
    std::vector<double> p;
    double lambda = 0.0;
    bool degenerate = false;  // every gain was zero
};

/// argmax sum_k W_k log2(1 + g_k p_k) over sum p_k <= budget, p >= 0.
/// Solution p_k = (W_k / lambda - 1 / g_k)^+ with the budget binding.
Waterfill waterfill(std::span<const double> gains, std::span<const double> band_width_hz, double budget);

/// Best response of user i with all other users' powers fixed.
Waterfill user_waterfill(const CompProblem& prob, std::size_t i, const CompPower& power);

struct CompResult {
    CompPower power;
    double rate = 0.0;
    bool converged = false;
    bool degenerate = false;  // some user had an all-zero channel
    int sweeps = 0;
    std::vector<double> objective_trace;  // objective after every user update
};

/// Cyclic coordinate ascent over users, each step a waterfilling best response.
CompResult comp_allocate(const CompProblem& prob, const CompOptions& opts = {});

}  // namespace vcell::comp
