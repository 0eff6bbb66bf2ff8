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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vcell/kvfile.hpp"
#include "vcell/netgen.hpp"
#include "vcell/tensor.hpp"

/// Channel and power allocation inside one virtual cell when every BS
/// decodes its own users separately (interference coordination).
namespace vcell::ic {

/// One virtual cell, with all tensors in local indices (user, bs, band).
/// Interference from outside the cell is not part of the problem.
struct CellProblem {
    std::vector<std::size_t> users;  // global user ids
    std::vector<std::size_t> bss;    // global BS ids
    Tensor3<cplx> h;
    Tensor3<double> gain;  // |h|^2, cached
    Grid2<double> noise_mw;  // (bs, band)
    std::vector<double> band_width_hz;
    std::vector<double> budget_mw;  // per local user

    std::size_t n_users() const { return users.size(); }
    std::size_t n_bss() const { return bss.size(); }
    std::size_t n_bands() const { return band_width_hz.size(); }

    void validate() const;

    static CellProblem from_scenario(const netgen::NetworkScenario& s, std::span<const std::size_t> users,
                                     std::span<const std::size_t> bss);
    /// Standalone cell; global ids are 0..n-1.
    static CellProblem from_channels(Tensor3<cplx> h, Grid2<double> noise_mw, std::vector<double> band_width_hz,
                                     std::vector<double> budget_mw);
};

/// Powers P_{u,b,k} in mW: the part of user u's band-k signal meant for BS b.
struct PowerAllocation {
    Tensor3<double> p;

    static PowerAllocation zeros(const CellProblem& cell);
    /// Sum over BSs: the power user u radiates on band k.
    double band_power(std::size_t u, std::size_t k) const;
    double user_power(std::size_t u) const;
};

/// gamma_{u,b,k} in {0,1}.
struct ChannelAssignment {
    Tensor3<std::uint8_t> gamma;

    static ChannelAssignment zeros(const CellProblem& cell);
    /// True if every (user, band) selects at most one BS.
    bool single_bs_per_user_band() const;
};

struct ApproxCoeffs {
    Tensor3<double> alpha;
    Tensor3<double> beta;
};

enum class Alpha0Policy {
    gamma,           // alpha^(0) = gamma
    gamma_sinr_bar,  // alpha^(0) = gamma * alpha(sinr_bar(P^(n-1)))
};

struct SolverOptions {
    int m_max = 50;    // high-SINR refresh iterations
    int n_max = 2000;  // dual ascent iterations (dual variant)
    int s_max = 500;   // fixed-point iterations
    double tol_outer = 1e-6;  // relative rate change between refreshes
    double tol_dual = 1e-6;   // relative budget violation
    double tol_fixed = 1e-8;  // relative power change
    double delta_rel = 1e-3;  // alternating loop stops once the gain is below delta_rel * rate
    int n_alg2_max = 30;
    double p_floor_rel = 1e-12;  // smallest power, relative to the user's budget
    int anderson_depth = 5;      // residual history of the accelerated fixed point; 0 = plain iteration
    Alpha0Policy alpha0 = Alpha0Policy::gamma;

    void validate() const;
    static SolverOptions from_kv(const KeyValueFile& kv);
    void to_kv(KeyValueFile& kv) const;
};

std::string to_string(Alpha0Policy policy);
Alpha0Policy parse_alpha0_policy(const std::string& name);

// --- rate and SINR evaluators ------------------------------------------------------

/// Stream SINR: every other stream on band k, including user u's own
/// streams meant for other BSs, interferes at receiver b.
double sinr(const CellProblem& cell, const PowerAllocation& power, std::size_t u, std::size_t b, std::size_t k);

/// SINR at BS b if user u sent all its band-k power there; interference
/// from user u itself is excluded.
double sinr_bar(const CellProblem& cell, const PowerAllocation& power, std::size_t u, std::size_t b,
                std::size_t k);

/// sum over all streams of W_k log2(1 + sinr).
double continuous_sum_rate(const CellProblem& cell, const PowerAllocation& power);

/// sum over gamma = 1 of W_k log2(1 + |h|^2 P_{u,b,k} / (noise + J)), J the
/// power received at b from all other users.
double cell_sum_rate(const CellProblem& cell, const ChannelAssignment& gamma, const PowerAllocation& power);

// --- high-SINR approximation ---------------------------------------------------------

struct AlphaBeta {
    double alpha = 0.0;
    double beta = 0.0;
};

/// Coefficients of log2(1+z) >= alpha log2(z) + beta, tight at z = z0.
/// z0 = 0 maps to (0, 0).
AlphaBeta alpha_beta(double z0);

// --- continuous reformulation ------------------------------------------------------

struct ContinuousResult {
    PowerAllocation power;
    ApproxCoeffs coeffs;          // coefficients of the last approximated problem
    std::vector<double> lambda;   // per-user budget multipliers of that problem
    double rate = 0.0;            // continuous_sum_rate(power)
    bool converged = false;
    int outer_iterations = 0;
    std::vector<double> rate_trace;  // rate after each refresh
};

/// Refresh / dual gradient ascent / fixed point triple loop.
ContinuousResult continuous_allocate_dual(const CellProblem& cell, const SolverOptions& opts = {});

/// Refresh / fixed point with the multiplier solved per step by a
/// monotone root search so that each user's budget binds or is slack.
ContinuousResult continuous_allocate_fast(const CellProblem& cell, const SolverOptions& opts = {});

struct KktResiduals {
    double stationarity = 0.0;  // max relative gap between P and its fixed-point image
    double slackness = 0.0;     // max over users with lambda > 0 of |sum P - budget| / budget
    double feasibility = 0.0;   // max over users of (sum P - budget)^+ / budget
};

/// Residuals of the approximated problem defined by `alpha` at (power, lambda).
/// Triples with alpha = 0 are excluded.
KktResiduals kkt_residuals(const CellProblem& cell, const Tensor3<double>& alpha, const PowerAllocation& power,
                           std::span<const double> lambda, const SolverOptions& opts = {});

/// Moves each user's band power to the highest-SINR BS among those it
/// currently feeds. Never lowers continuous_sum_rate.
std::pair<ChannelAssignment, PowerAllocation> consolidate(const CellProblem& cell, const PowerAllocation& power);

// --- channel allocation --------------------------------------------------------------

/// User-centric: each (u, k) picks argmax_b sinr_bar.
ChannelAssignment channel_alloc_uc(const CellProblem& cell, const PowerAllocation& power);
/// BS-centric: each (b, k) picks argmax_u sinr_bar. A user may be picked by several BSs.
ChannelAssignment channel_alloc_bsc(const CellProblem& cell, const PowerAllocation& power);
/// Per band maximum-weight matching on W_k log2(1 + sinr_bar).
ChannelAssignment channel_alloc_msrm(const CellProblem& cell, const PowerAllocation& power);

// --- alternating optimization ---------------------------------------------------------

/// Solves the approximated power problem restricted to gamma = 1. `previous`
/// feeds the gamma_sinr_bar policy and may be empty for the gamma policy.
ContinuousResult power_allocate_given_gamma(const CellProblem& cell, const ChannelAssignment& gamma,
                                            Alpha0Policy policy, const PowerAllocation* previous,
                                            const SolverOptions& opts = {});

enum class ChannelScheme { uc, bsc, msrm };

std::string to_string(ChannelScheme scheme);

struct AllocationResult {
    ChannelAssignment gamma;
    PowerAllocation power;
    double rate = 0.0;  // cell_sum_rate(gamma, power)
    bool converged = false;
    int iterations = 0;
    std::vector<double> rate_trace;  // R(P^(n), gamma^(n)) for n = 1, 2, ...
};

AllocationResult alternating_allocate(const CellProblem& cell, ChannelScheme scheme, const SolverOptions& opts = {});

/// Continuous solution (fast variant) followed by consolidation.
AllocationResult continuous_then_consolidate(const CellProblem& cell, const SolverOptions& opts = {});

}  // namespace vcell::ic
