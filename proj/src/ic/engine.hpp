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
#include <vector>

#include "vcell/ic_alloc.hpp"

namespace vcell::ic::detail {

/// Per-band aggregates of a power tensor.
struct Field {
    Grid2<double> band_power;  // (user, band): sum over BSs
    Grid2<double> received;    // (bs, band): sum_u |h_{u,b,k}|^2 band_power(u, k)
};

Field compute_field(const CellProblem& cell, const Tensor3<double>& p);

/// Interference seen by stream (u, b, k) under the stream SINR.
inline double stream_interference(const CellProblem& cell, const Field& f, const Tensor3<double>& p,
                                  std::size_t u, std::size_t b, std::size_t k) {
    const double j = f.received(b, k) - cell.gain(u, b, k) * p(u, b, k);
    return j > 0.0 ? j : 0.0;
}

/// Interference at b from every user other than u.
inline double other_user_interference(const CellProblem& cell, const Field& f, std::size_t u, std::size_t b,
                                      std::size_t k) {
    const double j = f.received(b, k) - cell.gain(u, b, k) * f.band_power(u, k);
    return j > 0.0 ? j : 0.0;
}

/// Gradient weights T_{u,b,k}: derivative of the interference part of
/// sum alpha log(SINR) with respect to P_{u,b,k}, sign flipped.
/// Streams with alpha = 0 contribute nothing.
Tensor3<double> interference_price(const CellProblem& cell, const Tensor3<double>& alpha, const Tensor3<double>& p);

enum class Variant { dual, fast };

/// Successive approximation on the triples flagged in `active`, starting from
/// coefficients `start` and powers `p0` (zero outside `active`).
ContinuousResult run_sca(const CellProblem& cell, const std::vector<std::uint8_t>& active, ApproxCoeffs start,
                         Tensor3<double> p0, Variant variant, const SolverOptions& opts);

/// Root of sum_i max(floor, a_i / (lambda ln2 + d_i)) = budget, or 0 when the
/// unconstrained powers already fit.
double solve_multiplier(const std::vector<double>& a, const std::vector<double>& d, double floor, double budget);

}  // namespace vcell::ic::detail
