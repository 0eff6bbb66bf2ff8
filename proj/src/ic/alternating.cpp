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
#include <stdexcept>

#include "engine.hpp"
#include "vcell/hungarian.hpp"
#include "vcell/ic_alloc.hpp"

namespace vcell::ic {

namespace {

// sinr_bar for every triple, from one pass over the field.
Tensor3<double> sinr_bar_all(const CellProblem& cell, const PowerAllocation& power) {
    const std::size_t U = cell.n_users(), B = cell.n_bss(), K = cell.n_bands();
    const auto f = detail::compute_field(cell, power.p);
    Tensor3<double> z(U, B, K, 0.0);
    for (std::size_t u = 0; u < U; ++u) {
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t k = 0; k < K; ++k) {
                z(u, b, k) = cell.gain(u, b, k) * f.band_power(u, k) /
                             (cell.noise_mw(b, k) + detail::other_user_interference(cell, f, u, b, k));
            }
        }
    }
    return z;
}

void check_shape(const CellProblem& cell, const Tensor3<double>& p) {
    if (p.dim0() != cell.n_users() || p.dim1() != cell.n_bss() || p.dim2() != cell.n_bands()) {
        throw std::invalid_argument("power tensor does not match the cell");
    }
}

}  // namespace

ChannelAssignment channel_alloc_uc(const CellProblem& cell, const PowerAllocation& power) {
    check_shape(cell, power.p);
    const auto z = sinr_bar_all(cell, power);
    auto gamma = ChannelAssignment::zeros(cell);
    for (std::size_t u = 0; u < cell.n_users(); ++u) {
        for (std::size_t k = 0; k < cell.n_bands(); ++k) {
            std::size_t best = 0;
            for (std::size_t b = 1; b < cell.n_bss(); ++b) {
                if (z(u, b, k) > z(u, best, k)) best = b;
            }
            gamma.gamma(u, best, k) = 1;
        }
    }
    return gamma;
}

ChannelAssignment channel_alloc_bsc(const CellProblem& cell, const PowerAllocation& power) {
    check_shape(cell, power.p);
    const auto z = sinr_bar_all(cell, power);
    auto gamma = ChannelAssignment::zeros(cell);
    if (cell.n_users() == 0) return gamma;
    for (std::size_t b = 0; b < cell.n_bss(); ++b) {
        for (std::size_t k = 0; k < cell.n_bands(); ++k) {
            std::size_t best = 0;
            for (std::size_t u = 1; u < cell.n_users(); ++u) {
                if (z(u, b, k) > z(best, b, k)) best = u;
            }
            gamma.gamma(best, b, k) = 1;
        }
    }
    return gamma;
}

ChannelAssignment channel_alloc_msrm(const CellProblem& cell, const PowerAllocation& power) {
    check_shape(cell, power.p);
    const auto z = sinr_bar_all(cell, power);
    auto gamma = ChannelAssignment::zeros(cell);
    const std::size_t U = cell.n_users(), B = cell.n_bss();
    for (std::size_t k = 0; k < cell.n_bands(); ++k) {
        Grid2<double> weights(U, B);
        for (std::size_t u = 0; u < U; ++u) {
            for (std::size_t b = 0; b < B; ++b) weights(u, b) = cell.band_width_hz[k] * std::log2(1.0 + z(u, b, k));
        }
        const auto match = hungarian_max(weights);
        for (std::size_t u = 0; u < U; ++u) {
            // A zero-weight pair carries no rate; leaving it unmatched is equally optimal.
            if (match[u] && weights(u, *match[u]) > 0.0) gamma.gamma(u, *match[u], k) = 1;
        }
    }
    return gamma;
}

ContinuousResult power_allocate_given_gamma(const CellProblem& cell, const ChannelAssignment& gamma,
                                            Alpha0Policy policy, const PowerAllocation* previous,
                                            const SolverOptions& opts) {
    const std::size_t U = cell.n_users(), B = cell.n_bss(), K = cell.n_bands();
    if (gamma.gamma.dim0() != U || gamma.gamma.dim1() != B || gamma.gamma.dim2() != K) {
        throw std::invalid_argument("channel assignment does not match the cell");
    }
    if (policy == Alpha0Policy::gamma_sinr_bar && previous == nullptr) {
        throw std::invalid_argument("gamma-sinr-bar policy needs the previous power allocation");
    }

    std::vector<std::uint8_t> active(U * B * K, 0);
    ApproxCoeffs start{Tensor3<double>(U, B, K, 0.0), Tensor3<double>(U, B, K, 0.0)};
    Tensor3<double> z;
    if (policy == Alpha0Policy::gamma_sinr_bar) {
        check_shape(cell, previous->p);
        z = sinr_bar_all(cell, *previous);
    }
    std::vector<std::size_t> count(U, 0);
    for (std::size_t i = 0; i < active.size(); ++i) {
        if (!gamma.gamma.flat()[i]) continue;
        active[i] = 1;
        if (policy == Alpha0Policy::gamma) {
            start.alpha.flat()[i] = 1.0;
        } else {
            const auto ab = alpha_beta(z.flat()[i]);
            start.alpha.flat()[i] = ab.alpha;
            start.beta.flat()[i] = ab.beta;
        }
    }

    Tensor3<double> p0(U, B, K, 0.0);
    for (std::size_t u = 0; u < U; ++u) {
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t k = 0; k < K; ++k) count[u] += gamma.gamma(u, b, k) ? 1 : 0;
        }
    }
    for (std::size_t u = 0; u < U; ++u) {
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t k = 0; k < K; ++k) {
                if (!gamma.gamma(u, b, k)) continue;
                if (policy == Alpha0Policy::gamma_sinr_bar) {
                    // The point the coefficients are tight at: the user's band power sent to b.
                    p0(u, b, k) = previous->band_power(u, k);
                } else {
                    p0(u, b, k) = cell.budget_mw[u] / static_cast<double>(count[u]);
                }
            }
        }
    }
    if (policy == Alpha0Policy::gamma_sinr_bar) {
        // Several selected BSs on one band would each receive the full band power.
        for (std::size_t u = 0; u < U; ++u) {
            for (std::size_t k = 0; k < K; ++k) {
                std::size_t n = 0;
                for (std::size_t b = 0; b < B; ++b) n += gamma.gamma(u, b, k) ? 1 : 0;
                if (n > 1) {
                    for (std::size_t b = 0; b < B; ++b) p0(u, b, k) /= static_cast<double>(n);
                }
            }
        }
    }
    return detail::run_sca(cell, active, std::move(start), std::move(p0), detail::Variant::fast, opts);
}

AllocationResult alternating_allocate(const CellProblem& cell, ChannelScheme scheme, const SolverOptions& opts) {
    cell.validate();
    opts.validate();
    const std::size_t U = cell.n_users(), B = cell.n_bss(), K = cell.n_bands();
    AllocationResult best{ChannelAssignment::zeros(cell), PowerAllocation::zeros(cell), 0.0, true, 0, {}};
    if (U == 0) return best;

    auto power = PowerAllocation::zeros(cell);
    for (std::size_t u = 0; u < U; ++u) {
        const double share = cell.budget_mw[u] / static_cast<double>(B * K);
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t k = 0; k < K; ++k) power.p(u, b, k) = share;
        }
    }

    double last = 0.0;
    bool converged = false;
    std::vector<double> trace;
    for (int n = 1; n <= opts.n_alg2_max; ++n) {
        ChannelAssignment gamma;
        switch (scheme) {
            case ChannelScheme::uc: gamma = channel_alloc_uc(cell, power); break;
            case ChannelScheme::bsc: gamma = channel_alloc_bsc(cell, power); break;
            case ChannelScheme::msrm: gamma = channel_alloc_msrm(cell, power); break;
        }
        const auto solved = power_allocate_given_gamma(cell, gamma, opts.alpha0, &power, opts);
        auto [final_gamma, final_power] = consolidate(cell, solved.power);
        const double rate = cell_sum_rate(cell, final_gamma, final_power);
        trace.push_back(rate);
        if (rate > best.rate || n == 1) {
            best.gamma = final_gamma;
            best.power = final_power;
            best.rate = rate;
        }
        power = std::move(final_power);
        const double delta = rate - last;
        last = rate;
        if (delta <= opts.delta_rel * rate) {
            converged = true;
            break;
        }
    }
    best.converged = converged;
    best.iterations = static_cast<int>(trace.size());
    best.rate_trace = std::move(trace);
    return best;
}

AllocationResult continuous_then_consolidate(const CellProblem& cell, const SolverOptions& opts) {
    const auto solved = continuous_allocate_fast(cell, opts);
    auto [gamma, power] = consolidate(cell, solved.power);
    AllocationResult out;
    out.rate = cell_sum_rate(cell, gamma, power);
    out.gamma = std::move(gamma);
    out.power = std::move(power);
    out.converged = solved.converged;
    out.iterations = solved.outer_iterations;
    out.rate_trace = solved.rate_trace;
    return out;
}

}  // namespace vcell::ic
