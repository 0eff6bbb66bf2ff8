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
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "engine.hpp"
#include "vcell/ic_alloc.hpp"

namespace vcell::ic {

void CellProblem::validate() const {
    const std::size_t U = n_users(), B = n_bss(), K = n_bands();
    if (B == 0) throw std::invalid_argument("cell: BS list is empty");
    if (K == 0) throw std::invalid_argument("cell: no bands");
    if (h.dim0() != U || h.dim1() != B || h.dim2() != K) throw std::invalid_argument("cell: channel shape mismatch");
    if (gain.dim0() != U || gain.dim1() != B || gain.dim2() != K) {
        throw std::invalid_argument("cell: gain shape mismatch");
    }
    if (noise_mw.rows() != B || noise_mw.cols() != K) throw std::invalid_argument("cell: noise shape mismatch");
    if (budget_mw.size() != U) throw std::invalid_argument("cell: one budget per user required");
    for (double n : noise_mw.flat()) {
        if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("cell: noise must be positive");
    }
    for (double w : band_width_hz) {
        if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("cell: band width must be positive");
    }
    for (double p : budget_mw) {
        if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("cell: budgets must be positive");
    }
    for (const auto& v : h.flat()) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw std::invalid_argument("cell: non-finite channel");
    }
}

CellProblem CellProblem::from_scenario(const netgen::NetworkScenario& s, std::span<const std::size_t> users,
                                       std::span<const std::size_t> bss) {
    CellProblem c;
    c.users.assign(users.begin(), users.end());
    c.bss.assign(bss.begin(), bss.end());
    const std::size_t U = users.size(), B = bss.size(), K = s.n_bands();
    for (auto u : users) {
        if (u >= s.n_users()) throw std::out_of_range("cell: user id out of range");
    }
    for (auto b : bss) {
        if (b >= s.n_bs()) throw std::out_of_range("cell: BS id out of range");
    }
    c.h = Tensor3<cplx>(U, B, K);
    c.noise_mw = Grid2<double>(B, K);
    for (std::size_t i = 0; i < U; ++i) {
        for (std::size_t j = 0; j < B; ++j) {
            for (std::size_t k = 0; k < K; ++k) c.h(i, j, k) = s.h(users[i], bss[j], k);
        }
    }
    for (std::size_t j = 0; j < B; ++j) {
        for (std::size_t k = 0; k < K; ++k) c.noise_mw(j, k) = s.noise_mw(bss[j], k);
    }
    c.band_width_hz = s.band_width_hz;
    for (auto u : users) c.budget_mw.push_back(s.max_power_mw[u]);
    c.gain = Tensor3<double>(U, B, K);
    for (std::size_t i = 0; i < c.h.size(); ++i) c.gain.flat()[i] = std::norm(c.h.flat()[i]);
    c.validate();
    return c;
}

CellProblem CellProblem::from_channels(Tensor3<cplx> h, Grid2<double> noise_mw, std::vector<double> band_width_hz,
                                       std::vector<double> budget_mw) {
    CellProblem c;
    c.users.resize(h.dim0());
    c.bss.resize(h.dim1());
    std::iota(c.users.begin(), c.users.end(), std::size_t{0});
    std::iota(c.bss.begin(), c.bss.end(), std::size_t{0});
    c.gain = Tensor3<double>(h.dim0(), h.dim1(), h.dim2());
    for (std::size_t i = 0; i < h.size(); ++i) c.gain.flat()[i] = std::norm(h.flat()[i]);
    c.h = std::move(h);
    c.noise_mw = std::move(noise_mw);
    c.band_width_hz = std::move(band_width_hz);
    c.budget_mw = std::move(budget_mw);
    c.validate();
    return c;
}

PowerAllocation PowerAllocation::zeros(const CellProblem& cell) {
    return {Tensor3<double>(cell.n_users(), cell.n_bss(), cell.n_bands(), 0.0)};
}

double PowerAllocation::band_power(std::size_t u, std::size_t k) const {
    double s = 0.0;
    for (std::size_t b = 0; b < p.dim1(); ++b) s += p(u, b, k);
    return s;
}

double PowerAllocation::user_power(std::size_t u) const {
    double s = 0.0;
    for (std::size_t b = 0; b < p.dim1(); ++b) {
        for (std::size_t k = 0; k < p.dim2(); ++k) s += p(u, b, k);
    }
    return s;
}

ChannelAssignment ChannelAssignment::zeros(const CellProblem& cell) {
    return {Tensor3<std::uint8_t>(cell.n_users(), cell.n_bss(), cell.n_bands(), 0)};
}

bool ChannelAssignment::single_bs_per_user_band() const {
    for (std::size_t u = 0; u < gamma.dim0(); ++u) {
        for (std::size_t k = 0; k < gamma.dim2(); ++k) {
            int count = 0;
            for (std::size_t b = 0; b < gamma.dim1(); ++b) count += gamma(u, b, k) ? 1 : 0;
            if (count > 1) return false;
        }
    }
    return true;
}

void SolverOptions::validate() const {
    if (m_max < 1 || n_max < 1 || s_max < 1 || n_alg2_max < 1) {
        throw std::invalid_argument("solver options: iteration caps must be >= 1");
    }
    if (!(tol_outer > 0.0) || !(tol_dual > 0.0) || !(tol_fixed > 0.0) || !(delta_rel > 0.0)) {
        throw std::invalid_argument("solver options: tolerances must be > 0");
    }
    if (anderson_depth < 0) throw std::invalid_argument("solver options: anderson_depth must be >= 0");
    if (!(p_floor_rel > 0.0) || !(p_floor_rel < 1e-3)) {
        throw std::invalid_argument("solver options: p_floor_rel must be in (0, 1e-3)");
    }
}

SolverOptions SolverOptions::from_kv(const KeyValueFile& kv) {
    SolverOptions o;
    o.m_max = static_cast<int>(kv.get_int("m_max", o.m_max));
    o.n_max = static_cast<int>(kv.get_int("n_max", o.n_max));
    o.s_max = static_cast<int>(kv.get_int("s_max", o.s_max));
    o.tol_outer = kv.get_double("tol_outer", o.tol_outer);
    o.tol_dual = kv.get_double("tol_dual", o.tol_dual);
    o.tol_fixed = kv.get_double("tol_fixed", o.tol_fixed);
    o.delta_rel = kv.get_double("delta_rel", o.delta_rel);
    o.n_alg2_max = static_cast<int>(kv.get_int("n_alg2_max", o.n_alg2_max));
    o.p_floor_rel = kv.get_double("p_floor_rel", o.p_floor_rel);
    o.anderson_depth = static_cast<int>(kv.get_int("anderson_depth", o.anderson_depth));
    o.alpha0 = parse_alpha0_policy(kv.get_string("alpha0", to_string(o.alpha0)));
    o.validate();
    return o;
}

void SolverOptions::to_kv(KeyValueFile& kv) const {
    auto num = [](double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    kv.set("m_max", std::to_string(m_max));
    kv.set("n_max", std::to_string(n_max));
    kv.set("s_max", std::to_string(s_max));
    kv.set("tol_outer", num(tol_outer));
    kv.set("tol_dual", num(tol_dual));
    kv.set("tol_fixed", num(tol_fixed));
    kv.set("delta_rel", num(delta_rel));
    kv.set("n_alg2_max", std::to_string(n_alg2_max));
    kv.set("p_floor_rel", num(p_floor_rel));
    kv.set("anderson_depth", std::to_string(anderson_depth));
    kv.set("alpha0", to_string(alpha0));
}

std::string to_string(Alpha0Policy policy) {
    return policy == Alpha0Policy::gamma ? "gamma" : "gamma-sinr-bar";
}

Alpha0Policy parse_alpha0_policy(const std::string& name) {
    if (name == "gamma") return Alpha0Policy::gamma;
    if (name == "gamma-sinr-bar") return Alpha0Policy::gamma_sinr_bar;
    throw std::invalid_argument("unknown alpha0 policy '" + name + "' (expected gamma or gamma-sinr-bar)");
}

std::string to_string(ChannelScheme scheme) {
    switch (scheme) {
        case ChannelScheme::uc: return "UC";
        case ChannelScheme::bsc: return "BSC";
        case ChannelScheme::msrm: return "MSRM";
    }
    return "?";
}

namespace detail {

Field compute_field(const CellProblem& cell, const Tensor3<double>& p) {
    const std::size_t U = cell.n_users(), B = cell.n_bss(), K = cell.n_bands();
    Field f{Grid2<double>(U, K, 0.0), Grid2<double>(B, K, 0.0)};
    for (std::size_t u = 0; u < U; ++u) {
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t k = 0; k < K; ++k) f.band_power(u, k) += p(u, b, k);
        }
    }
    for (std::size_t u = 0; u < U; ++u) {
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t k = 0; k < K; ++k) f.received(b, k) += cell.gain(u, b, k) * f.band_power(u, k);
        }
    }
    return f;
}

}  // namespace detail

double sinr(const CellProblem& cell, const PowerAllocation& power, std::size_t u, std::size_t b, std::size_t k) {
    const auto& p = power.p;
    double interference = 0.0;
    for (std::size_t v = 0; v < cell.n_users(); ++v) {
        for (std::size_t c = 0; c < cell.n_bss(); ++c) {
            if (v == u && c == b) continue;
            interference += cell.gain(v, b, k) * p(v, c, k);
        }
    }
    return cell.gain(u, b, k) * p(u, b, k) / (cell.noise_mw(b, k) + interference);
}

double sinr_bar(const CellProblem& cell, const PowerAllocation& power, std::size_t u, std::size_t b,
                std::size_t k) {
    const auto& p = power.p;
    double interference = 0.0;
    for (std::size_t v = 0; v < cell.n_users(); ++v) {
        if (v == u) continue;
        for (std::size_t c = 0; c < cell.n_bss(); ++c) interference += cell.gain(v, b, k) * p(v, c, k);
    }
    return cell.gain(u, b, k) * power.band_power(u, k) / (cell.noise_mw(b, k) + interference);
}

double continuous_sum_rate(const CellProblem& cell, const PowerAllocation& power) {
    const auto f = detail::compute_field(cell, power.p);
    double rate = 0.0;
    for (std::size_t u = 0; u < cell.n_users(); ++u) {
        for (std::size_t b = 0; b < cell.n_bss(); ++b) {
            for (std::size_t k = 0; k < cell.n_bands(); ++k) {
                const double p = power.p(u, b, k);
                if (p <= 0.0) continue;
                const double z = cell.gain(u, b, k) * p /
                                 (cell.noise_mw(b, k) + detail::stream_interference(cell, f, power.p, u, b, k));
                rate += cell.band_width_hz[k] * std::log2(1.0 + z);
            }
        }
    }
    return rate;
}

double cell_sum_rate(const CellProblem& cell, const ChannelAssignment& gamma, const PowerAllocation& power) {
    const auto f = detail::compute_field(cell, power.p);
    double rate = 0.0;
    for (std::size_t u = 0; u < cell.n_users(); ++u) {
        for (std::size_t b = 0; b < cell.n_bss(); ++b) {
            for (std::size_t k = 0; k < cell.n_bands(); ++k) {
                if (!gamma.gamma(u, b, k)) continue;
                const double z = cell.gain(u, b, k) * power.p(u, b, k) /
                                 (cell.noise_mw(b, k) + detail::other_user_interference(cell, f, u, b, k));
                rate += cell.band_width_hz[k] * std::log2(1.0 + z);
            }
        }
    }
    return rate;
}

AlphaBeta alpha_beta(double z0) {
    if (!(z0 > 0.0)) return {};
    if (std::isinf(z0)) return {1.0, 0.0};
    const double alpha = z0 / (1.0 + z0);
    return {alpha, std::log2(1.0 + z0) - alpha * std::log2(z0)};
}

}  // namespace vcell::ic
