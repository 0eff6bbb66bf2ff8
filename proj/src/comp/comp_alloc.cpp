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
#include "vcell/comp_alloc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace vcell::comp {

void CompProblem::validate() const {
    const std::size_t U = n_users(), B = n_bss(), K = n_bands();
    if (B == 0) throw std::invalid_argument("comp: BS list is empty");
    if (K == 0) throw std::invalid_argument("comp: no bands");
    if (h.size() != U * K) throw std::invalid_argument("comp: one channel vector per (user, band) required");
    for (const auto& v : h) {
        if (static_cast<std::size_t>(v.size()) != B) throw std::invalid_argument("comp: channel vector length != #BS");
        if (!v.allFinite()) throw std::invalid_argument("comp: non-finite channel");
    }
    if (noise_cov.size() != K) throw std::invalid_argument("comp: one noise covariance per band required");
    for (const auto& n : noise_cov) {
        if (static_cast<std::size_t>(n.rows()) != B) throw std::invalid_argument("comp: noise covariance size != #BS");
        linalg::factor_hpd(n);
    }
    if (budget_mw.size() != U) throw std::invalid_argument("comp: one budget per user required");
    for (double p : budget_mw) {
        if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("comp: budgets must be positive");
    }
    for (double w : band_width_hz) {
        if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("comp: band width must be positive");
    }
}

CompProblem CompProblem::from_cell(const ic::CellProblem& cell) {
    const std::size_t U = cell.n_users(), B = cell.n_bss(), K = cell.n_bands();
    CompProblem p;
    p.users = cell.users;
    p.bss = cell.bss;
    p.band_width_hz = cell.band_width_hz;
    p.budget_mw = cell.budget_mw;
    p.h.reserve(U * K);
    for (std::size_t u = 0; u < U; ++u) {
        for (std::size_t k = 0; k < K; ++k) {
            CVector v(static_cast<Eigen::Index>(B));
            for (std::size_t b = 0; b < B; ++b) v(static_cast<Eigen::Index>(b)) = cell.h(u, b, k);
            p.h.push_back(std::move(v));
        }
    }
    for (std::size_t k = 0; k < K; ++k) {
        CMatrix n = CMatrix::Zero(static_cast<Eigen::Index>(B), static_cast<Eigen::Index>(B));
        for (std::size_t b = 0; b < B; ++b) n(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b)) = cell.noise_mw(b, k);
        p.noise_cov.push_back(std::move(n));
    }
    p.validate();
    return p;
}

CompProblem CompProblem::from_scenario(const netgen::NetworkScenario& s, std::span<const std::size_t> users,
                                       std::span<const std::size_t> bss) {
    return from_cell(ic::CellProblem::from_scenario(s, users, bss));
}

CompPower CompPower::zeros(const CompProblem& prob) { return {Grid2<double>(prob.n_users(), prob.n_bands(), 0.0)}; }

double CompPower::user_power(std::size_t u) const {
    double s = 0.0;
    for (double v : p.row(u)) s += v;
    return s;
}

void CompOptions::validate() const {
    if (!(tol > 0.0)) throw std::invalid_argument("comp options: tol must be > 0");
    if (max_sweeps < 1) throw std::invalid_argument("comp options: max_sweeps must be >= 1");
}

double comp_sum_capacity(const CompProblem& prob, const CompPower& power) {
    double rate = 0.0;
    for (std::size_t k = 0; k < prob.n_bands(); ++k) {
        CMatrix m = prob.noise_cov[k];
        bool any = false;
        for (std::size_t u = 0; u < prob.n_users(); ++u) {
            const double p = power.p(u, k);
            if (p <= 0.0) continue;
            const auto& h = prob.h_vec(u, k);
            m.noalias() += p * h * h.adjoint();
            any = true;
        }
        if (!any) continue;
        rate += prob.band_width_hz[k] * (linalg::hermitian_logdet(m) - linalg::hermitian_logdet(prob.noise_cov[k]));
    }
    return rate;
}

Waterfill waterfill(std::span<const double> gains, std::span<const double> band_width_hz, double budget) {
    const std::size_t K = gains.size();
    if (band_width_hz.size() != K) throw std::invalid_argument("waterfill: gains and widths differ in length");
    Waterfill out;
    out.p.assign(K, 0.0);
    std::vector<std::size_t> order;
    for (std::size_t k = 0; k < K; ++k) {
        if (gains[k] > 0.0) order.push_back(k);
    }
    if (order.empty()) {
        out.degenerate = true;
        return out;
    }
    // Band k is open iff lambda < W_k g_k; open bands in decreasing W g order.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return band_width_hz[a] * gains[a] > band_width_hz[b] * gains[b];
    });
    double sum_w = 0.0, sum_inv = 0.0;
    std::size_t open = 0;
    for (std::size_t n = 0; n < order.size(); ++n) {
        const std::size_t k = order[n];
        sum_w += band_width_hz[k];
        sum_inv += 1.0 / gains[k];
        const double lambda = sum_w / (budget + sum_inv);
        open = n + 1;
        out.lambda = lambda;
        const bool next_closed =
            n + 1 == order.size() || lambda >= band_width_hz[order[n + 1]] * gains[order[n + 1]];
        if (next_closed) break;
    }
    double total = 0.0;
    for (std::size_t n = 0; n < open; ++n) {
        const std::size_t k = order[n];
        out.p[k] = std::max(0.0, band_width_hz[k] / out.lambda - 1.0 / gains[k]);
        total += out.p[k];
    }
    if (total > 0.0) {
        for (auto& v : out.p) v *= budget / total;
    }
    return out;
}

Waterfill user_waterfill(const CompProblem& prob, std::size_t i, const CompPower& power) {
    const std::size_t K = prob.n_bands();
    std::vector<double> g(K);
    for (std::size_t k = 0; k < K; ++k) {
        CMatrix sigma = prob.noise_cov[k];
        for (std::size_t u = 0; u < prob.n_users(); ++u) {
            if (u == i || power.p(u, k) <= 0.0) continue;
            const auto& h = prob.h_vec(u, k);
            sigma.noalias() += power.p(u, k) * h * h.adjoint();
        }
        g[k] = linalg::effective_gain(prob.h_vec(i, k), sigma);
    }
    return waterfill(g, prob.band_width_hz, prob.budget_mw[i]);
}

namespace {

// Sigma of user i on one band from scratch, in whitened coordinates.
CMatrix sigma_from_scratch(const std::vector<CVector>& hw, const CompPower& power, std::size_t K, std::size_t i,
                           std::size_t k, Eigen::Index B) {
    CMatrix s = CMatrix::Identity(B, B);
    for (std::size_t u = 0; u < power.p.rows(); ++u) {
        if (u == i || power.p(u, k) <= 0.0) continue;
        s.noalias() += power.p(u, k) * hw[u * K + k] * hw[u * K + k].adjoint();
    }
    return s;
}

}  // namespace

CompResult comp_allocate(const CompProblem& prob, const CompOptions& opts) {
    prob.validate();
    opts.validate();
    const std::size_t U = prob.n_users(), K = prob.n_bands();
    const auto B = static_cast<Eigen::Index>(prob.n_bss());
    CompResult res;
    res.power = CompPower::zeros(prob);
    if (U == 0) {
        res.converged = true;
        return res;
    }
    for (std::size_t u = 0; u < U; ++u) {
        for (std::size_t k = 0; k < K; ++k) res.power.p(u, k) = prob.budget_mw[u] / static_cast<double>(K);
    }

    // Whitening by the noise Cholesky factor turns every N_k into I and
    // leaves h^H Sigma^{-1} h and the rate unchanged.
    std::vector<CVector> hw(U * K);
    for (std::size_t k = 0; k < K; ++k) {
        const auto llt = linalg::factor_hpd(prob.noise_cov[k]);
        for (std::size_t u = 0; u < U; ++u) {
            hw[u * K + k] = llt.matrixL().solve(prob.h_vec(u, k));
        }
    }

    std::vector<double> g(K), logdet_sigma(K);
    double objective = 0.0;
    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        std::vector<CMatrix> total(K);
        for (std::size_t k = 0; k < K; ++k) total[k] = sigma_from_scratch(hw, res.power, K, U, k, B);
        const double start = sweep == 0 ? comp_sum_capacity(prob, res.power) : objective;
        if (sweep == 0) objective = start;

        for (std::size_t i = 0; i < U; ++i) {
            std::vector<CMatrix> sigma(K);
            for (std::size_t k = 0; k < K; ++k) {
                const auto& h = hw[i * K + k];
                sigma[k] = total[k];
                if (res.power.p(i, k) > 0.0) sigma[k].noalias() -= res.power.p(i, k) * h * h.adjoint();
                Eigen::LLT<CMatrix> llt(sigma[k]);
                if (llt.info() != Eigen::Success) {
                    sigma[k] = sigma_from_scratch(hw, res.power, K, i, k, B);
                    llt.compute(sigma[k]);
                }
                double ld = 0.0;
                for (Eigen::Index r = 0; r < B; ++r) ld += std::log2(llt.matrixLLT()(r, r).real());
                logdet_sigma[k] = 2.0 * ld;
                g[k] = linalg::effective_gain(h, llt);
            }
            const auto best = waterfill(g, prob.band_width_hz, prob.budget_mw[i]);
            if (best.degenerate) res.degenerate = true;
            objective = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                res.power.p(i, k) = best.p[k];
                const auto& h = hw[i * K + k];
                total[k] = sigma[k];
                if (best.p[k] > 0.0) total[k].noalias() += best.p[k] * h * h.adjoint();
                objective += prob.band_width_hz[k] * (logdet_sigma[k] + std::log2(1.0 + g[k] * best.p[k]));
            }
            res.objective_trace.push_back(objective);
        }
        res.sweeps = sweep + 1;
        if (objective - start <= opts.tol * std::max(objective, 1e-300)) {
            res.converged = true;
            break;
        }
    }
    res.rate = comp_sum_capacity(prob, res.power);
    return res;
}

}  // namespace vcell::comp
