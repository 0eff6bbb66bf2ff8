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
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "vcell/oracles.hpp"

namespace vcell::oracle {

namespace {

// All ways to write `total` as an ordered sum of `parts` nonnegative integers.
std::vector<std::vector<int>> compositions(int total, std::size_t parts) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(parts, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
        if (i + 1 == parts) {
            cur[i] = left;
            out.push_back(cur);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            cur[i] = v;
            rec(i + 1, left - v);
        }
    };
    if (parts > 0) rec(0, total);
    return out;
}

// Variables grouped per user; each group must stay in {x >= 0, sum x <= cap}.
struct Box {
    std::vector<std::size_t> group;  // per variable
    std::vector<double> cap;         // per group
};

bool feasible(const Box& box, const std::vector<double>& x) {
    std::vector<double> used(box.cap.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < 0.0) return false;
        used[box.group[i]] += x[i];
    }
    for (std::size_t g = 0; g < used.size(); ++g) {
        if (used[g] > box.cap[g] * (1.0 + 1e-12)) return false;
    }
    return true;
}

// Compass search with single-coordinate moves and within-group transfers.
double pattern_search(const std::function<double(const std::vector<double>&)>& f, const Box& box,
                      std::vector<double>& x, double step) {
    double best = f(x);
    const double cap_max = *std::max_element(box.cap.begin(), box.cap.end());
    while (step > 1e-11 * cap_max) {
        bool improved = false;
        auto try_move = [&](std::vector<double> y) {
            if (!feasible(box, y)) return;
            const double v = f(y);
            if (v > best) {
                best = v;
                x = std::move(y);
                improved = true;
            }
        };
        for (std::size_t i = 0; i < x.size(); ++i) {
            for (double s : {step, -step}) {
                auto y = x;
                y[i] = std::max(0.0, y[i] + s);
                try_move(std::move(y));
            }
            for (std::size_t j = 0; j < x.size(); ++j) {
                if (j == i || box.group[j] != box.group[i]) continue;
                auto y = x;
                const double moved = std::min(step, y[j]);
                y[j] -= moved;
                y[i] += moved;
                try_move(std::move(y));
            }
        }
        if (!improved) step *= 0.5;
    }
    return best;
}

// Grid over the product of per-user simplices, then pattern search from the best point.
double grid_then_refine(const std::function<double(const std::vector<double>&)>& f, std::size_t users,
                        std::size_t dims, const std::vector<double>& budgets, int divisions) {
    const auto comps = compositions(divisions, dims + 1);  // last part = unused budget
    Box box;
    for (std::size_t u = 0; u < users; ++u) {
        for (std::size_t d = 0; d < dims; ++d) box.group.push_back(u);
    }
    box.cap = budgets;

    std::vector<std::size_t> idx(users, 0);
    std::vector<double> x(users * dims, 0.0), best_x = x;
    double best = -std::numeric_limits<double>::infinity();
    for (;;) {
        for (std::size_t u = 0; u < users; ++u) {
            for (std::size_t d = 0; d < dims; ++d) {
                x[u * dims + d] = budgets[u] * comps[idx[u]][d] / divisions;
            }
        }
        const double v = f(x);
        if (v > best) {
            best = v;
            best_x = x;
        }
        std::size_t u = 0;
        while (u < users && ++idx[u] == comps.size()) idx[u++] = 0;
        if (u == users) break;
    }
    const double cap_min = *std::min_element(budgets.begin(), budgets.end());
    return pattern_search(f, box, best_x, cap_min / divisions);
}

}  // namespace

// --- assignment ------------------------------------------------------------------

double matching_value(const Grid2<double>& w, const Matching& m) {
    double total = 0.0;
    for (std::size_t r = 0; r < m.size(); ++r) {
        if (m[r]) total += w(r, *m[r]);
    }
    return total;
}

Matching best_matching_exhaustive(const Grid2<double>& w) {
    const std::size_t n = std::max(w.rows(), w.cols());
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Matching best(w.rows());
    double best_value = -std::numeric_limits<double>::infinity();
    do {
        Matching m(w.rows());
        for (std::size_t r = 0; r < w.rows(); ++r) {
            if (perm[r] < w.cols()) m[r] = perm[r];
        }
        const double v = matching_value(w, m);
        if (v > best_value) {
            best_value = v;
            best = m;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// --- minimax linkage -----------------------------------------------------------------

cluster::Dendrogram minimax_dendrogram_exhaustive(std::span<const Point> points) {
    struct Node {
        std::size_t id;
        std::vector<std::size_t> members;
    };
    std::vector<Node> active;
    for (std::size_t i = 0; i < points.size(); ++i) active.push_back({i, {i}});

    auto radius_of = [&](const std::vector<std::size_t>& members, std::size_t& center) {
        double best = std::numeric_limits<double>::infinity();
        for (auto c : members) {
            double r = 0.0;
            for (auto m : members) r = std::max(r, distance(points[c], points[m]));
            if (r < best) {
                best = r;
                center = c;
            }
        }
        return best;
    };

    cluster::Dendrogram d;
    d.leaves = points.size();
    std::size_t next_id = points.size();
    while (active.size() > 1) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0, proto = 0;
        for (std::size_t i = 0; i < active.size(); ++i) {
            for (std::size_t j = i + 1; j < active.size(); ++j) {
                auto uni = active[i].members;
                uni.insert(uni.end(), active[j].members.begin(), active[j].members.end());
                std::sort(uni.begin(), uni.end());
                std::size_t c = 0;
                const double r = radius_of(uni, c);
                if (r < best) {
                    best = r;
                    bi = i;
                    bj = j;
                    proto = c;
                }
            }
        }
        d.merges.push_back({active[bi].id, active[bj].id, best, proto});
        Node merged{next_id++, active[bi].members};
        merged.members.insert(merged.members.end(), active[bj].members.begin(), active[bj].members.end());
        std::sort(merged.members.begin(), merged.members.end());
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(bi));
        active.push_back(std::move(merged));
    }
    return d;
}

// --- dense linear algebra -----------------------------------------------------------

cplx det_cofactor(const linalg::CMatrix& m) {
    const auto n = m.rows();
    if (n != m.cols()) throw std::invalid_argument("det_cofactor: matrix not square");
    if (n == 0) return 1.0;
    if (n == 1) return m(0, 0);
    cplx total = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        linalg::CMatrix minor(n - 1, n - 1);
        for (Eigen::Index r = 1; r < n; ++r) {
            for (Eigen::Index c = 0, cc = 0; c < n; ++c) {
                if (c != j) minor(r - 1, cc++) = m(r, c);
            }
        }
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        total += sign * m(0, j) * det_cofactor(minor);
    }
    return total;
}

linalg::CMatrix inverse_gauss_jordan(const linalg::CMatrix& m) {
    const auto n = m.rows();
    if (n != m.cols()) throw std::invalid_argument("inverse_gauss_jordan: matrix not square");
    linalg::CMatrix a = m;
    linalg::CMatrix inv = linalg::CMatrix::Identity(n, n);
    for (Eigen::Index col = 0; col < n; ++col) {
        Eigen::Index piv = col;
        for (Eigen::Index r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        }
        if (std::abs(a(piv, col)) == 0.0) throw std::domain_error("inverse_gauss_jordan: singular matrix");
        a.row(col).swap(a.row(piv));
        inv.row(col).swap(inv.row(piv));
        const cplx d = a(col, col);
        a.row(col) /= d;
        inv.row(col) /= d;
        for (Eigen::Index r = 0; r < n; ++r) {
            if (r == col) continue;
            const cplx f = a(r, col);
            a.row(r) -= f * a.row(col);
            inv.row(r) -= f * inv.row(col);
        }
    }
    return inv;
}

// --- rate formulas ------------------------------------------------------------------

double ic_rate_direct(const ic::CellProblem& cell, const Tensor3<std::uint8_t>& gamma, const Tensor3<double>& p) {
    const std::size_t U = cell.n_users(), B = cell.n_bss(), K = cell.n_bands();
    std::vector<double> band(U * K, 0.0);
    for (std::size_t u = 0; u < U; ++u) {
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t k = 0; k < K; ++k) band[u * K + k] += p(u, b, k);
        }
    }
    double rate = 0.0;
    for (std::size_t u = 0; u < U; ++u) {
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t k = 0; k < K; ++k) {
                if (!gamma(u, b, k)) continue;
                double den = cell.noise_mw(b, k);
                for (std::size_t v = 0; v < U; ++v) {
                    if (v != u) den += std::norm(cell.h(v, b, k)) * band[v * K + k];
                }
                rate += cell.band_width_hz[k] * std::log2(1.0 + std::norm(cell.h(u, b, k)) * band[u * K + k] / den);
            }
        }
    }
    return rate;
}

double continuous_rate_direct(const ic::CellProblem& cell, const Tensor3<double>& p) {
    const std::size_t U = cell.n_users(), B = cell.n_bss(), K = cell.n_bands();
    double rate = 0.0;
    for (std::size_t u = 0; u < U; ++u) {
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t k = 0; k < K; ++k) {
                double den = cell.noise_mw(b, k);
                for (std::size_t v = 0; v < U; ++v) {
                    for (std::size_t c = 0; c < B; ++c) {
                        if (v != u || c != b) den += std::norm(cell.h(v, b, k)) * p(v, c, k);
                    }
                }
                rate += cell.band_width_hz[k] * std::log2(1.0 + std::norm(cell.h(u, b, k)) * p(u, b, k) / den);
            }
        }
    }
    return rate;
}

double comp_rate_direct(const comp::CompProblem& prob, const Grid2<double>& p) {
    double rate = 0.0;
    for (std::size_t k = 0; k < prob.n_bands(); ++k) {
        linalg::CMatrix s = prob.noise_cov[k];
        for (std::size_t u = 0; u < prob.n_users(); ++u) {
            const auto& h = prob.h_vec(u, k);
            s += p(u, k) * h * h.adjoint();
        }
        rate += prob.band_width_hz[k] *
                (std::log2(det_cofactor(s).real()) - std::log2(det_cofactor(prob.noise_cov[k]).real()));
    }
    return rate;
}

// --- grid searches --------------------------------------------------------------------

GridOptimum waterfill_grid(std::span<const double> gains, std::span<const double> widths, double budget,
                           double step) {
    const std::size_t K = gains.size();
    if (K == 0 || widths.size() != K) throw std::invalid_argument("waterfill_grid: size mismatch");
    const int divisions = static_cast<int>(std::llround(budget / step));
    GridOptimum best{-std::numeric_limits<double>::infinity(), {}};
    std::vector<double> p(K);
    // The objective increases in every p_k, so the last band takes what is left.
    std::function<void(std::size_t, int)> rec = [&](std::size_t k, int left) {
        if (k + 1 == K) {
            p[k] = budget * left / divisions;
            double v = 0.0;
            for (std::size_t j = 0; j < K; ++j) v += widths[j] * std::log2(1.0 + gains[j] * p[j]);
            if (v > best.value) best = {v, p};
            return;
        }
        for (int i = 0; i <= left; ++i) {
            p[k] = budget * i / divisions;
            rec(k + 1, left - i);
        }
    };
    rec(0, divisions);
    return best;
}

double ic_joint_optimum(const ic::CellProblem& cell, int divisions) {
    const std::size_t U = cell.n_users(), B = cell.n_bss(), K = cell.n_bands();
    if (U == 0) return 0.0;
    if (U > 2 || K > 2) throw std::invalid_argument("ic_joint_optimum: at most 2 users and 2 bands");
    std::size_t patterns = 1;
    for (std::size_t i = 0; i < U * K; ++i) patterns *= B;

    double best = 0.0;
    Tensor3<std::uint8_t> gamma(U, B, K);
    Tensor3<double> p(U, B, K);
    std::vector<std::size_t> choice(U * K);
    for (std::size_t pat = 0; pat < patterns; ++pat) {
        std::size_t code = pat;
        for (auto& c : choice) {
            c = code % B;
            code /= B;
        }
        std::fill(gamma.flat().begin(), gamma.flat().end(), 0);
        for (std::size_t u = 0; u < U; ++u) {
            for (std::size_t k = 0; k < K; ++k) gamma(u, choice[u * K + k], k) = 1;
        }
        auto f = [&](const std::vector<double>& x) {
            std::fill(p.flat().begin(), p.flat().end(), 0.0);
            for (std::size_t u = 0; u < U; ++u) {
                for (std::size_t k = 0; k < K; ++k) p(u, choice[u * K + k], k) = x[u * K + k];
            }
            return ic_rate_direct(cell, gamma, p);
        };
        best = std::max(best, grid_then_refine(f, U, K, cell.budget_mw, divisions));
    }
    return best;
}

double continuous_optimum_one_band(const ic::CellProblem& cell, int divisions) {
    const std::size_t U = cell.n_users(), B = cell.n_bss();
    if (cell.n_bands() != 1) throw std::invalid_argument("continuous_optimum_one_band: exactly one band");
    if (U == 0) return 0.0;
    Tensor3<double> p(U, B, 1);
    auto f = [&](const std::vector<double>& x) {
        for (std::size_t u = 0; u < U; ++u) {
            for (std::size_t b = 0; b < B; ++b) p(u, b, 0) = x[u * B + b];
        }
        return continuous_rate_direct(cell, p);
    };
    return grid_then_refine(f, U, B, cell.budget_mw, divisions);
}

GridOptimum comp_two_band_grid(const comp::CompProblem& prob, int divisions) {
    if (prob.n_bands() != 2) throw std::invalid_argument("comp_two_band_grid: exactly two bands");
    const std::size_t U = prob.n_users();
    GridOptimum best{-std::numeric_limits<double>::infinity(), {}};
    std::vector<int> idx(U, 0);
    Grid2<double> p(U, 2);
    for (;;) {
        for (std::size_t u = 0; u < U; ++u) {
            p(u, 0) = prob.budget_mw[u] * idx[u] / divisions;
            p(u, 1) = prob.budget_mw[u] - p(u, 0);
        }
        const double v = comp_rate_direct(prob, p);
        if (v > best.value) best = {v, {p.flat().begin(), p.flat().end()}};
        std::size_t u = 0;
        while (u < U && ++idx[u] > divisions) idx[u++] = 0;
        if (u == U) break;
    }
    return best;
}

// --- random instances ---------------------------------------------------------------

ic::CellProblem random_cell(std::mt19937_64& rng, std::size_t users, std::size_t bss, std::size_t bands,
                            double gain_db_lo, double gain_db_hi) {
    std::uniform_real_distribution<double> db(gain_db_lo, gain_db_hi);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::acos(-1.0));
    Tensor3<cplx> h(users, bss, bands);
    for (auto& x : h.flat()) x = std::polar(std::sqrt(std::pow(10.0, db(rng) / 10.0)), phase(rng));
    return ic::CellProblem::from_channels(std::move(h), Grid2<double>(bss, bands, 1.0),
                                          std::vector<double>(bands, 1.0), std::vector<double>(users, 1.0));
}

linalg::CMatrix random_hpd(std::mt19937_64& rng, std::size_t n) {
    const auto a = static_cast<Eigen::Index>(n);
    linalg::CMatrix g(a, a);
    std::normal_distribution<double> nd;
    for (Eigen::Index i = 0; i < a; ++i) {
        for (Eigen::Index j = 0; j < a; ++j) g(i, j) = cplx(nd(rng), nd(rng));
    }
    linalg::CMatrix m = g * g.adjoint() + static_cast<double>(n) * linalg::CMatrix::Identity(a, a);
    return 0.5 * (m + m.adjoint());
}

linalg::CVector random_cvector(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> nd;
    linalg::CVector v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = cplx(nd(rng), nd(rng));
    return v;
}

}  // namespace vcell::oracle
