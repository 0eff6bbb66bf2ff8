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
#include <numbers>
#include <stdexcept>

#include "engine.hpp"
#include "vcell/ic_alloc.hpp"

namespace vcell::ic {

namespace detail {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kLooseInnerTol = 1e-3;
constexpr double kOvershoot = 2.0;  // largest power the inner iterations may visit, relative to the budget

// Active, non-frozen triples of one user: flat tensor index and band.
struct UserStreams {
    std::vector<std::size_t> index;
    std::vector<std::size_t> band;
};

std::vector<UserStreams> collect_streams(const CellProblem& cell, const std::vector<std::uint8_t>& active,
                                         const Tensor3<double>& alpha) {
    const std::size_t U = cell.n_users(), B = cell.n_bss(), K = cell.n_bands();
    std::vector<UserStreams> out(U);
    for (std::size_t u = 0; u < U; ++u) {
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t k = 0; k < K; ++k) {
                const std::size_t i = alpha.index(u, b, k);
                if (active[i] && alpha.flat()[i] > 0.0) {
                    out[u].index.push_back(i);
                    out[u].band.push_back(k);
                }
            }
        }
    }
    return out;
}

// Scales a user's powers onto the budget if rounding left it above.
void enforce_budgets(const CellProblem& cell, Tensor3<double>& p) {
    for (std::size_t u = 0; u < cell.n_users(); ++u) {
        double total = 0.0;
        for (std::size_t b = 0; b < cell.n_bss(); ++b) {
            for (std::size_t k = 0; k < cell.n_bands(); ++k) total += p(u, b, k);
        }
        if (total > cell.budget_mw[u]) {
            const double s = cell.budget_mw[u] / total;
            for (std::size_t b = 0; b < cell.n_bss(); ++b) {
                for (std::size_t k = 0; k < cell.n_bands(); ++k) p(u, b, k) *= s;
            }
        }
    }
}

struct InnerOutcome {
    bool converged = false;
    int iterations = 0;
};

// One application of the fast map: multipliers solved per user, then
// every listed stream set to its stationary power at the current prices.
void fast_map(const CellProblem& cell, const Tensor3<double>& alpha, const std::vector<UserStreams>& streams,
              const SolverOptions& opts, const Tensor3<double>& p, std::vector<double>& out,
              std::vector<double>& lambda) {
    const auto price = interference_price(cell, alpha, p);
    std::vector<double> a, d;
    std::size_t pos = 0;
    for (std::size_t u = 0; u < streams.size(); ++u) {
        const auto& st = streams[u];
        if (st.index.empty()) continue;
        const double floor = opts.p_floor_rel * cell.budget_mw[u];
        a.resize(st.index.size());
        d.resize(st.index.size());
        for (std::size_t j = 0; j < st.index.size(); ++j) {
            const double w = cell.band_width_hz[st.band[j]];
            a[j] = w * alpha.flat()[st.index[j]];
            d[j] = w * price.flat()[st.index[j]];
        }
        lambda[u] = solve_multiplier(a, d, floor, cell.budget_mw[u]);
        for (std::size_t j = 0; j < st.index.size(); ++j) {
            out[pos++] = std::max(floor, a[j] / (lambda[u] * kLn2 + d[j]));
        }
    }
}

// Fixed-point iteration in log-power coordinates with Anderson mixing of
// the last few residuals. `map` writes the image powers of the streams at
// the powers currently loaded into p. The returned powers are always a map
// output, so they satisfy whatever the map enforces (budgets, clamps).
template <typename Map>
InnerOutcome anderson_fixed_point(const CellProblem& cell, const std::vector<UserStreams>& streams,
                                  const SolverOptions& opts, Tensor3<double>& p, Map&& map) {
    std::vector<std::size_t> where;
    std::vector<double> lo, hi;
    for (std::size_t u = 0; u < streams.size(); ++u) {
        for (auto i : streams[u].index) {
            where.push_back(i);
            lo.push_back(std::log(opts.p_floor_rel * cell.budget_mw[u]));
            hi.push_back(std::log(kOvershoot * cell.budget_mw[u]));
        }
    }
    const std::size_t n = where.size();
    const auto N = static_cast<Eigen::Index>(n);
    if (n == 0) return {true, 0};

    Eigen::VectorXd x(N), fx(N), r(N), prev_x(N), prev_r(N);
    for (std::size_t i = 0; i < n; ++i) x(static_cast<Eigen::Index>(i)) = std::log(p.flat()[where[i]]);
    const int depth = std::max(0, opts.anderson_depth);
    Eigen::MatrixXd dx(N, std::max(depth, 1)), dr(N, std::max(depth, 1));
    int stored = 0, next_col = 0;
    bool have_prev = false;
    double best_res = std::numeric_limits<double>::infinity();
    std::vector<double> mapped(n);

    auto load = [&](const Eigen::VectorXd& v) {
        for (std::size_t i = 0; i < n; ++i) p.flat()[where[i]] = std::exp(v(static_cast<Eigen::Index>(i)));
    };

    for (int s = 0; s < opts.s_max; ++s) {
        load(x);
        map(p, mapped);
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto e = static_cast<Eigen::Index>(i);
            fx(e) = std::log(mapped[i]);
            r(e) = fx(e) - x(e);
            const double at_floor = lo[i] + 1e-9;
            if (x(e) <= at_floor && fx(e) <= at_floor) continue;
            res = std::max(res, std::abs(std::expm1(r(e))));
        }
        if (res <= opts.tol_fixed) {
            load(fx);
            return {true, s + 1};
        }

        if (res > 10.0 * best_res) {
            stored = 0;  // mixing went astray; restart from plain iteration
            have_prev = false;
        }
        best_res = std::min(best_res, res);
        if (depth > 0 && have_prev) {
            dx.col(next_col) = x - prev_x;
            dr.col(next_col) = r - prev_r;
            next_col = (next_col + 1) % depth;
            stored = std::min(stored + 1, depth);
        }
        prev_x = x;
        prev_r = r;
        have_prev = true;

        Eigen::VectorXd step = fx;
        if (stored > 0) {
            const Eigen::VectorXd gamma = dr.leftCols(stored).colPivHouseholderQr().solve(r);
            step = fx - (dx.leftCols(stored) + dr.leftCols(stored)) * gamma;
            if (!step.allFinite()) {
                step = fx;
                stored = 0;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            const auto e = static_cast<Eigen::Index>(i);
            x(e) = std::clamp(step(e), lo[i], hi[i]);
        }
    }
    load(x);
    map(p, mapped);
    for (std::size_t i = 0; i < n; ++i) p.flat()[where[i]] = mapped[i];
    return {false, opts.s_max};
}

InnerOutcome fast_fixed_point(const CellProblem& cell, const Tensor3<double>& alpha,
                              const std::vector<UserStreams>& streams, const SolverOptions& opts,
                              Tensor3<double>& p, std::vector<double>& lambda) {
    return anderson_fixed_point(cell, streams, opts, p, [&](const Tensor3<double>& at, std::vector<double>& out) {
        fast_map(cell, alpha, streams, opts, at, out, lambda);
    });
}

// Fixed point at frozen multipliers. Powers are kept in [floor, 2 budget]:
// clamping at the budget itself would hide a missing multiplier.
InnerOutcome clamped_fixed_point(const CellProblem& cell, const Tensor3<double>& alpha,
                                 const std::vector<UserStreams>& streams, const SolverOptions& opts,
                                 const std::vector<double>& lambda, Tensor3<double>& p) {
    return anderson_fixed_point(cell, streams, opts, p, [&](const Tensor3<double>& at, std::vector<double>& out) {
        const auto price = interference_price(cell, alpha, at);
        std::size_t pos = 0;
        for (std::size_t u = 0; u < streams.size(); ++u) {
            const auto& st = streams[u];
            const double floor = opts.p_floor_rel * cell.budget_mw[u];
            for (std::size_t j = 0; j < st.index.size(); ++j) {
                const double w = cell.band_width_hz[st.band[j]];
                const double denom = lambda[u] * kLn2 + w * price.flat()[st.index[j]];
                const double raw = denom > 0.0 ? w * alpha.flat()[st.index[j]] / denom : cell.budget_mw[u];
                out[pos++] = std::clamp(raw, floor, kOvershoot * cell.budget_mw[u]);
            }
        }
    });
}

InnerOutcome dual_ascent(const CellProblem& cell, const Tensor3<double>& alpha, const std::vector<UserStreams>& streams,
                         const SolverOptions& opts, bool cold, Tensor3<double>& p, std::vector<double>& lambda) {
    const std::size_t U = cell.n_users();
    std::vector<double> gain(U, 1.0), lambda0(U, 0.0);
    std::vector<int> last_sign(U, 0);
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> lo(U, 0.0), hi(U, inf);
    for (std::size_t u = 0; u < U; ++u) {
        double total = 0.0;
        for (std::size_t j = 0; j < streams[u].index.size(); ++j) {
            total += cell.band_width_hz[streams[u].band[j]] * alpha.flat()[streams[u].index[j]];
        }
        // With no interference the budget binds at lambda = sum W alpha / (ln2 budget).
        lambda0[u] = total / (kLn2 * cell.budget_mw[u]);
        if (cold) lambda[u] = lambda0[u];
    }

    bool inner_ok = true;
    for (int n = 0; n < opts.n_max; ++n) {
        const auto inner = clamped_fixed_point(cell, alpha, streams, opts, lambda, p);
        inner_ok = inner.converged;
        bool done = true;
        for (std::size_t u = 0; u < U; ++u) {
            if (streams[u].index.empty()) continue;
            double total = 0.0;
            for (auto i : streams[u].index) total += p.flat()[i];
            const double violation = (total - cell.budget_mw[u]) / cell.budget_mw[u];
            const bool satisfied =
                lambda[u] > 0.0 ? std::abs(violation) <= opts.tol_dual : violation <= opts.tol_dual;
            if (satisfied) continue;
            done = false;
            if (lambda[u] <= 0.0) {
                lambda[u] = 1e-6 * lambda0[u];  // leave zero multiplicatively
                continue;
            }
            // The power sum falls roughly like 1/lambda, so steps are taken in log lambda.
            const int sign = violation > 0.0 ? 1 : -1;
            if (last_sign[u] != 0) gain[u] = sign != last_sign[u] ? 0.5 * gain[u] : std::min(4.0, 1.5 * gain[u]);
            last_sign[u] = sign;
            // Bracket of seen multipliers. Other users move too, so a side that the
            // current sign contradicts is dropped instead of trusted.
            if (sign > 0) {
                lo[u] = lambda[u];
                if (hi[u] <= lambda[u]) hi[u] = inf;
            } else {
                hi[u] = lambda[u];
                if (lo[u] >= lambda[u]) lo[u] = 0.0;
            }
            double next = lambda[u] * std::exp(gain[u] * std::log1p(std::max(violation, -0.999)));
            if (!(next > lo[u] && next < hi[u]) && lo[u] > 0.0 && std::isfinite(hi[u])) {
                next = std::sqrt(lo[u] * hi[u]);
            }
            if (next < 1e-12 * lambda0[u]) next = 0.0;  // budget does not bind
            lambda[u] = next;
        }
        if (done && inner_ok) return {true, n + 1};
    }
    return {false, opts.n_max};
}

}  // namespace

Tensor3<double> interference_price(const CellProblem& cell, const Tensor3<double>& alpha, const Tensor3<double>& p) {
    const std::size_t U = cell.n_users(), B = cell.n_bss(), K = cell.n_bands();
    const auto f = compute_field(cell, p);
    Tensor3<double> c(U, B, K, 0.0);
    Grid2<double> per_receiver(B, K, 0.0);
    for (std::size_t u = 0; u < U; ++u) {
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t k = 0; k < K; ++k) {
                const double al = alpha(u, b, k);
                if (al <= 0.0) continue;
                const double v = al / (cell.noise_mw(b, k) + stream_interference(cell, f, p, u, b, k));
                c(u, b, k) = v;
                per_receiver(b, k) += v;
            }
        }
    }
    Tensor3<double> price(U, B, K, 0.0);
    for (std::size_t u = 0; u < U; ++u) {
        for (std::size_t k = 0; k < K; ++k) {
            double q = 0.0;
            for (std::size_t b = 0; b < B; ++b) q += cell.gain(u, b, k) * per_receiver(b, k);
            for (std::size_t b = 0; b < B; ++b) {
                price(u, b, k) = std::max(0.0, q - cell.gain(u, b, k) * c(u, b, k));
            }
        }
    }
    return price;
}

double solve_multiplier(const std::vector<double>& a, const std::vector<double>& d, double floor, double budget) {
    if (a.empty()) return 0.0;
    const double inf = std::numeric_limits<double>::infinity();
    auto excess = [&](double lambda) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double denom = lambda * kLn2 + d[i];
            if (denom <= 0.0) return inf;
            s += std::max(floor, a[i] / denom);
        }
        return s - budget;
    };
    auto slope = [&](double lambda) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double denom = lambda * kLn2 + d[i];
            if (a[i] / denom > floor) s -= a[i] * kLn2 / (denom * denom);
        }
        return s;
    };

    double lo = 0.0;
    double f_lo = excess(0.0);
    if (f_lo <= 0.0) return 0.0;

    double sum_a = 0.0;
    for (double v : a) sum_a += v;
    double hi = sum_a / (kLn2 * budget);
    if (!(hi > 0.0)) hi = 1.0;
    while (excess(hi) > 0.0) {
        lo = hi;
        f_lo = excess(hi);
        hi *= 2.0;
    }

    // The excess is convex and decreasing, so Newton steps taken from the
    // left end stay inside the bracket; bisection covers the rest.
    for (int it = 0; it < 200; ++it) {
        double x = 0.5 * (lo + hi);
        if (std::isfinite(f_lo)) {
            const double g = slope(lo);
            if (g < 0.0) {
                const double newton = lo - f_lo / g;
                if (newton > lo && newton < hi) x = newton;
            }
        }
        const double fx = excess(x);
        if (std::abs(fx) <= 1e-13 * budget) return x;
        if (fx > 0.0) {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
        }
        if (hi - lo <= 1e-15 * hi) break;
    }
    return hi;
}

ContinuousResult run_sca(const CellProblem& cell, const std::vector<std::uint8_t>& active, ApproxCoeffs start,
                         Tensor3<double> p0, Variant variant, const SolverOptions& opts) {
    opts.validate();
    const std::size_t U = cell.n_users(), B = cell.n_bss(), K = cell.n_bands();
    ContinuousResult res;
    res.coeffs = std::move(start);
    res.power.p = std::move(p0);
    res.lambda.assign(U, 0.0);

    bool outer_ok = false, inner_ok = true;
    double previous = 0.0;
    // Inner accuracy tracks the progress of the refresh loop (fast variant).
    double inner_tol = variant == Variant::fast ? std::max(opts.tol_fixed, kLooseInnerTol) : opts.tol_fixed;
    for (int m = 0; m < opts.m_max; ++m) {
        if (m > 0) {
            const auto f = compute_field(cell, res.power.p);
            for (std::size_t u = 0; u < U; ++u) {
                for (std::size_t b = 0; b < B; ++b) {
                    for (std::size_t k = 0; k < K; ++k) {
                        if (!active[res.coeffs.alpha.index(u, b, k)]) continue;
                        const double z = cell.gain(u, b, k) * res.power.p(u, b, k) /
                                         (cell.noise_mw(b, k) + stream_interference(cell, f, res.power.p, u, b, k));
                        const auto ab = alpha_beta(z);
                        res.coeffs.alpha(u, b, k) = ab.alpha;
                        res.coeffs.beta(u, b, k) = ab.beta;
                    }
                }
            }
        }
        const auto streams = collect_streams(cell, active, res.coeffs.alpha);
        auto flat = res.power.p.flat();
        std::vector<double> kept(flat.size(), 0.0);
        for (std::size_t u = 0; u < U; ++u) {
            const double floor = opts.p_floor_rel * cell.budget_mw[u];
            for (auto i : streams[u].index) kept[i] = std::max(flat[i], floor);
        }
        std::copy(kept.begin(), kept.end(), flat.begin());

        SolverOptions step_opts = opts;
        step_opts.tol_fixed = inner_tol;
        const auto inner = variant == Variant::fast
                               ? fast_fixed_point(cell, res.coeffs.alpha, streams, step_opts, res.power.p, res.lambda)
                               : dual_ascent(cell, res.coeffs.alpha, streams, opts, m == 0, res.power.p, res.lambda);
        inner_ok = inner.converged;
        enforce_budgets(cell, res.power.p);

        double rate = continuous_sum_rate(cell, res.power);
        const double change = std::abs(rate - previous) / std::max(rate, 1e-300);
        if (m > 0 && change <= opts.tol_outer) {
            if (inner_tol > opts.tol_fixed) {
                // Early refreshes were solved loosely; finish the last one to full accuracy.
                inner_ok = fast_fixed_point(cell, res.coeffs.alpha, streams, opts, res.power.p, res.lambda).converged;
                enforce_budgets(cell, res.power.p);
                rate = continuous_sum_rate(cell, res.power);
            }
            res.rate_trace.push_back(rate);
            res.outer_iterations = m + 1;
            outer_ok = true;
            break;
        }
        res.rate_trace.push_back(rate);
        res.outer_iterations = m + 1;
        if (variant == Variant::fast && m > 0) {
            inner_tol = std::max(opts.tol_fixed, std::min(kLooseInnerTol, 0.1 * change));
        }
        previous = rate;
    }
    res.rate = res.rate_trace.empty() ? 0.0 : res.rate_trace.back();
    res.converged = outer_ok && inner_ok;
    return res;
}

}  // namespace detail

namespace {

ContinuousResult continuous_allocate(const CellProblem& cell, const SolverOptions& opts, detail::Variant variant) {
    cell.validate();
    const std::size_t U = cell.n_users(), B = cell.n_bss(), K = cell.n_bands();
    ApproxCoeffs start{Tensor3<double>(U, B, K, 1.0), Tensor3<double>(U, B, K, 0.0)};
    Tensor3<double> p0(U, B, K, 0.0);
    for (std::size_t u = 0; u < U; ++u) {
        const double share = cell.budget_mw[u] / static_cast<double>(B * K);
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t k = 0; k < K; ++k) p0(u, b, k) = share;
        }
    }
    if (U == 0) {
        ContinuousResult res;
        res.power.p = std::move(p0);
        res.coeffs = std::move(start);
        res.converged = true;
        return res;
    }
    const std::vector<std::uint8_t> active(U * B * K, 1);
    return detail::run_sca(cell, active, std::move(start), std::move(p0), variant, opts);
}

}  // namespace

ContinuousResult continuous_allocate_dual(const CellProblem& cell, const SolverOptions& opts) {
    return continuous_allocate(cell, opts, detail::Variant::dual);
}

ContinuousResult continuous_allocate_fast(const CellProblem& cell, const SolverOptions& opts) {
    return continuous_allocate(cell, opts, detail::Variant::fast);
}

KktResiduals kkt_residuals(const CellProblem& cell, const Tensor3<double>& alpha, const PowerAllocation& power,
                           std::span<const double> lambda, const SolverOptions& opts) {
    const std::size_t U = cell.n_users(), B = cell.n_bss(), K = cell.n_bands();
    if (lambda.size() != U) throw std::invalid_argument("kkt_residuals: one multiplier per user required");
    const auto price = detail::interference_price(cell, alpha, power.p);
    KktResiduals r;
    for (std::size_t u = 0; u < U; ++u) {
        const double budget = cell.budget_mw[u];
        const double floor = opts.p_floor_rel * budget;
        double total = 0.0;
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t k = 0; k < K; ++k) {
                const double p = power.p(u, b, k);
                total += p;
                r.feasibility = std::max(r.feasibility, -p / budget);
                if (alpha(u, b, k) <= 0.0) continue;
                const double w = cell.band_width_hz[k];
                const double denom = lambda[u] * std::numbers::ln2 + w * price(u, b, k);
                const double image = denom > 0.0 ? std::max(floor, w * alpha(u, b, k) / denom)
                                                 : std::numeric_limits<double>::infinity();
                r.stationarity = std::max(r.stationarity, std::abs(image - p) / std::max(image, p));
            }
        }
        r.feasibility = std::max(r.feasibility, (total - budget) / budget);
        if (lambda[u] > 0.0) r.slackness = std::max(r.slackness, std::abs(total - budget) / budget);
    }
    return r;
}

std::pair<ChannelAssignment, PowerAllocation> consolidate(const CellProblem& cell, const PowerAllocation& power) {
    const std::size_t U = cell.n_users(), B = cell.n_bss(), K = cell.n_bands();
    const auto f = detail::compute_field(cell, power.p);
    auto gamma = ChannelAssignment::zeros(cell);
    auto out = PowerAllocation::zeros(cell);
    for (std::size_t u = 0; u < U; ++u) {
        for (std::size_t k = 0; k < K; ++k) {
            const double total = f.band_power(u, k);
            if (!(total > 0.0)) continue;
            // Band totals do not move, so every candidate sees the same interference field.
            std::size_t best = B;
            double best_sinr = -1.0;
            for (std::size_t b = 0; b < B; ++b) {
                if (!(power.p(u, b, k) > 0.0)) continue;
                const double z = cell.gain(u, b, k) * total /
                                 (cell.noise_mw(b, k) + detail::other_user_interference(cell, f, u, b, k));
                if (z > best_sinr) {
                    best_sinr = z;
                    best = b;
                }
            }
            gamma.gamma(u, best, k) = 1;
            out.p(u, best, k) = total;
        }
    }
    return {std::move(gamma), std::move(out)};
}

}  // namespace vcell::ic
