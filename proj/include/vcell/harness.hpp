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
#include <map>
#include <string>
#include <vector>

#include "vcell/cluster.hpp"
#include "vcell/comp_alloc.hpp"
#include "vcell/ic_alloc.hpp"
#include "vcell/kvfile.hpp"
#include "vcell/netgen.hpp"

/// Monte Carlo driver: sweeps cluster counts, clustering methods,
/// affiliation rules and allocation schemes over seeded network drops.
namespace vcell::harness {

enum class MethodKind { hierarchical, kmeans, spectral };

struct ClusteringMethod {
    MethodKind kind = MethodKind::hierarchical;
    double sigma = 0.0;          // spectral only
    std::string sigma_text;      // as written in the config, e.g. "sqrt2000"

    /// Config / CSV token: hierarchical, kmeans, spectral:<sigma_text>.
    std::string id() const;
    /// Legend text, e.g. "Spectral clustering σ=√2000".
    std::string label() const;
    static ClusteringMethod parse(const std::string& token);

    friend bool operator==(const ClusteringMethod& a, const ClusteringMethod& b) { return a.id() == b.id(); }
};

enum class Scheme { continuous, uc, bsc, msrm, jd };

std::string to_string(Scheme s);  // continuous, UC, BSC, MSRM, JD
Scheme parse_scheme(const std::string& name);
std::string scheme_label(Scheme s);  // Continuous, UC, BSC, MSRM, JD
bool is_sud(Scheme s);

/// CSV scheme name of the derived best-of-SUD row.
inline constexpr const char* kMaxSud = "Max SUD";

std::string rule_label(cluster::AffiliationRule rule);  // "best channel", "closest BS"

struct ExperimentConfig {
    netgen::ScenarioConfig scenario;
    std::size_t realizations = 10;
    std::vector<std::size_t> v_list;
    std::vector<ClusteringMethod> methods;
    std::vector<cluster::AffiliationRule> rules;
    std::vector<Scheme> schemes;
    ic::SolverOptions solver;
    comp::CompOptions comp;
    // Achieved rates count interference from the other virtual cells'
    // allocations; the per-cell optimizations never see it.
    bool intercell_interference = true;
    std::size_t jobs = 1;

    /// Defaults: V = 1..n_bs, every method, both rules, every scheme.
    static ExperimentConfig defaults();
    void validate() const;

    /// Flat keys; see README. Unknown keys are rejected.
    static ExperimentConfig from_kv(const KeyValueFile& kv);
    static ExperimentConfig load(const std::string& path);
    KeyValueFile to_kv() const;
};

/// System sum rate of one (V, method, rule, scheme) combination in one drop.
struct Outcome {
    std::size_t v = 0;
    std::size_t method = 0;  // index into cfg.methods
    std::size_t rule = 0;    // index into cfg.rules
    Scheme scheme = Scheme::jd;
    double system_rate = 0.0;
    std::vector<double> cell_rates;  // per virtual cell, summing to system_rate
    std::size_t flagged_cells = 0;   // cells whose solver hit an iteration cap
};

struct RealizationResult {
    std::vector<Outcome> outcomes;  // in (v, method, rule, scheme) order of the config
};

/// Seed of realization r.
std::uint64_t realization_seed(const ExperimentConfig& cfg, std::size_t r);

/// Solves every swept combination on one scenario. `seed` drives the
/// randomized clustering baselines.
RealizationResult evaluate_realization(const netgen::NetworkScenario& scenario, const ExperimentConfig& cfg,
                                       std::uint64_t seed);

struct ReportRow {
    std::size_t v = 0;
    std::string method;  // ClusteringMethod::id()
    std::string rule;    // to_string(AffiliationRule)
    std::string scheme;  // to_string(Scheme) or kMaxSud
    double mean_bps = 0.0;
    double stderr_bps = 0.0;
    std::size_t n = 0;
    std::size_t flagged = 0;      // realizations with at least one flagged cell
    std::vector<double> samples;  // per realization, in realization order (not written to CSV)

    friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct Report {
    std::vector<ReportRow> rows;
    std::map<std::string, std::string> metadata;

    const ReportRow* find(std::size_t v, const std::string& method, const std::string& rule,
                          const std::string& scheme) const;

    friend bool operator==(const Report&, const Report&) = default;
};

/// Version tag written into reports and CSV headers.
inline constexpr const char* kReportVersion = "vcell-report v1";

/// Runs all realizations on cfg.jobs worker threads. The result does not
/// depend on the number of workers.
Report run_experiment(const ExperimentConfig& cfg);

/// Aggregates per-realization results (index = realization).
Report aggregate(const ExperimentConfig& cfg, const std::vector<RealizationResult>& results);

void write_csv(const Report& report, const std::string& path);
/// Reads back the CSV rows; samples and metadata are not stored in the CSV.
Report read_csv(const std::string& path);

/// Writes one data file per figure plus a plotting script stub into `dir`.
/// Returns the paths written.
std::vector<std::string> emit_plot_data(const Report& report, const ExperimentConfig& cfg, const std::string& dir);

/// "Hierarchical - JD - best channel".
std::string series_label(const ClusteringMethod& method, const std::string& scheme, cluster::AffiliationRule rule);

/// Sum with pairwise splitting; order-fixed, so results are reproducible.
double pairwise_sum(const std::vector<double>& v);

}  // namespace vcell::harness
