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
#include <cstdlib>
#include <stdexcept>

#include "vcell/harness.hpp"

namespace vcell::harness {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::size_t parse_count(const std::string& text, const std::string& what) {
    char* end = nullptr;
    const long long v = std::strtoll(text.c_str(), &end, 10);
    if (end == text.c_str() || *end != '\0' || v < 0) {
        throw std::invalid_argument(what + ": '" + text + "' is not a nonnegative integer");
    }
    return static_cast<std::size_t>(v);
}

// "1-15" or "1,2,15" or a mix.
std::vector<std::size_t> parse_v_list(const std::vector<std::string>& items) {
    std::vector<std::size_t> out;
    for (const auto& raw : items) {
        const auto item = trim(raw);
        const auto dash = item.find('-');
        if (dash == std::string::npos) {
            out.push_back(parse_count(item, "v_list"));
            continue;
        }
        const auto lo = parse_count(trim(item.substr(0, dash)), "v_list");
        const auto hi = parse_count(trim(item.substr(dash + 1)), "v_list");
        if (lo > hi) throw std::invalid_argument("v_list: empty range '" + item + "'");
        for (std::size_t v = lo; v <= hi; ++v) out.push_back(v);
    }
    return out;
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
    return out;
}

bool parse_bool(const std::string& text, const std::string& key) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw std::invalid_argument(key + ": expected true or false, got '" + text + "'");
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string ClusteringMethod::id() const {
    switch (kind) {
        case MethodKind::hierarchical: return "hierarchical";
        case MethodKind::kmeans: return "kmeans";
        case MethodKind::spectral: return "spectral:" + sigma_text;
    }
    return "?";
}

std::string ClusteringMethod::label() const {
    switch (kind) {
        case MethodKind::hierarchical: return "Hierarchical";
        case MethodKind::kmeans: return "K-means";
        case MethodKind::spectral: {
            if (sigma_text.rfind("sqrt", 0) == 0) return "Spectral clustering σ=√" + sigma_text.substr(4);
            return "Spectral clustering σ=" + sigma_text;
        }
    }
    return "?";
}

ClusteringMethod ClusteringMethod::parse(const std::string& raw) {
    const auto token = trim(raw);
    if (token == "hierarchical") return {MethodKind::hierarchical, 0.0, ""};
    if (token == "kmeans") return {MethodKind::kmeans, 0.0, ""};
    if (token.rfind("spectral:", 0) == 0) {
        ClusteringMethod m{MethodKind::spectral, 0.0, token.substr(9)};
        std::string value = m.sigma_text;
        const bool root = value.rfind("sqrt", 0) == 0;
        if (root) value = value.substr(4);
        char* end = nullptr;
        const double x = std::strtod(value.c_str(), &end);
        if (value.empty() || *end != '\0' || !(x > 0.0) || !std::isfinite(x)) {
            throw std::invalid_argument("spectral sigma must be a positive number or sqrt<number>, got '" +
                                        m.sigma_text + "'");
        }
        m.sigma = root ? std::sqrt(x) : x;
        return m;
    }
    throw std::invalid_argument("unknown clustering method '" + token +
                                "' (expected hierarchical, kmeans or spectral:<sigma>)");
}

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::continuous: return "continuous";
        case Scheme::uc: return "UC";
        case Scheme::bsc: return "BSC";
        case Scheme::msrm: return "MSRM";
        case Scheme::jd: return "JD";
    }
    return "?";
}

Scheme parse_scheme(const std::string& raw) {
    const auto name = trim(raw);
    if (name == "continuous") return Scheme::continuous;
    if (name == "UC") return Scheme::uc;
    if (name == "BSC") return Scheme::bsc;
    if (name == "MSRM") return Scheme::msrm;
    if (name == "JD") return Scheme::jd;
    throw std::invalid_argument("unknown scheme '" + name + "' (expected continuous, UC, BSC, MSRM or JD)");
}

std::string scheme_label(Scheme s) { return s == Scheme::continuous ? "Continuous" : to_string(s); }

bool is_sud(Scheme s) { return s != Scheme::jd; }

std::string rule_label(cluster::AffiliationRule rule) {
    return rule == cluster::AffiliationRule::best_channel ? "best channel" : "closest BS";
}

std::string series_label(const ClusteringMethod& method, const std::string& scheme, cluster::AffiliationRule rule) {
    return method.label() + " - " + scheme + " - " + rule_label(rule);
}

ExperimentConfig ExperimentConfig::defaults() {
    ExperimentConfig c;
    for (std::size_t v = 1; v <= c.scenario.n_bs; ++v) c.v_list.push_back(v);
    c.methods = {ClusteringMethod::parse("hierarchical"), ClusteringMethod::parse("kmeans"),
                 ClusteringMethod::parse("spectral:sqrt2000"), ClusteringMethod::parse("spectral:2000")};
    c.rules = {cluster::AffiliationRule::best_channel, cluster::AffiliationRule::closest_bs};
    c.schemes = {Scheme::continuous, Scheme::uc, Scheme::bsc, Scheme::msrm, Scheme::jd};
    return c;
}

void ExperimentConfig::validate() const {
    scenario.validate();
    solver.validate();
    comp.validate();
    if (realizations < 1) throw std::invalid_argument("realizations must be >= 1");
    if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
    if (v_list.empty()) throw std::invalid_argument("v_list is empty");
    for (auto v : v_list) {
        if (v < 1 || v > scenario.n_bs) {
            throw std::invalid_argument("v_list entry " + std::to_string(v) + " outside [1, n_bs]");
        }
    }
    if (methods.empty()) throw std::invalid_argument("methods is empty");
    if (rules.empty()) throw std::invalid_argument("rules is empty");
    if (schemes.empty()) throw std::invalid_argument("schemes is empty");
}

ExperimentConfig ExperimentConfig::from_kv(const KeyValueFile& kv) {
    ExperimentConfig c = defaults();
    c.scenario = netgen::ScenarioConfig::from_kv(kv);
    c.v_list.clear();
    for (std::size_t v = 1; v <= c.scenario.n_bs; ++v) c.v_list.push_back(v);
    c.solver = ic::SolverOptions::from_kv(kv);
    c.comp.tol = kv.get_double("comp_tol", c.comp.tol);
    c.comp.max_sweeps = static_cast<int>(kv.get_int("comp_max_sweeps", c.comp.max_sweeps));
    c.realizations = static_cast<std::size_t>(kv.get_uint64("realizations", c.realizations));
    c.jobs = static_cast<std::size_t>(kv.get_uint64("jobs", c.jobs));
    if (kv.contains("v_list")) c.v_list = parse_v_list(kv.get_list("v_list", {}));
    if (kv.contains("methods")) {
        c.methods.clear();
        for (const auto& m : kv.get_list("methods", {})) c.methods.push_back(ClusteringMethod::parse(m));
    }
    if (kv.contains("rules")) {
        c.rules.clear();
        for (const auto& r : kv.get_list("rules", {})) c.rules.push_back(cluster::parse_affiliation_rule(trim(r)));
    }
    if (kv.contains("schemes")) {
        c.schemes.clear();
        for (const auto& s : kv.get_list("schemes", {})) c.schemes.push_back(parse_scheme(s));
    }
    if (kv.contains("intercell_interference")) {
        c.intercell_interference = parse_bool(kv.get_string("intercell_interference", "true"), "intercell_interference");
    }
    const auto unused = kv.unused_keys();
    if (!unused.empty()) throw std::invalid_argument("unknown config key '" + unused.front() + "'");
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) { return from_kv(KeyValueFile::load(path)); }

KeyValueFile ExperimentConfig::to_kv() const {
    KeyValueFile kv;
    scenario.to_kv(kv);
    solver.to_kv(kv);
    kv.set("comp_tol", num(comp.tol));
    kv.set("comp_max_sweeps", std::to_string(comp.max_sweeps));
    kv.set("realizations", std::to_string(realizations));
    kv.set("jobs", std::to_string(jobs));
    std::vector<std::string> parts;
    for (auto v : v_list) parts.push_back(std::to_string(v));
    kv.set("v_list", join(parts));
    parts.clear();
    for (const auto& m : methods) parts.push_back(m.id());
    kv.set("methods", join(parts));
    parts.clear();
    for (auto r : rules) parts.push_back(cluster::to_string(r));
    kv.set("rules", join(parts));
    parts.clear();
    for (auto s : schemes) parts.push_back(to_string(s));
    kv.set("schemes", join(parts));
    kv.set("intercell_interference", intercell_interference ? "true" : "false");
    return kv;
}

}  // namespace vcell::harness
