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
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "vcell/harness.hpp"

namespace vcell::harness {

namespace {

constexpr const char* kCsvHeader = "V,method,rule,scheme,mean_bps,stderr_bps,n";

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double to_double(const std::string& text, const std::string& where) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || *end != '\0') throw std::runtime_error(where + ": bad number '" + text + "'");
    return v;
}

std::size_t to_size(const std::string& text, const std::string& where) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
    if (text.empty() || *end != '\0') throw std::runtime_error(where + ": bad integer '" + text + "'");
    return static_cast<std::size_t>(v);
}

struct Series {
    std::string label;
    std::vector<const ReportRow*> points;
};

struct Figure {
    std::string file;
    std::string title;
    std::vector<Series> series;
};

}  // namespace

void write_csv(const Report& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "# " << kReportVersion << "\n" << kCsvHeader << "\n";
    for (const auto& r : report.rows) {
        out << r.v << ',' << r.method << ',' << r.rule << ',' << r.scheme << ',' << num(r.mean_bps) << ','
            << num(r.stderr_bps) << ',' << r.n << "\n";
    }
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

Report read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    Report report;
    std::string line;
    int line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = path + ":" + std::to_string(line_no);
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line_no == 1) report.metadata["version"] = line.substr(line.find_first_not_of("# "));
            continue;
        }
        if (!header) {
            if (line != kCsvHeader) throw std::runtime_error(where + ": unexpected header '" + line + "'");
            header = true;
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 7) throw std::runtime_error(where + ": expected 7 fields");
        ReportRow r;
        r.v = to_size(f[0], where);
        r.method = f[1];
        r.rule = f[2];
        r.scheme = f[3];
        r.mean_bps = to_double(f[4], where);
        r.stderr_bps = to_double(f[5], where);
        r.n = to_size(f[6], where);
        report.rows.push_back(std::move(r));
    }
    if (!header) throw std::runtime_error(path + ": missing header line");
    return report;
}

std::vector<std::string> emit_plot_data(const Report& report, const ExperimentConfig& cfg, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create '" + dir + "': " + ec.message());

    auto series_for = [&](const ClusteringMethod& m, const std::string& scheme, cluster::AffiliationRule rule,
                          const std::string& shown) {
        Series s{series_label(m, shown, rule), {}};
        for (auto v : cfg.v_list) {
            if (const auto* row = report.find(v, m.id(), cluster::to_string(rule), scheme)) s.points.push_back(row);
        }
        return s;
    };

    // The proposed clustering is the reference for the per-scheme figures.
    const ClusteringMethod* reference = &cfg.methods.front();
    for (const auto& m : cfg.methods) {
        if (m.kind == MethodKind::hierarchical) {
            reference = &m;
            break;
        }
    }

    std::vector<Figure> figures;
    Figure sud{"sud_schemes.dat", "Interference coordination: sum rate per scheme", {}};
    Figure jd{"joint_decoding.dat", "Joint decoding: sum rate per affiliation rule", {}};
    Figure models{"cooperation_models.dat", "Joint decoding vs best single-user decoding", {}};
    Figure clus_sud{"clustering_sud.dat", "Clustering methods, best single-user decoding scheme", {}};
    Figure clus_jd{"clustering_jd.dat", "Clustering methods, joint decoding", {}};
    for (auto rule : cfg.rules) {
        for (auto s : cfg.schemes) {
            if (is_sud(s)) sud.series.push_back(series_for(*reference, to_string(s), rule, scheme_label(s)));
        }
        jd.series.push_back(series_for(*reference, "JD", rule, "JD"));
        models.series.push_back(series_for(*reference, "JD", rule, "JD"));
        models.series.push_back(series_for(*reference, kMaxSud, rule, kMaxSud));
        for (const auto& m : cfg.methods) {
            clus_sud.series.push_back(series_for(m, kMaxSud, rule, kMaxSud));
            clus_jd.series.push_back(series_for(m, "JD", rule, "JD"));
        }
    }
    for (auto* f : {&sud, &jd, &models, &clus_sud, &clus_jd}) {
        std::erase_if(f->series, [](const Series& s) { return s.points.empty(); });
        if (!f->series.empty()) figures.push_back(std::move(*f));
    }

    std::vector<std::string> written;
    for (const auto& fig : figures) {
        const auto path = (std::filesystem::path(dir) / fig.file).string();
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
        out << "# " << kReportVersion << "\n# title: " << fig.title << "\n# columns: V mean_bps stderr_bps\n";
        for (const auto& s : fig.series) {
            out << "\n\n# series: " << s.label << "\n";
            for (const auto* row : s.points) out << row->v << ' ' << num(row->mean_bps) << ' ' << num(row->stderr_bps) << "\n";
        }
        if (!out) throw std::runtime_error("write to '" + path + "' failed");
        written.push_back(path);
    }

    const auto script = (std::filesystem::path(dir) / "plot_figures.py").string();
    std::ofstream py(script);
    if (!py) throw std::runtime_error("cannot open '" + script + "' for writing");
    py << R"PY(#!/usr/bin/env python3
# Generated by vcell. Plots every *.dat file in this directory to a PNG.
import glob
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_series(path):
    title, series = os.path.basename(path), []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("# title:"):
                title = line[len("# title:"):].strip()
            elif line.startswith("# series:"):
                series.append((line[len("# series:"):].strip(), [], [], []))
            elif line and not line.startswith("#"):
                v, mean, err = line.split()
                series[-1][1].append(int(v))
                series[-1][2].append(float(mean) / 1e6)
                series[-1][3].append(float(err) / 1e6)
    return title, series


def main(directory):
    for path in sorted(glob.glob(os.path.join(directory, "*.dat"))):
        title, series = read_series(path)
        fig, ax = plt.subplots(figsize=(7, 5))
        for label, v, mean, err in series:
            ax.errorbar(v, mean, yerr=err, marker="o", capsize=2, label=label)
        ax.set_xlabel("number of virtual cells")
        ax.set_ylabel("average system sum rate [Mbit/s]")
        ax.set_title(title)
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=7)
        fig.tight_layout()
        fig.savefig(os.path.splitext(path)[0] + ".png", dpi=150)
        plt.close(fig)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.abspath(__file__)))
)PY";
    if (!py) throw std::runtime_error("write to '" + script + "' failed");
    written.push_back(script);
    return written;
}

}  // namespace vcell::harness
