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
#include "vcell/netgen.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace vcell::netgen {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(splitmix64(base) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

void ScenarioConfig::validate() const {
    if (n_bs < 1) throw std::invalid_argument("n_bs must be >= 1");
    if (n_users < 1) throw std::invalid_argument("n_users must be >= 1");
    if (n_bands < 1) throw std::invalid_argument("n_bands must be >= 1");
    if (!(side_m > 0.0)) throw std::invalid_argument("side_m must be > 0");
    if (!(band_width_hz > 0.0)) throw std::invalid_argument("band_width_hz must be > 0");
    if (!(shadow_std_db >= 0.0)) throw std::invalid_argument("shadow_std_db must be >= 0");
    if (!std::isfinite(noise_psd_dbm_hz) || !std::isfinite(max_power_dbm)) {
        throw std::invalid_argument("noise_psd_dbm_hz and max_power_dbm must be finite");
    }
}

ScenarioConfig ScenarioConfig::from_kv(const KeyValueFile& kv) {
    ScenarioConfig c;
    auto count = [&](const char* key, std::size_t fallback) {
        const auto v = kv.get_int(key, static_cast<std::int64_t>(fallback));
        if (v < 1) throw std::invalid_argument(std::string(key) + " must be >= 1");
        return static_cast<std::size_t>(v);
    };
    c.n_bs = count("n_bs", c.n_bs);
    c.n_users = count("n_users", c.n_users);
    c.n_bands = count("n_bands", c.n_bands);
    c.side_m = kv.get_double("side_m", c.side_m);
    c.band_width_hz = kv.get_double("band_width_hz", c.band_width_hz);
    c.carrier_mhz = kv.get_double("carrier_mhz", c.carrier_mhz);
    c.noise_psd_dbm_hz = kv.get_double("noise_psd_dbm_hz", c.noise_psd_dbm_hz);
    c.max_power_dbm = kv.get_double("max_power_dbm", c.max_power_dbm);
    c.shadow_std_db = kv.get_double("shadow_std_db", c.shadow_std_db);
    c.seed = kv.get_uint64("seed", c.seed);
    c.validate();
    return c;
}

void ScenarioConfig::to_kv(KeyValueFile& kv) const {
    auto num = [](double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    };
    kv.set("n_bs", std::to_string(n_bs));
    kv.set("n_users", std::to_string(n_users));
    kv.set("n_bands", std::to_string(n_bands));
    kv.set("side_m", num(side_m));
    kv.set("band_width_hz", num(band_width_hz));
    kv.set("carrier_mhz", num(carrier_mhz));
    kv.set("noise_psd_dbm_hz", num(noise_psd_dbm_hz));
    kv.set("max_power_dbm", num(max_power_dbm));
    kv.set("shadow_std_db", num(shadow_std_db));
    kv.set("seed", std::to_string(seed));
}

void NetworkScenario::validate() const {
    const auto nb = n_bs(), nu = n_users(), nk = n_bands();
    if (nb == 0 || nu == 0 || nk == 0) throw std::invalid_argument("scenario has an empty dimension");
    if (h.dim0() != nu || h.dim1() != nb || h.dim2() != nk) {
        throw std::invalid_argument("channel tensor shape does not match counts");
    }
    if (noise_mw.rows() != nb || noise_mw.cols() != nk) {
        throw std::invalid_argument("noise matrix shape does not match counts");
    }
    if (max_power_mw.size() != nu) throw std::invalid_argument("max_power_mw size does not match n_users");
    for (double n : noise_mw.flat()) {
        if (!(n > 0.0)) throw std::invalid_argument("noise power must be > 0");
    }
    for (double p : max_power_mw) {
        if (!(p > 0.0)) throw std::invalid_argument("max power must be > 0");
    }
    for (double w : band_width_hz) {
        if (!(w > 0.0)) throw std::invalid_argument("band width must be > 0");
    }
}

double path_loss_db(double distance_m) {
    if (!(distance_m > 0.0)) {
        throw std::domain_error("path_loss_db: distance must be > 0");
    }
    return 35.0 * std::log10(distance_m) + 34.0;
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

double band_noise_mw(double psd_dbm_hz, double bw_hz) {
    if (!(bw_hz > 0.0)) {
        throw std::domain_error("band_noise_mw: bandwidth must be > 0");
    }
    return dbm_to_mw(psd_dbm_hz + 10.0 * std::log10(bw_hz));
}

NetworkScenario generate_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> coord(0.0, cfg.side_m);
    std::normal_distribution<double> gauss(0.0, 1.0);

    NetworkScenario s;
    s.bs_pos.resize(cfg.n_bs);
    s.user_pos.resize(cfg.n_users);
    for (auto& p : s.bs_pos) {
        p.x = coord(rng);
        p.y = coord(rng);
    }
    for (auto& p : s.user_pos) {
        p.x = coord(rng);
        p.y = coord(rng);
    }

    Grid2<double> shadow_db(cfg.n_users, cfg.n_bs);
    for (double& v : shadow_db.flat()) {
        v = cfg.shadow_std_db * gauss(rng);
    }

    s.h = Tensor3<cplx>(cfg.n_users, cfg.n_bs, cfg.n_bands);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (std::size_t u = 0; u < cfg.n_users; ++u) {
        for (std::size_t b = 0; b < cfg.n_bs; ++b) {
            const double d = std::max(distance(s.user_pos[u], s.bs_pos[b]), kMinLinkDistanceM);
            const double mean_gain_db = -path_loss_db(d) + shadow_db(u, b);
            const double amplitude = std::pow(10.0, mean_gain_db / 20.0);
            for (std::size_t k = 0; k < cfg.n_bands; ++k) {
                const double re = gauss(rng) * inv_sqrt2;
                const double im = gauss(rng) * inv_sqrt2;
                s.h(u, b, k) = amplitude * cplx(re, im);
            }
        }
    }

    s.noise_mw = Grid2<double>(cfg.n_bs, cfg.n_bands, band_noise_mw(cfg.noise_psd_dbm_hz, cfg.band_width_hz));
    s.band_width_hz.assign(cfg.n_bands, cfg.band_width_hz);
    s.max_power_mw.assign(cfg.n_users, dbm_to_mw(cfg.max_power_dbm));
    return s;
}

// --- text tensor format -----------------------------------------------------

namespace {

constexpr const char* kMagic = "vcell-scenario";
constexpr int kVersion = 1;

std::string hex(double v) {
    std::ostringstream os;
    os << std::hexfloat << v;
    return os.str();
}

// operator>> cannot parse hex floats portably, strtod can.
double parse_double(std::istream& in, const char* what) {
    std::string tok;
    if (!(in >> tok)) {
        throw std::runtime_error(std::string("scenario file: missing ") + what);
    }
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) {
        throw std::runtime_error(std::string("scenario file: bad number for ") + what + ": '" + tok + "'");
    }
    return v;
}

void expect(std::istream& in, const std::string& word) {
    std::string tok;
    if (!(in >> tok) || tok != word) {
        throw std::runtime_error("scenario file: expected '" + word + "', got '" + tok + "'");
    }
}

std::size_t parse_count(std::istream& in, const std::string& word) {
    expect(in, word);
    long long v = -1;
    if (!(in >> v) || v < 1) {
        throw std::runtime_error("scenario file: bad count for " + word);
    }
    return static_cast<std::size_t>(v);
}

}  // namespace

void write_scenario(std::ostream& out, const NetworkScenario& s) {
    out << kMagic << ' ' << kVersion << '\n';
    out << "n_bs " << s.n_bs() << "\nn_users " << s.n_users() << "\nn_bands " << s.n_bands() << '\n';
    out << "band_width_hz";
    for (double w : s.band_width_hz) out << ' ' << hex(w);
    out << "\nmax_power_mw";
    for (double p : s.max_power_mw) out << ' ' << hex(p);
    out << '\n';
    for (const auto& p : s.bs_pos) out << "bs " << hex(p.x) << ' ' << hex(p.y) << '\n';
    for (const auto& p : s.user_pos) out << "user " << hex(p.x) << ' ' << hex(p.y) << '\n';
    for (std::size_t b = 0; b < s.n_bs(); ++b) {
        out << "noise";
        for (std::size_t k = 0; k < s.n_bands(); ++k) out << ' ' << hex(s.noise_mw(b, k));
        out << '\n';
    }
    for (std::size_t u = 0; u < s.n_users(); ++u) {
        for (std::size_t b = 0; b < s.n_bs(); ++b) {
            out << "h";
            for (std::size_t k = 0; k < s.n_bands(); ++k) {
                out << ' ' << hex(s.h(u, b, k).real()) << ' ' << hex(s.h(u, b, k).imag());
            }
            out << '\n';
        }
    }
    out << "end\n";
}

NetworkScenario read_scenario(std::istream& in) {
    expect(in, kMagic);
    int version = 0;
    if (!(in >> version) || version != kVersion) {
        throw std::runtime_error("scenario file: unsupported version");
    }
    const auto nb = parse_count(in, "n_bs");
    const auto nu = parse_count(in, "n_users");
    const auto nk = parse_count(in, "n_bands");

    NetworkScenario s;
    expect(in, "band_width_hz");
    for (std::size_t k = 0; k < nk; ++k) s.band_width_hz.push_back(parse_double(in, "band_width_hz"));
    expect(in, "max_power_mw");
    for (std::size_t u = 0; u < nu; ++u) s.max_power_mw.push_back(parse_double(in, "max_power_mw"));
    for (std::size_t b = 0; b < nb; ++b) {
        expect(in, "bs");
        const double x = parse_double(in, "bs x");
        s.bs_pos.push_back({x, parse_double(in, "bs y")});
    }
    for (std::size_t u = 0; u < nu; ++u) {
        expect(in, "user");
        const double x = parse_double(in, "user x");
        s.user_pos.push_back({x, parse_double(in, "user y")});
    }
    s.noise_mw = Grid2<double>(nb, nk);
    for (std::size_t b = 0; b < nb; ++b) {
        expect(in, "noise");
        for (std::size_t k = 0; k < nk; ++k) s.noise_mw(b, k) = parse_double(in, "noise");
    }
    s.h = Tensor3<cplx>(nu, nb, nk);
    for (std::size_t u = 0; u < nu; ++u) {
        for (std::size_t b = 0; b < nb; ++b) {
            expect(in, "h");
            for (std::size_t k = 0; k < nk; ++k) {
                const double re = parse_double(in, "h re");
                s.h(u, b, k) = cplx(re, parse_double(in, "h im"));
            }
        }
    }
    expect(in, "end");
    s.validate();
    return s;
}

void save_scenario(const std::string& path, const NetworkScenario& s) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write scenario file '" + path + "'");
    write_scenario(out, s);
    if (!out) throw std::runtime_error("error while writing scenario file '" + path + "'");
}

NetworkScenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file '" + path + "'");
    return read_scenario(in);
}

}  // namespace vcell::netgen
