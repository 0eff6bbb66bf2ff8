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
#include <iosfwd>
#include <string>
#include <vector>

#include "vcell/kvfile.hpp"
#include "vcell/tensor.hpp"

namespace vcell::netgen {

/// SplitMix64 finalizer; used to derive independent seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of sub-stream `index` of a base seed. Distinct indices give
/// statistically independent mt19937_64 streams.
std::uint64_t substream_seed(std::uint64_t base, std::uint64_t index);

struct ScenarioConfig {
    std::size_t n_bs = 15;
    std::size_t n_users = 100;
    double side_m = 2000.0;
    std::size_t n_bands = 8;
    double band_width_hz = 20e3;
    double carrier_mhz = 1800.0;  // informational; the path-loss law has no frequency term
    double noise_psd_dbm_hz = -174.0;
    double max_power_dbm = 23.0;
    double shadow_std_db = 8.0;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;

    static ScenarioConfig from_kv(const KeyValueFile& kv);
    void to_kv(KeyValueFile& kv) const;
};

/// One drop of the network: geometry plus the full channel tensor.
/// All powers are linear milliwatts.
struct NetworkScenario {
    std::vector<Point> bs_pos;
    std::vector<Point> user_pos;
    Tensor3<cplx> h;                  // (user, bs, band)
    Grid2<double> noise_mw;           // (bs, band)
    std::vector<double> band_width_hz;  // per band
    std::vector<double> max_power_mw;   // per user

    std::size_t n_bs() const { return bs_pos.size(); }
    std::size_t n_users() const { return user_pos.size(); }
    std::size_t n_bands() const { return band_width_hz.size(); }

    /// Throws std::invalid_argument if dimensions disagree or powers are not positive.
    void validate() const;

    friend bool operator==(const NetworkScenario&, const NetworkScenario&) = default;
};

/// 35 log10(d) + 34 dB, d in meters.
double path_loss_db(double distance_m);
double dbm_to_mw(double dbm);
/// Thermal noise power of a band of width `bw_hz` at density `psd_dbm_hz`.
double band_noise_mw(double psd_dbm_hz, double bw_hz);

/// Links closer than this are evaluated at this distance.
inline constexpr double kMinLinkDistanceM = 1.0;

/// Uniform drop on [0, side]^2, per-link log-normal shadowing shared by all
/// bands, i.i.d. Rayleigh fading per (user, bs, band). Pure in `cfg`.
NetworkScenario generate_scenario(const ScenarioConfig& cfg);

/// Text tensor format, see README. Values are written as hex floats so a
/// dump/load round trip is bit exact.
void write_scenario(std::ostream& out, const NetworkScenario& s);
NetworkScenario read_scenario(std::istream& in);
void save_scenario(const std::string& path, const NetworkScenario& s);
NetworkScenario load_scenario(const std::string& path);

}  // namespace vcell::netgen
