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

#include <optional>
#include <vector>

#include "vcell/tensor.hpp"

namespace vcell::ic {

/// Maximum-weight one-to-one assignment of rows to columns (Kuhn-Munkres
/// with potentials, O(n^3)). Rectangular input is padded with zero-weight
/// dummies; a row matched to a dummy column is reported as std::nullopt.
/// Throws std::invalid_argument on non-finite weights.
std::vector<std::optional<std::size_t>> hungarian_max(const Grid2<double>& weights);

}  // namespace vcell::ic
