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
#include "vcell/linalg.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vcell::linalg {

namespace {

void require_hermitian(const CMatrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw std::domain_error("expected a nonempty square matrix");
    }
    const double scale = m.cwiseAbs().maxCoeff();
    if (!std::isfinite(scale)) throw std::domain_error("matrix has non-finite entries");
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw std::domain_error("matrix is not Hermitian");
    }
}

}  // namespace

Eigen::LLT<CMatrix> factor_hpd(const CMatrix& m) {
    require_hermitian(m);
    Eigen::LLT<CMatrix> llt(m);
    if (llt.info() != Eigen::Success) throw std::domain_error("matrix is not positive definite");
    return llt;
}

double hermitian_logdet(const CMatrix& m) {
    const auto llt = factor_hpd(m);
    const auto& l = llt.matrixLLT();
    double s = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) s += std::log2(l(i, i).real());
    return 2.0 * s;
}

double effective_gain(const CVector& h, const Eigen::LLT<CMatrix>& factor) {
    if (h.size() != factor.rows()) throw std::invalid_argument("effective_gain: dimension mismatch");
    const CVector x = factor.solve(h);
    return std::max(0.0, h.dot(x).real());
}

double effective_gain(const CVector& h, const CMatrix& m) { return effective_gain(h, factor_hpd(m)); }

}  // namespace vcell::linalg
