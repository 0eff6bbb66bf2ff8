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

#include <Eigen/Dense>

namespace vcell::linalg {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// log2 det(M) of a Hermitian positive definite matrix, via Cholesky.
/// Throws std::domain_error if M is not Hermitian or the factorization fails.
double hermitian_logdet(const CMatrix& m);

/// h^H M^{-1} h for Hermitian PD M, from a Cholesky solve.
double effective_gain(const CVector& h, const CMatrix& m);

/// Same, reusing a factorization.
double effective_gain(const CVector& h, const Eigen::LLT<CMatrix>& factor);

/// Cholesky factor of a Hermitian PD matrix; throws std::domain_error otherwise.
Eigen::LLT<CMatrix> factor_hpd(const CMatrix& m);

}  // namespace vcell::linalg
