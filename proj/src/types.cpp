// SPDX-License-Identifier: Apache-2.0
//
// gee-precoder: energy-efficient MIMO precoding under imperfect CSI
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "geeprec/types.hpp"

#include <cmath>

namespace geeprec {

void SystemConfig::validate() const
{
    if (K < 1)
        throw ConfigError("K must be at least 1");
    if (M < 1 || N < 1)
        throw ConfigError("antenna counts must be positive");
    if (d < 1 || d > std::min(M, N))
        throw ConfigError("d must satisfy 1 <= d <= min(M, N)");
    if (!(sigma2 > 0.0))
        throw ConfigError("noise variance must be positive");
    if (!(P_m > 0.0))
        throw ConfigError("power budget must be positive");
    if (!(P_cir >= 0.0))
        throw ConfigError("circuit power must be non-negative");
    if (!(rho >= 1.0))
        throw ConfigError("rho must be at least 1");
    if (!(sigma_h2 >= 0.0))
        throw ConfigError("channel variance must be non-negative");
    if (!alpha.empty()) {
        if (static_cast<int>(alpha.size()) != K)
            throw ConfigError("alpha must have K entries");
        bool any_positive = false;
        for (double a : alpha) {
            if (!(a >= 0.0) || !std::isfinite(a))
                throw ConfigError("alpha entries must be finite and non-negative");
            any_positive = any_positive || a > 0.0;
        }
        if (!any_positive)
            throw ConfigError("at least one alpha must be positive");
    }
}

NormBoundedError NormBoundedError::spherical(int K, int N, double radius)
{
    NormBoundedError m;
    m.B = PairGrid<MatC>(K, MatC::Identity(N, N));
    m.eps = PairGrid<double>(K, radius);
    return m;
}

void NormBoundedError::validate(int K, int N) const
{
    if (B.size() != K || eps.size() != K)
        throw DimensionError("norm-bounded model must cover K x K links");
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j) {
            if (!(eps(i, j) >= 0.0))
                throw ConfigError("uncertainty radius must be non-negative");
            const MatC& b = B(i, j);
            if (b.rows() != N || b.cols() != N)
                throw DimensionError("shaping matrix must be N x N");
            if ((b - b.adjoint()).norm() > 1e-10 * (1.0 + b.norm()))
                throw ShapingMatrixError("shaping matrix must be Hermitian");
            Eigen::LLT<MatC> llt(b);
            if (llt.info() != Eigen::Success || min_eigenvalue(b) <= 1e-12 * (1.0 + b.norm()))
                throw ShapingMatrixError("shaping matrix must be positive definite");
        }
}

} // namespace geeprec
