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

#pragma once

#include "geeprec/channel.hpp"
#include "geeprec/linalg.hpp"
#include "geeprec/metrics.hpp"
#include "geeprec/rng.hpp"
#include "geeprec/types.hpp"

namespace testutil {

using namespace geeprec;

inline SystemConfig config(int K, int M, int N, int d)
{
    SystemConfig cfg;
    cfg.K = K;
    cfg.M = M;
    cfg.N = N;
    cfg.d = d;
    cfg.sigma2 = 1.0;
    cfg.P_m = 1.0;
    cfg.P_cir = 0.1;
    cfg.rho = 1.5;
    return cfg;
}

inline SystemConfig reference_config(int M)
{
    SystemConfig cfg = config(3, M, M, 1);
    cfg.P_cir = std::pow(10.0, -0.5);
    cfg.rho = 1.0 / 0.38;
    return cfg;
}

inline MatC random_matrix(Index rows, Index cols, Rng& rng, double variance = 1.0)
{
    return random_complex_matrix(rows, cols, variance, rng);
}

inline MatC random_hpd(Index n, Rng& rng)
{
    const MatC A = random_matrix(n, n, rng);
    return A * A.adjoint() + 0.1 * MatC::Identity(n, n);
}

/// Precoders with random direction and power uniform in (0, P_m].
inline PrecoderSet random_feasible_precoders(const SystemConfig& cfg, Rng& rng)
{
    PrecoderSet P;
    for (int k = 0; k < cfg.K; ++k) {
        MatC V = random_matrix(cfg.M, cfg.d, rng);
        V *= std::sqrt(cfg.P_m * rng.uniform()) / V.norm();
        P.V.push_back(V);
    }
    return P;
}

inline DecoderSet random_decoders(const SystemConfig& cfg, Rng& rng)
{
    DecoderSet D;
    for (int k = 0; k < cfg.K; ++k)
        D.U.push_back(random_matrix(cfg.N, cfg.d, rng));
    return D;
}

inline WeightSet random_weights(const SystemConfig& cfg, Rng& rng)
{
    WeightSet W;
    for (int k = 0; k < cfg.K; ++k)
        W.G.push_back(random_hpd(cfg.d, rng));
    return W;
}

inline double max_abs_diff(const MatC& a, const MatC& b)
{
    return (a - b).cwiseAbs().maxCoeff();
}

} // namespace testutil
