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

#include "geeprec/metrics.hpp"

#include <cmath>
#include <string>

namespace geeprec {

namespace {

void check_user(const SystemConfig& cfg, int k)
{
    if (k < 0 || k >= cfg.K)
        throw DimensionError("user index " + std::to_string(k) + " out of range");
}

} // namespace

void check_channels(const ChannelSet& channels, const SystemConfig& cfg)
{
    if (channels.K() != cfg.K)
        throw DimensionError("channel set does not cover K users");
    for (const auto& H : channels.H)
        if (H.rows() != cfg.N || H.cols() != cfg.M)
            throw DimensionError("channel matrices must be N x M");
}

void check_precoders(const PrecoderSet& precoders, const SystemConfig& cfg)
{
    if (static_cast<int>(precoders.V.size()) != cfg.K)
        throw DimensionError("precoder set must hold K matrices");
    for (const auto& V : precoders.V)
        if (V.rows() != cfg.M || V.cols() != cfg.d)
            throw DimensionError("precoders must be M x d");
}

void check_decoders(const DecoderSet& decoders, const SystemConfig& cfg)
{
    if (static_cast<int>(decoders.U.size()) != cfg.K)
        throw DimensionError("decoder set must hold K matrices");
    for (const auto& U : decoders.U)
        if (U.rows() != cfg.N || U.cols() != cfg.d)
            throw DimensionError("decoders must be N x d");
}

MatC interference_covariance(const ChannelSet& channels, const PrecoderSet& precoders, const SystemConfig& cfg, int k)
{
    check_user(cfg, k);
    MatC C = cfg.sigma2 * MatC::Identity(cfg.N, cfg.N);
    for (int l = 0; l < cfg.K; ++l) {
        if (l == k)
            continue;
        const MatC HV = channels(k, l) * precoders.V[l];
        C.noalias() += HV * HV.adjoint();
    }
    return hermitian_part(C);
}

MatC mmse_receiver(const ChannelSet& channels, const PrecoderSet& precoders, const SystemConfig& cfg, int k)
{
    check_user(cfg, k);
    const MatC HV = channels(k, k) * precoders.V[k];
    MatC T = interference_covariance(channels, precoders, cfg, k);
    T.noalias() += HV * HV.adjoint();
    Eigen::LLT<MatC> llt(hermitian_part(T));
    if (llt.info() != Eigen::Success)
        throw SolverError("total receive covariance is not positive definite");
    return llt.solve(HV);
}

DecoderSet mmse_receivers(const ChannelSet& channels, const PrecoderSet& precoders, const SystemConfig& cfg)
{
    DecoderSet out;
    out.U.reserve(static_cast<std::size_t>(cfg.K));
    for (int k = 0; k < cfg.K; ++k)
        out.U.push_back(mmse_receiver(channels, precoders, cfg, k));
    return out;
}

double user_rate(const ChannelSet& channels, const PrecoderSet& precoders, const DecoderSet& decoders,
                 const SystemConfig& cfg, int k)
{
    check_user(cfg, k);
    const MatC& U = decoders.U[k];
    const MatC G = U.adjoint() * channels(k, k) * precoders.V[k]; // d x d
    if (G.squaredNorm() == 0.0)
        return 0.0;
    const MatC C = interference_covariance(channels, precoders, cfg, k);
    const MatC UCU = hermitian_part((U.adjoint() * C * U).eval());
    Eigen::LLT<MatC> llt(UCU);
    const double scale = C.norm() * U.squaredNorm();
    if (llt.info() != Eigen::Success || min_eigenvalue(UCU) <= 1e-13 * scale)
        throw DecoderRankError("decoder of user " + std::to_string(k) + " is rank deficient");
    MatC S = MatC::Identity(cfg.d, cfg.d) + G.adjoint() * llt.solve(G);
    return std::max(0.0, log2_det_hpd(S));
}

MatC mse_matrix(const ChannelSet& channels, const PrecoderSet& precoders, const DecoderSet& decoders,
                const SystemConfig& cfg, int k)
{
    check_user(cfg, k);
    const MatC& U = decoders.U[k];
    const MatC D = U.adjoint() * channels(k, k) * precoders.V[k] - MatC::Identity(cfg.d, cfg.d);
    MatC E = D * D.adjoint() + cfg.sigma2 * U.adjoint() * U;
    for (int j = 0; j < cfg.K; ++j) {
        if (j == k)
            continue;
        const MatC T = U.adjoint() * channels(k, j) * precoders.V[j];
        E.noalias() += T * T.adjoint();
    }
    return hermitian_part(E);
}

double total_power(const PrecoderSet& precoders, const SystemConfig& cfg)
{
    double p = 0.0;
    for (const auto& V : precoders.V)
        p += cfg.rho * V.squaredNorm() + cfg.M * cfg.P_cir;
    return p;
}

GeeReport gee(const ChannelSet& channels, const PrecoderSet& precoders, const DecoderSet& decoders,
              const SystemConfig& cfg)
{
    cfg.validate();
    check_channels(channels, cfg);
    check_precoders(precoders, cfg);
    check_decoders(decoders, cfg);

    GeeReport report;
    report.total_power = total_power(precoders, cfg);
    if (!(report.total_power > 0.0))
        throw DegeneratePowerError("total consumed power is zero");
    double weighted = 0.0;
    for (int k = 0; k < cfg.K; ++k) {
        const double r = user_rate(channels, precoders, decoders, cfg, k);
        report.rates.push_back(r);
        weighted += cfg.weight(k) * r;
    }
    report.gee = weighted / report.total_power;
    return report;
}

std::vector<VecC> simulate_transmission(const ChannelSet& channels, const PrecoderSet& precoders,
                                        const DecoderSet& decoders, const SystemConfig& cfg,
                                        const std::vector<VecC>& symbols, const std::vector<VecC>& noise)
{
    check_channels(channels, cfg);
    check_precoders(precoders, cfg);
    check_decoders(decoders, cfg);
    if (static_cast<int>(symbols.size()) != cfg.K || static_cast<int>(noise.size()) != cfg.K)
        throw DimensionError("need one symbol vector and one noise vector per user");
    for (int k = 0; k < cfg.K; ++k) {
        if (symbols[k].size() != cfg.d)
            throw DimensionError("symbol vectors must have d entries");
        if (noise[k].size() != cfg.N)
            throw DimensionError("noise vectors must have N entries");
    }

    std::vector<VecC> out;
    out.reserve(static_cast<std::size_t>(cfg.K));
    for (int n = 0; n < cfg.K; ++n) {
        VecC y = noise[n];
        for (int l = 0; l < cfg.K; ++l)
            y.noalias() += channels(n, l) * (precoders.V[l] * symbols[l]);
        out.push_back(decoders.U[n].adjoint() * y);
    }
    return out;
}

} // namespace geeprec
