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

#include "geeprec/channel.hpp"

#include <cmath>

namespace geeprec {

namespace {

constexpr std::uint64_t kChannelStream = 1;
constexpr std::uint64_t kErrorStream = 2;

} // namespace

MatC random_complex_matrix(Index rows, Index cols, double variance, Rng& rng)
{
    MatC out(rows, cols);
    // column-major fill order is part of the reproducibility contract
    for (Index c = 0; c < cols; ++c)
        for (Index r = 0; r < rows; ++r)
            out(r, c) = rng.complex_normal(variance);
    return out;
}

ChannelSet generate_channels(const SystemConfig& cfg, std::uint64_t seed)
{
    cfg.validate();
    ChannelSet out{PairGrid<MatC>(cfg.K)};
    for (int i = 0; i < cfg.K; ++i)
        for (int j = 0; j < cfg.K; ++j) {
            Rng rng(derive_seed(seed, link_stream(kChannelStream, i, j)));
            out(i, j) = random_complex_matrix(cfg.N, cfg.M, cfg.sigma_h2, rng);
        }
    return out;
}

ErrorRealization sample_error(const SystemConfig& cfg, const ErrorModel& model, std::uint64_t seed)
{
    cfg.validate();
    ErrorRealization out{PairGrid<MatC>(cfg.K)};

    if (const auto* st = std::get_if<StochasticError>(&model)) {
        if (!(st->sigma_delta2 >= 0.0))
            throw ConfigError("error variance must be non-negative");
        for (int i = 0; i < cfg.K; ++i)
            for (int j = 0; j < cfg.K; ++j) {
                Rng rng(derive_seed(seed, link_stream(kErrorStream, i, j)));
                out(i, j) = random_complex_matrix(cfg.N, cfg.M, st->sigma_delta2, rng);
            }
        return out;
    }

    const auto& nb = std::get<NormBoundedError>(model);
    nb.validate(cfg.K, cfg.N);
    const double dim = 2.0 * static_cast<double>(cfg.M) * static_cast<double>(cfg.N);
    for (int i = 0; i < cfg.K; ++i)
        for (int j = 0; j < cfg.K; ++j) {
            Rng rng(derive_seed(seed, link_stream(kErrorStream, i, j)));
            MatC shaped = random_complex_matrix(cfg.N, cfg.M, 1.0, rng);
            const double u = rng.uniform();
            const double nrm = shaped.norm();
            const double eps = nb.eps(i, j);
            if (nrm > 0.0 && eps > 0.0)
                shaped *= std::pow(u, 1.0 / dim) * eps / nrm;
            else
                shaped.setZero();
            // Delta = B^{-1} * (B Delta)
            out(i, j) = nb.B(i, j).llt().solve(shaped);
        }
    return out;
}

ChannelSet compose(const ChannelSet& estimate, const ErrorRealization& delta)
{
    if (estimate.K() != delta.Delta.size())
        throw DimensionError("channel and error sets cover different K");
    ChannelSet out = estimate;
    for (int i = 0; i < estimate.K(); ++i)
        for (int j = 0; j < estimate.K(); ++j) {
            if (estimate(i, j).rows() != delta(i, j).rows() || estimate(i, j).cols() != delta(i, j).cols())
                throw DimensionError("channel and error matrices differ in shape");
            out(i, j) = estimate(i, j) + delta(i, j);
        }
    return out;
}

} // namespace geeprec
