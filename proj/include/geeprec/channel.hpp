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

#include "geeprec/rng.hpp"
#include "geeprec/types.hpp"

#include <cstdint>

namespace geeprec {

/// Rayleigh flat-fading channels: every entry of every H(i, j) is
/// CN(0, sigma_h2). Link (i, j) draws from its own stream (see rng.hpp).
ChannelSet generate_channels(const SystemConfig& cfg, std::uint64_t seed);

/// Draws one error realization. Stochastic: i.i.d. CN(0, sigma_delta2).
/// NormBounded: uniform in {Delta : ||B Delta||_F <= eps}.
ErrorRealization sample_error(const SystemConfig& cfg, const ErrorModel& model, std::uint64_t seed);

/// H(i, j) = estimate(i, j) + delta(i, j).
ChannelSet compose(const ChannelSet& estimate, const ErrorRealization& delta);

MatC random_complex_matrix(Index rows, Index cols, double variance, Rng& rng);

} // namespace geeprec
