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

#include "geeprec/types.hpp"

#include <vector>

namespace geeprec {

/// C_k = sigma2 I_N + sum_{l != k} H_kl V_l V_l^H H_kl^H
MatC interference_covariance(const ChannelSet& channels, const PrecoderSet& precoders, const SystemConfig& cfg, int k);

/// U_k = (C_k + H_kk V_k V_k^H H_kk^H)^{-1} H_kk V_k. This maximizes the rate
/// of user k over all decoders for fixed precoders.
MatC mmse_receiver(const ChannelSet& channels, const PrecoderSet& precoders, const SystemConfig& cfg, int k);
DecoderSet mmse_receivers(const ChannelSet& channels, const PrecoderSet& precoders, const SystemConfig& cfg);

/// log2 |I + V^H H^H U (U^H C U)^{-1} U^H H V| in bits/s/Hz. Throws
/// DecoderRankError when U^H C U is singular.
double user_rate(const ChannelSet& channels, const PrecoderSet& precoders, const DecoderSet& decoders,
                 const SystemConfig& cfg, int k);

MatC mse_matrix(const ChannelSet& channels, const PrecoderSet& precoders, const DecoderSet& decoders,
                const SystemConfig& cfg, int k);

/// sum_k (rho tr(V_k V_k^H) + M P_cir)
double total_power(const PrecoderSet& precoders, const SystemConfig& cfg);

/// Weighted sum rate over total power. Throws DegeneratePowerError when the
/// denominator vanishes.
GeeReport gee(const ChannelSet& channels, const PrecoderSet& precoders, const DecoderSet& decoders,
              const SystemConfig& cfg);

/// s_hat_n = U_n^H (sum_l H_nl V_l s_l + z_n)
std::vector<VecC> simulate_transmission(const ChannelSet& channels, const PrecoderSet& precoders,
                                        const DecoderSet& decoders, const SystemConfig& cfg,
                                        const std::vector<VecC>& symbols, const std::vector<VecC>& noise);

/// Shape checks shared by the modules; throw DimensionError.
void check_channels(const ChannelSet& channels, const SystemConfig& cfg);
void check_precoders(const PrecoderSet& precoders, const SystemConfig& cfg);
void check_decoders(const DecoderSet& decoders, const SystemConfig& cfg);

} // namespace geeprec
