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

#include "geeprec/dinkelbach.hpp"
#include "geeprec/sdp.hpp"
#include "geeprec/types.hpp"

#include <vector>

namespace geeprec {

/// Affine pieces of the weighted MSE under a channel error:
///   tr(W_i MSE_i(H^ + Delta)) = sum_j || e(i,j) + E(i,j) vec(Delta(i,j)^H) ||^2.
/// E(i,j) has M N columns and acts on vec(Delta^H) (Delta^H is M x N), the
/// coordinates in which the uncertainty ball is written.
struct ErrorTermPair {
    PairGrid<VecC> e;
    PairGrid<MatC> E;
};

/// d^2 off the diagonal, d^2 + N d on it.
Index error_term_length(const SystemConfig& cfg, int i, int j);

/// vec(Delta^H)
VecC error_coordinates(const MatC& Delta);

ErrorTermPair assemble_error_terms(const ChannelSet& estimates, const PrecoderSet& precoders,
                                   const DecoderSet& decoders, const WeightSet& weights, const SystemConfig& cfg);

/// e and E of one link (receiver i, transmitter j).
void assemble_error_pair(const MatC& H_ij, const MatC& V_j, const MatC& U_i, const MatC& G_i, double sigma2,
                         bool own_link, VecC& e, MatC& E);

/// tr(W_i MSE_i) evaluated directly, W_i = G_i G_i^H.
double weighted_mse(const ChannelSet& channels, const PrecoderSet& precoders, const DecoderSet& decoders,
                    const WeightSet& weights, const SystemConfig& cfg, int i);

/// B~ = B^{-T} (x) I_M, so that vec(Delta^H) = B~ vec((B Delta)^H).
MatC shaping_transform(const MatC& B, int M);

/// [[P_m, vec(V)^H], [vec(V), I]]
MatC build_power_lmi(const MatC& V, double P_m);

/// [[lambda - mu, e^H, 0], [e, I, -eps E B~], [0, -eps B~^H E^H, mu I]].
/// PSD for some mu >= 0 iff ||e + E vec(Delta^H)||^2 <= lambda for every
/// ||B Delta||_F <= eps.
MatC build_robust_lmi(const VecC& e, const MatC& E, const MatC& B, double eps, double lambda, double mu, int M);

/// max_{||delta|| <= eps} ||e + A delta||^2, computed exactly through the
/// one-dimensional multiplier problem min_mu lambda(mu). Returns the
/// minimizing mu through `mu_out` when non-null.
double worst_case_bound(const VecC& e, const MatC& A, double eps, double* mu_out = nullptr);

struct RobustAuxiliaries {
    PairGrid<double> lambda;
    PairGrid<double> mu;
    PairGrid<MatC> Btilde;
};

/// Exact worst-case values lambda*(i,j) and their multipliers.
RobustAuxiliaries robust_bounds(const ChannelSet& estimates, const PrecoderSet& precoders, const DecoderSet& decoders,
                                const WeightSet& weights, const SystemConfig& cfg, const NormBoundedError& model);

/// sum_i alpha_i (2 log2|G_i| - sum_j lambda*(i,j)) - eta rho sum_i tr(V_i^H V_i)
double robust_objective(const ChannelSet& estimates, const PrecoderSet& precoders, const DecoderSet& decoders,
                        const WeightSet& weights, const SystemConfig& cfg, const NormBoundedError& model, double eta);

/// Worst-case rate lower bounds
///   2 log2|G_i| + d log2(ln 2) + d / ln 2 - sum_j lambda*(i,j).
std::vector<double> worst_case_rates(const ChannelSet& estimates, const PrecoderSet& precoders,
                                     const DecoderSet& decoders, const WeightSet& weights, const SystemConfig& cfg,
                                     const NormBoundedError& model);

/// Weights maximizing the nominal WMMSE bound: G_i = ((MSE_i ln 2)^{-1})^{1/2}.
WeightSet nominal_weights(const ChannelSet& estimates, const PrecoderSet& precoders, const DecoderSet& decoders,
                          const SystemConfig& cfg);

template <typename T>
struct StepResult {
    T value;
    RobustAuxiliaries aux; // solver values of lambda and mu
    double objective_before = 0.0;
    double objective_after = 0.0;
    int sdp_solves = 0;
    int sdp_iterations = 0;
    int sdp_failures = 0; // solves whose point was rejected
};

StepResult<PrecoderSet> solve_v_step(const ChannelSet& estimates, const SystemConfig& cfg,
                                     const NormBoundedError& model, double eta, const PrecoderSet& precoders,
                                     const DecoderSet& decoders, const WeightSet& weights,
                                     const sdp::SdpOptions& opts = {});

StepResult<DecoderSet> solve_u_step(const ChannelSet& estimates, const SystemConfig& cfg,
                                    const NormBoundedError& model, double eta, const PrecoderSet& precoders,
                                    const DecoderSet& decoders, const WeightSet& weights,
                                    const sdp::SdpOptions& opts = {});

StepResult<WeightSet> solve_g_step(const ChannelSet& estimates, const SystemConfig& cfg,
                                   const NormBoundedError& model, double eta, const PrecoderSet& precoders,
                                   const DecoderSet& decoders, const WeightSet& weights,
                                   const sdp::SdpOptions& opts = {});

struct WorstCaseOptions {
    DinkelbachOptions dinkelbach{1e-6, 50};
    double alt_rel_tol = 1e-4;
    int alt_max_sweeps = 100;
    sdp::SdpOptions sdp{};
};

struct WorstCaseResult {
    PrecoderSet precoders;
    DecoderSet decoders;
    WeightSet weights;
    GeeReport report; // rates are worst_case_rates(), gee their weighted sum over power
    FractionalTrace dinkelbach;
    RobustAuxiliaries aux;
    int sweeps = 0;
    int sdp_solves = 0;
    double sdp_seconds = 0.0;
};

WorstCaseResult run_worstcase(const ChannelSet& estimates, const SystemConfig& cfg, const NormBoundedError& model,
                              const WorstCaseOptions& opts = {});

} // namespace geeprec
