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
#include "geeprec/types.hpp"

#include <cstdint>
#include <vector>

namespace geeprec {

/// Quadratic minorant data for the statistical-error case, expanded at a
/// previous precoder set V~. W holds the MMSE weight (I + V~^H H^H C^-1 H V~),
/// the inverse of the expected MSE matrix at the expansion point.
struct SurrogateData {
    std::vector<MatC> Psi; // M x M, Hermitian PSD
    std::vector<VecC> b;   // Md
    std::vector<MatC> F12; // d x N
    std::vector<MatC> F22; // N x N, Hermitian PSD
    std::vector<MatC> W;   // d x d, Hermitian PD
};

/// Interference-plus-noise covariance averaged over a CN(0, sigma_delta2)
/// estimation error on every link:
///   C_k + sigma_delta2 * sum_j tr(V_j V_j^H) I_N.
/// Reduces to interference_covariance() for sigma_delta2 = 0.
MatC expected_covariance(const ChannelSet& estimates, const PrecoderSet& precoders, const SystemConfig& cfg, int k,
                         double sigma_delta2);

/// Receiver minimizing the expected MSE of user k.
MatC expected_mmse_receiver(const ChannelSet& estimates, const PrecoderSet& precoders, const SystemConfig& cfg, int k,
                            double sigma_delta2);

/// log2 |I + V_k^H H_kk^H Cbar_k^{-1} H_kk V_k|, the rate of user k when the
/// estimation error is treated as additional Gaussian noise.
double expected_rate(const ChannelSet& estimates, const PrecoderSet& precoders, const SystemConfig& cfg, int k,
                     double sigma_delta2);

/// sum_k alpha_k expected_rate_k - eta * total_power (bits/s/Hz units).
double statistical_objective(const ChannelSet& estimates, const PrecoderSet& precoders, const SystemConfig& cfg,
                             double sigma_delta2, double eta);

SurrogateData build_surrogate(const ChannelSet& estimates, const PrecoderSet& prev_precoders, const SystemConfig& cfg,
                              double sigma_delta2);

/// Value of the minorant of statistical_objective() built at the expansion
/// point of `sur`, evaluated at `precoders`. Equal to the true objective at the
/// expansion point and never above it elsewhere.
double surrogate_objective(const SurrogateData& sur, const PrecoderSet& precoders, const SystemConfig& cfg,
                           double eta);

struct QcqpSolution {
    VecC x;
    double lambda = 0.0;
};

/// min_x x^H (I_d (x) Psi + eta rho I) x + 2 Re(x^H b)  s.t.  ||x||^2 <= P.
/// The multiplier is found from the secular equation by bisection on
/// [0, ||b|| / sqrt(P)] followed by Newton polishing.
QcqpSolution solve_qcqp(const MatC& Psi, const VecC& b, double eta, double rho, double P);

/// Objective of solve_qcqp() at x.
double qcqp_objective(const MatC& Psi, const VecC& b, double eta, double rho, const VecC& x);

/// V_k = sqrt(P_m / d) * (top-d right singular vectors of H_kk).
PrecoderSet initial_precoders(const ChannelSet& estimates, const SystemConfig& cfg);

/// Random precoders drawn CN(0,1) and scaled onto the power budget.
PrecoderSet random_precoders(const SystemConfig& cfg, std::uint64_t seed);

struct StatisticalOptions {
    DinkelbachOptions dinkelbach{};
    double mami_rel_tol = 1e-5;
    int mami_max_iter = 200;
    int restarts = 0;
    std::uint64_t seed = 0;
};

struct StatisticalResult {
    PrecoderSet precoders;
    DecoderSet decoders;
    GeeReport report;
    FractionalTrace dinkelbach;
};

/// Dinkelbach outer loop with a MaMi inner loop. The reported rates are
/// expected_rate() values, the decoders expected_mmse_receiver().
StatisticalResult run_statistical(const ChannelSet& estimates, const SystemConfig& cfg, double sigma_delta2,
                                  const StatisticalOptions& opts = {});

} // namespace geeprec
