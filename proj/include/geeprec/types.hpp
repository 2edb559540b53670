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

#include "geeprec/linalg.hpp"

#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace geeprec {

// Error hierarchy. Every failure the library reports derives from Error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class ShapingMatrixError : public Error {
public:
    using Error::Error;
};

class DecoderRankError : public Error {
public:
    using Error::Error;
};

class DegeneratePowerError : public Error {
public:
    using Error::Error;
};

class ModelError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

/// Scalar network parameters. All powers are in watts.
struct SystemConfig {
    int K = 1;               // user pairs
    int M = 1;               // transmit antennas per user
    int N = 1;               // receive antennas per user
    int d = 1;               // streams per user
    double sigma2 = 1.0;     // noise variance
    double P_m = 1.0;        // per-user power budget
    double P_cir = 0.0;      // circuit power per antenna
    double rho = 1.0;        // inverse amplifier efficiency
    std::vector<double> alpha; // per-user rate weights, defaults to all ones
    double sigma_h2 = 1.0;   // channel entry variance

    /// Throws ConfigError on any violated invariant. An empty alpha means
    /// unit weights.
    void validate() const;

    double weight(int k) const { return alpha.empty() ? 1.0 : alpha[static_cast<std::size_t>(k)]; }
};

/// Dense K x K array indexed (receiver i, transmitter j).
template <typename T>
class PairGrid {
public:
    PairGrid() = default;
    PairGrid(int K, const T& init = T{}) : K_(K), data_(static_cast<std::size_t>(K) * static_cast<std::size_t>(K), init)
    {
    }

    int size() const { return K_; }

    T& operator()(int i, int j) { return data_[index(i, j)]; }
    const T& operator()(int i, int j) const { return data_[index(i, j)]; }

    auto begin() { return data_.begin(); }
    auto end() { return data_.end(); }
    auto begin() const { return data_.begin(); }
    auto end() const { return data_.end(); }

    bool operator==(const PairGrid&) const = default;

private:
    std::size_t index(int i, int j) const
    {
        if (i < 0 || j < 0 || i >= K_ || j >= K_)
            throw DimensionError("pair index out of range");
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(K_) + static_cast<std::size_t>(j);
    }

    int K_ = 0;
    std::vector<T> data_;
};

/// H(i, j) is the N x M channel from transmitter j to receiver i.
struct ChannelSet {
    PairGrid<MatC> H;

    int K() const { return H.size(); }
    const MatC& operator()(int i, int j) const { return H(i, j); }
    MatC& operator()(int i, int j) { return H(i, j); }
};

/// Additive channel estimation error, Delta(i, j) is N x M.
struct ErrorRealization {
    PairGrid<MatC> Delta;

    const MatC& operator()(int i, int j) const { return Delta(i, j); }
    MatC& operator()(int i, int j) { return Delta(i, j); }
};

struct StochasticError {
    double sigma_delta2 = 0.0;
};

/// Ellipsoidal uncertainty ||B(i,j) * Delta(i,j)||_F <= eps(i,j), B Hermitian
/// positive definite N x N.
struct NormBoundedError {
    PairGrid<MatC> B;
    PairGrid<double> eps;

    /// Spherical uncertainty (B = I) with a common radius.
    static NormBoundedError spherical(int K, int N, double radius);
    void validate(int K, int N) const;
};

using ErrorModel = std::variant<StochasticError, NormBoundedError>;

struct PrecoderSet {
    std::vector<MatC> V; // M x d per user
};

struct DecoderSet {
    std::vector<MatC> U; // N x d per user
};

/// W_i = G_i G_i^H. G_i is kept Hermitian positive definite.
struct WeightSet {
    std::vector<MatC> G; // d x d per user
};

struct GeeReport {
    std::vector<double> rates; // bits/s/Hz
    double total_power = 0.0;  // watts
    double gee = 0.0;          // bits/Hz/Joule
    std::vector<std::pair<double, double>> trace; // (eta, objective)
    int iterations = 0;
    bool converged = true;
    std::string warning;
};

} // namespace geeprec
