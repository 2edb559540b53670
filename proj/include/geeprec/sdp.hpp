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

#include <functional>
#include <optional>
#include <string>
#include <vector>

// Dense small-scale conic solver: linear objective plus optional log-det
// terms, subject to Hermitian linear matrix inequalities. Complex Hermitian
// blocks are lowered to real symmetric blocks of doubled side through
// [[Re, -Im], [Im, Re]]; for a complex Hermitian F, F >= 0 iff its embedding is.

namespace geeprec::sdp {

enum class VariableKind { Real, Complex, Hermitian };

/// A named group of real scalars inside the problem vector y.
///  Real      : one scalar.
///  Complex   : rows x cols matrix, entry (r, c) stored as (re, im) at
///              offset + 2 (r + rows c).
///  Hermitian : n x n, diagonal first (n reals) then (re, im) of every
///              strictly upper entry in row-major order.
struct VariableBlock {
    std::string name;
    VariableKind kind = VariableKind::Real;
    Index rows = 1;
    Index cols = 1;
    Index offset = 0;

    Index size() const;
    MatC value(const VecR& y) const;
    void pack(const MatC& value, VecR& y) const;
};

/// F(y) = constant + sum_k y_k * coefficient_k, every matrix Hermitian.
struct AffineHermitian {
    MatC constant;
    std::vector<std::pair<Index, MatC>> terms;

    Index side() const { return constant.rows(); }
    MatC evaluate(const VecR& y) const;

    /// Samples an affine Hermitian-valued function at the origin and at the
    /// unit vectors of the listed variables. `fn` must be affine in y; the
    /// remaining variables must not influence it.
    static AffineHermitian from_function(Index num_vars, const std::vector<Index>& vars,
                                         const std::function<MatC(const VecR&)>& fn);
};

enum class Sense { Minimize, Maximize };

/// weight * log2 det(map(y)); map(y) must stay positive definite.
struct LogDetTerm {
    double weight = 1.0;
    AffineHermitian map;
};

struct SdpProblem {
    Sense sense = Sense::Minimize;
    std::vector<VariableBlock> variables;
    VecR objective;                       // linear coefficients
    std::vector<LogDetTerm> logdet;
    std::vector<AffineHermitian> constraints; // each required PSD

    Index num_scalars() const;
    const VariableBlock& add_real(const std::string& name);
    const VariableBlock& add_complex(const std::string& name, Index rows, Index cols);
    const VariableBlock& add_hermitian(const std::string& name, Index n);
    const VariableBlock& variable(const std::string& name) const;

    /// Linear part plus log-det terms at y (log-det terms -inf outside the domain).
    double objective_value(const VecR& y) const;

    /// Throws DimensionError / ConfigError on malformed data.
    void validate() const;
};

enum class SdpStatus { Optimal, MaxIterations, Infeasible, Unbounded };

std::string to_string(SdpStatus status);

struct KktResiduals {
    double primal = 0.0; // max(0, -min eigenvalue) over constraint blocks
    double dual = 0.0;   // Newton decrement of the last centering step, divided by t
    double gap = 0.0;    // duality gap bound (sum of block sides) / t
};

struct SdpOptions {
    double feas_tol = 1e-8;
    double gap_tol = 1e-6;   // relative: gap <= gap_tol * (1 + |objective|)
    int max_iter = 200;      // total Newton steps, phase I included
    double barrier_growth = 20.0;
};

struct SdpSolution {
    VecR assignment;
    double objective_value = 0.0;
    SdpStatus status = SdpStatus::MaxIterations;
    KktResiduals kkt;
    int iterations = 0;
    double min_eigenvalue = 0.0; // smallest eigenvalue over constraint blocks
};

/// Barrier path following. `start` should be strictly feasible; without one
/// (or when it is not) a phase I problem is solved first.
SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& opts = {},
                      const std::optional<VecR>& start = std::nullopt);

/// Same solver, for problems carrying log-det objective terms.
SdpSolution solve_maxdet(const SdpProblem& problem, const SdpOptions& opts = {},
                         const std::optional<VecR>& start = std::nullopt);

} // namespace geeprec::sdp
