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

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace geeprec {

struct DinkelbachOptions {
    double tol = 1e-6;
    int max_iter = 50;
};

/// eta_t, F(eta_t) = N(x_t) - eta_t D(x_t) per outer iteration.
struct FractionalTrace {
    std::vector<double> etas;
    std::vector<double> residuals;
    int iterations = 0;
    bool converged = false;
};

template <typename Solution>
struct FractionalStep {
    Solution solution;
    double numerator = 0.0;
    double denominator = 0.0;
};

/// Dinkelbach iteration for max N(x)/D(x). `inner(eta)` must return a
/// (near) maximizer of N(x) - eta D(x) as a FractionalStep. The loop stops
/// once N(x_t) - eta_t D(x_t) <= tol or after max_iter inner solves, and
/// returns the last inner solution.
template <typename Inner>
auto solve_fractional(Inner&& inner, double eta0, const DinkelbachOptions& opts = {})
    -> std::pair<decltype(inner(eta0).solution), FractionalTrace>
{
    using Solution = decltype(inner(eta0).solution);
    if (opts.max_iter < 1)
        throw ConfigError("Dinkelbach needs at least one iteration");

    FractionalTrace trace;
    double eta = eta0;
    Solution best{};
    for (int it = 0; it < opts.max_iter; ++it) {
        FractionalStep<Solution> step = inner(eta);
        if (!(step.denominator > 0.0) || !std::isfinite(step.denominator))
            throw ModelError("fractional denominator must be positive, got " + std::to_string(step.denominator));
        const double residual = step.numerator - eta * step.denominator;
        trace.etas.push_back(eta);
        trace.residuals.push_back(residual);
        trace.iterations = it + 1;
        best = std::move(step.solution);
        if (residual <= opts.tol) {
            trace.converged = true;
            break;
        }
        eta = step.numerator / step.denominator;
    }
    return {std::move(best), std::move(trace)};
}

} // namespace geeprec
