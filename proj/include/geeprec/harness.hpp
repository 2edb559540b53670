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

#include "geeprec/json_io.hpp"
#include "geeprec/types.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace geeprec {

/// 10^(x/10)
double dbw_to_watts(double x);

enum class SolverKind { Statistical, WorstCase };
enum class SweepVariable { SigmaDelta2, Eps };

std::string to_string(SolverKind kind);
std::string to_string(SweepVariable var);
SolverKind solver_from_string(const std::string& s);
SweepVariable sweep_variable_from_string(const std::string& s);

/// Spec file schema:
/// {
///   "base": {"K": 3, "d": 1, "P_m_dbw": 0, "P_cir_dbw": -5, "rho": 2.63, ...},
///   "antennas": [4, 6],            // M values, N = M for each
///   "sweep": {"variable": "sigma_delta2" | "eps", "values": [0, 0.1]},
///   "trials": 20, "seed": 7, "solver": "statistical" | "worstcase",
///   "output": "out.csv", "threads": 0,
///   "shaping": [[1, 2, 2], [2, 1, 2], [2, 2, 1]]   // optional, B_ij = b_ij I
/// }
struct ExperimentSpec {
    SystemConfig base;
    std::vector<int> antennas;
    SweepVariable variable = SweepVariable::SigmaDelta2;
    std::vector<double> values{0.0};
    int trials = 1;
    std::uint64_t seed = 1;
    SolverKind solver = SolverKind::Statistical;
    std::string output;
    int threads = 0; // 0: one per hardware thread
    std::vector<std::vector<double>> shaping; // empty: B_ij = I

    /// Uncertainty set for one radius under the spec's shaping.
    NormBoundedError uncertainty(const SystemConfig& cfg, double eps) const;

    void validate() const;
    /// Configs to run, one per antenna count.
    std::vector<SystemConfig> configs() const;
};

void to_json(json& j, const ExperimentSpec& spec);
void from_json(const json& j, ExperimentSpec& spec);

/// Seed of one Monte-Carlo trial, independent of worker count.
std::uint64_t trial_seed(std::uint64_t master, int trial);

struct SweepRow {
    bool summary = false;
    double sweep_value = 0.0;
    int M = 0;
    int trial = -1;
    std::string status; // ok | unconverged | failed, or k/n ok for summaries
    double gee = 0.0;
    double nominal_gee = 0.0; // same precoders, estimated channel, MMSE receivers
    double iterations = 0.0;
    double wallclock_ms = 0.0;
    std::vector<double> rates;
    std::string message;
};

struct SweepResult {
    std::vector<SweepRow> rows; // trials ordered by (value, M, trial), then summaries
    int failures = 0;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

SweepResult run_sweep(const ExperimentSpec& spec, const ProgressFn& progress = {});

inline constexpr int kCsvSchemaVersion = 1;

void write_csv(std::ostream& out, const ExperimentSpec& spec, const SweepResult& result,
               bool include_wallclock = true);

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Invariant checks on a tiny fixed instance.
std::vector<CheckResult> run_self_check(std::uint64_t seed = 1);

} // namespace geeprec
