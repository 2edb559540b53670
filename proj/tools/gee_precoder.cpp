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

#include "geeprec/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace {

int run(const std::string& spec_path, std::optional<std::uint64_t> seed, const std::string& output,
        const std::string& solver, std::optional<int> threads, bool quiet)
{
    using namespace geeprec;
    ExperimentSpec spec = read_json_file(spec_path).get<ExperimentSpec>();
    if (seed)
        spec.seed = *seed;
    if (!output.empty())
        spec.output = output;
    if (!solver.empty())
        spec.solver = solver_from_string(solver);
    if (threads)
        spec.threads = *threads;
    spec.validate();

    ProgressFn progress;
    if (!quiet)
        progress = [](std::size_t done, std::size_t total) {
            std::cerr << "\r" << done << "/" << total << " runs" << (done == total ? "\n" : "") << std::flush;
        };
    const SweepResult result = run_sweep(spec, progress);

    if (spec.output.empty() || spec.output == "-") {
        write_csv(std::cout, spec, result);
    } else {
        std::ofstream out(spec.output);
        if (!out)
            throw ConfigError("cannot write " + spec.output);
        write_csv(out, spec, result);
    }
    for (const auto& row : result.rows)
        if (row.status == "failed")
            std::cerr << "trial " << row.trial << " (M=" << row.M << ", " << to_string(spec.variable) << "="
                      << row.sweep_value << ") failed: " << row.message << '\n';
    return result.failures > 0 ? 2 : 0;
}

int check(std::uint64_t seed)
{
    bool all = true;
    for (const auto& c : geeprec::run_self_check(seed)) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
        all = all && c.passed;
    }
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Energy-efficient MIMO precoding under imperfect CSI"};
    app.require_subcommand(1);

    std::string spec_path, output, solver;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    bool quiet = false;
    auto* run_cmd = app.add_subcommand("run", "Run a Monte-Carlo sweep described by a JSON spec");
    run_cmd->add_option("--spec", spec_path, "Experiment spec (JSON)")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--seed", seed, "Override the master seed");
    run_cmd->add_option("--output", output, "CSV destination, - for stdout");
    run_cmd->add_option("--solver", solver, "Override the solver")
        ->check(CLI::IsMember({"statistical", "worstcase"}));
    run_cmd->add_option("--threads", threads, "Worker threads, 0 for one per core")->check(CLI::NonNegativeNumber);
    run_cmd->add_flag("-q,--quiet", quiet, "No progress output");

    std::uint64_t check_seed = 1;
    auto* check_cmd = app.add_subcommand("check", "Invariant self-check on a tiny instance");
    check_cmd->add_option("--seed", check_seed, "Instance seed");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run_cmd)
            return run(spec_path, seed, output, solver, threads, quiet);
        return check(check_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
