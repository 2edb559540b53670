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

#include "geeprec/json_io.hpp"
#include "geeprec/stat_robust.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <sstream>

using namespace testutil;

TEST_CASE("dBW conversion")
{
    CHECK(dbw_to_watts(0.0) == 1.0);
    CHECK(dbw_to_watts(-5.0) == doctest::Approx(0.31623).epsilon(1e-5));
    CHECK(dbw_to_watts(10.0) == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("spec parsing")
{
    const json j = json::parse(R"({
        "base": {"K": 2, "d": 1, "P_m_dbw": 0, "P_cir_dbw": -5, "rho": 2.0},
        "antennas": [2, 3],
        "sweep": {"variable": "sigma_delta2", "values": [0, 0.1]},
        "trials": 2, "seed": 5
    })");
    const ExperimentSpec spec = j.get<ExperimentSpec>();
    CHECK(spec.base.K == 2);
    CHECK(spec.base.P_m == 1.0);
    CHECK(spec.base.P_cir == doctest::Approx(0.31623).epsilon(1e-5));
    CHECK(spec.solver == SolverKind::Statistical);
    CHECK(spec.configs().size() == 2);
    CHECK(spec.configs()[1].N == 3);
    CHECK_NOTHROW(spec.validate());

    const ExperimentSpec again = json(spec).get<ExperimentSpec>();
    CHECK(again.values == spec.values);
    CHECK(again.base.P_cir == spec.base.P_cir);

    auto rejects = [&](const char* text) { CHECK_THROWS_AS(json::parse(text).get<ExperimentSpec>().validate(), ConfigError); };
    rejects(R"({"trials": 0})");
    rejects(R"({"sweep": {"variable": "eps", "values": [0.2, 0.1]}})");
    rejects(R"({"sweep": {"variable": "sigma_delta2", "values": [-0.1]}})");
    rejects(R"({"sweep": {"variable": "eps", "values": [0]}, "solver": "statistical"})");
    rejects(R"({"sweep": {"variable": "power", "values": [0]}})");
    rejects(R"({"base": {"P_m": 1, "P_m_dbw": 0}})");
    rejects(R"({"base": {"Q": 1}})");
    rejects(R"({"unknown": 1})");
    CHECK_THROWS_AS(json::parse(R"({"base": {"K": 2}, "shaping": [[1, 0], [1, 1]], "sweep": {"variable": "eps", "values": [0]}})")
                        .get<ExperimentSpec>()
                        .validate(),
                    ShapingMatrixError);
}

TEST_CASE("sweep row contract and reproducibility")
{
    ExperimentSpec spec;
    spec.base = config(2, 2, 2, 1);
    spec.antennas = {2, 3};
    spec.values = {0.0};
    spec.trials = 1;
    spec.seed = 3;
    const SweepResult r = run_sweep(spec);
    REQUIRE(r.rows.size() == 4);
    CHECK(r.failures == 0);
    CHECK_FALSE(r.rows[0].summary);
    CHECK_FALSE(r.rows[1].summary);
    CHECK(r.rows[2].summary);
    CHECK(r.rows[3].summary);
    CHECK(r.rows[2].gee == r.rows[0].gee);
    CHECK(r.rows[1].M == 3);

    spec.values = {0.0, 0.1};
    spec.trials = 3;
    spec.threads = 1;
    std::ostringstream a, b;
    write_csv(a, spec, run_sweep(spec), false);
    spec.threads = 3;
    write_csv(b, spec, run_sweep(spec), false);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("# gee-precoder sweep, schema 1", 0) == 0);
    CHECK(a.str().find("kind,sweep_var,sweep_value,M,trial,status,gee,nominal_gee,iterations,rate_1,rate_2\n") !=
          std::string::npos);

    // the channel draw depends on (trial, M) only
    const SweepResult full = run_sweep(spec);
    const auto cfg = spec.configs()[0];
    const ChannelSet H = generate_channels(cfg, derive_seed(trial_seed(spec.seed, 2), 2));
    CHECK(full.rows[2].gee == run_statistical(H, cfg, 0.0).report.gee);
    CHECK(full.rows[8].gee == run_statistical(H, cfg, 0.1).report.gee);
}

TEST_CASE("worst-case sweep uses the shaping override")
{
    ExperimentSpec spec;
    spec.base = config(2, 2, 2, 1);
    spec.variable = SweepVariable::Eps;
    spec.solver = SolverKind::WorstCase;
    spec.values = {0.0, 0.2};
    spec.shaping = {{1.0, 2.0}, {2.0, 1.0}};
    const auto model = spec.uncertainty(spec.base, 0.2);
    CHECK(model.B(0, 1)(1, 1) == cd(2.0, 0.0));
    const SweepResult r = run_sweep(spec);
    REQUIRE(r.rows.size() == 4);
    CHECK(r.rows[1].gee <= r.rows[0].gee + 1e-9);
    CHECK(r.rows[1].gee <= r.rows[1].nominal_gee + 1e-9);
}

TEST_CASE("self check passes")
{
    for (const auto& c : run_self_check(1)) {
        INFO(c.name << " " << c.detail);
        CHECK(c.passed);
    }
}

TEST_CASE("channel set JSON")
{
    const SystemConfig cfg = config(2, 3, 2, 1);
    const ChannelSet H = generate_channels(cfg, 4);
    const json j = H;
    CHECK(j.at("H")[0][1].size() == 2);
    CHECK(j.at("H")[0][1][0].size() == 3);
    CHECK(j.at("H")[0][1][0][0].size() == 2);
    const ChannelSet back = j.get<ChannelSet>();
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k)
            CHECK(back(i, k) == H(i, k));

    const json scalar = json::parse(R"({"H": [[[[[1.5, -2]]]]]})");
    CHECK(scalar.get<ChannelSet>()(0, 0)(0, 0) == cd(1.5, -2.0));
    CHECK_THROWS(json::parse(R"({"H": [[[[[1, 2, 3]]]]]})").get<ChannelSet>());
    CHECK_THROWS(json::parse(R"({"K": 2, "H": [[[[[1, 2]]]]]})").get<ChannelSet>());
}

TEST_CASE("report JSON")
{
    GeeReport r;
    r.rates = {1.0, 2.5};
    r.total_power = 3.0;
    r.gee = 3.5 / 3.0;
    r.trace = {{0.1, -1.0}, {0.2, -0.5}};
    r.iterations = 2;
    r.converged = false;
    r.warning = "cap";
    const GeeReport back = json(r).get<GeeReport>();
    CHECK(back.rates == r.rates);
    CHECK(back.gee == r.gee);
    CHECK(back.trace == r.trace);
    CHECK(back.converged == false);
    CHECK(back.warning == "cap");
}

TEST_CASE("SDP problem and solution JSON")
{
    sdp::SdpProblem p;
    const Index x = p.add_real("x").offset;
    const auto g = p.add_hermitian("G", 2);
    p.objective(x) = 1.0;
    std::vector<Index> vars{x};
    for (Index k = 0; k < g.size(); ++k)
        vars.push_back(g.offset + k);
    p.constraints.push_back(sdp::AffineHermitian::from_function(p.num_scalars(), vars, [&](const VecR& y) {
        MatC F = MatC::Zero(3, 3);
        F(0, 0) = y(x);
        F.block(1, 1, 2, 2) = MatC::Identity(2, 2) - g.value(y);
        return F;
    }));
    p.logdet.push_back({1.0, sdp::AffineHermitian::from_function(p.num_scalars(), vars,
                                                                 [&](const VecR& y) { return g.value(y); })});
    p.sense = sdp::Sense::Maximize;

    const sdp::SdpProblem back = json(p).get<sdp::SdpProblem>();
    CHECK(back.sense == p.sense);
    CHECK(back.num_scalars() == p.num_scalars());
    CHECK(back.variable("G").kind == sdp::VariableKind::Hermitian);
    CHECK(back.objective == p.objective);
    VecR y = VecR::Zero(p.num_scalars());
    y(0) = 0.4;
    y(2) = 0.2;
    y(4) = -0.3;
    CHECK(testutil::max_abs_diff(back.constraints[0].evaluate(y), p.constraints[0].evaluate(y)) == 0.0);
    CHECK(testutil::max_abs_diff(back.logdet[0].map.evaluate(y), p.logdet[0].map.evaluate(y)) == 0.0);

    sdp::SdpSolution s;
    s.assignment = y;
    s.objective_value = 1.25;
    s.status = sdp::SdpStatus::MaxIterations;
    s.kkt = {1e-9, 2e-9, 3e-9};
    s.iterations = 17;
    const sdp::SdpSolution sb = json(s).get<sdp::SdpSolution>();
    CHECK(sb.assignment == s.assignment);
    CHECK(sb.status == s.status);
    CHECK(sb.kkt.gap == s.kkt.gap);
    CHECK(sb.iterations == 17);
}
