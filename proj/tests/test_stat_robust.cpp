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

#include "geeprec/stat_robust.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <numbers>

using namespace testutil;

TEST_CASE("surrogate shapes and the sigma_delta2 = 0 form")
{
    SystemConfig cfg = config(2, 3, 2, 2);
    cfg.alpha = {1.0, 0.5};
    const ChannelSet H = generate_channels(cfg, 1);
    Rng rng(2);
    const PrecoderSet V = random_feasible_precoders(cfg, rng);
    const SurrogateData sur = build_surrogate(H, V, cfg, 0.0);
    for (int i = 0; i < 2; ++i) {
        CHECK(sur.Psi[i].rows() == 3);
        CHECK(sur.Psi[i].cols() == 3);
        CHECK(sur.b[i].size() == 6);
        CHECK(sur.F12[i].rows() == 2);
        CHECK(sur.F12[i].cols() == 2);
        CHECK(sur.F22[i].rows() == 2);
        MatC expect = MatC::Zero(3, 3);
        for (int l = 0; l < 2; ++l)
            expect += cfg.weight(l) * H(l, i).adjoint() * sur.F22[l] * H(l, i);
        CHECK(max_abs_diff(sur.Psi[i], expect) <= 1e-12);
        CHECK(min_eigenvalue(sur.Psi[i]) >= -1e-12);
        CHECK(min_eigenvalue(sur.F22[i]) >= -1e-12);
        CHECK((sur.b[i] - vec((cfg.weight(i) * H(i, i).adjoint() * sur.F12[i].adjoint()).eval())).norm() <= 1e-12);
    }

    const SurrogateData noisy = build_surrogate(H, V, cfg, 0.1);
    for (int i = 0; i < 2; ++i) {
        MatC expect = MatC::Zero(3, 3);
        for (int l = 0; l < 2; ++l)
            expect += cfg.weight(l) * (H(l, i).adjoint() * noisy.F22[l] * H(l, i) +
                                       0.1 * std::real(noisy.F22[l].trace()) * MatC::Identity(3, 3));
        CHECK(max_abs_diff(noisy.Psi[i], expect) <= 1e-12);
    }
}

TEST_CASE("surrogate is tangent at the expansion point and minorizes nearby")
{
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const SystemConfig cfg = config(2, 2, 2, 1);
        const ChannelSet H = generate_channels(cfg, 100 + trial);
        const PrecoderSet V = random_feasible_precoders(cfg, rng);
        const double s2 = 0.2 * rng.uniform();
        const double eta = rng.uniform();
        const SurrogateData sur = build_surrogate(H, V, cfg, s2);
        CHECK(std::abs(surrogate_objective(sur, V, cfg, eta) - statistical_objective(H, V, cfg, s2, eta)) <= 1e-8);
        for (int p = 0; p < 5; ++p) {
            PrecoderSet W = V;
            for (auto& v : W.V)
                v += 0.1 * random_matrix(cfg.M, cfg.d, rng);
            CHECK(surrogate_objective(sur, W, cfg, eta) <= statistical_objective(H, W, cfg, s2, eta) + 1e-8);
        }
    }
}

TEST_CASE("qcqp closed forms")
{
    Rng rng(4);
    const VecC b = random_matrix(3, 1, rng);
    const double P = 0.7;
    const QcqpSolution q = solve_qcqp(MatC::Zero(3, 3), b, 0.0, 1.0, P);
    CHECK(q.lambda == doctest::Approx(b.norm() / std::sqrt(P)).epsilon(1e-9));
    CHECK((q.x + std::sqrt(P) * b / b.norm()).norm() <= 1e-9);

    const QcqpSolution z = solve_qcqp(random_hpd(3, rng), VecC::Zero(3), 0.5, 2.0, P);
    CHECK(z.x.norm() == 0.0);
    CHECK(z.lambda == 0.0);

    const QcqpSolution degenerate = solve_qcqp(MatC::Zero(2, 2), VecC::Zero(2), 0.0, 1.0, 1.0);
    CHECK(degenerate.x.norm() == 0.0);

    // interior solution: lambda = 0 and x = -(Psi + eta rho I)^{-1} b
    const MatC Psi = random_hpd(2, rng) + 5.0 * MatC::Identity(2, 2);
    const VecC small = 0.01 * random_matrix(2, 1, rng);
    const QcqpSolution in = solve_qcqp(Psi, small, 0.2, 1.5, 1.0);
    CHECK(in.lambda == 0.0);
    CHECK((in.x + (Psi + 0.3 * MatC::Identity(2, 2)).ldlt().solve(small)).norm() <= 1e-12);

    CHECK_THROWS_AS(solve_qcqp(Psi, VecC::Zero(3), 0.1, 1.0, 1.0), DimensionError);
    CHECK_THROWS_AS(solve_qcqp(Psi, small, -1.0, 1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(solve_qcqp(Psi, small, 0.1, 1.0, 0.0), ConfigError);
}

TEST_CASE("qcqp matches projected gradient and satisfies KKT")
{
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Index M = 2;
        const Index d = 1 + trial % 2;
        const MatC A = random_matrix(M, M, rng);
        const MatC Psi = A * A.adjoint();
        const VecC b = random_matrix(M * d, 1, rng, 1.0 + 4.0 * rng.uniform());
        const double eta = rng.uniform(), rho = 1.0 + rng.uniform(), P = 1.0;
        const QcqpSolution q = solve_qcqp(Psi, b, eta, rho, P);
        const VecC ref = oracle::qcqp_projected_gradient(Psi, b, eta, rho, P, 20000);
        CHECK(qcqp_objective(Psi, b, eta, rho, q.x) <= qcqp_objective(Psi, b, eta, rho, ref) + 1e-6);
        CHECK(q.x.squaredNorm() <= P + 1e-9);
        CHECK(q.lambda >= 0.0);
        CHECK(q.lambda * std::abs(q.x.squaredNorm() - P) <= 1e-8);
        const MatC Q = kron(MatC::Identity(d, d), Psi) + (eta * rho + q.lambda) * MatC::Identity(M * d, M * d);
        CHECK((Q * q.x + b).norm() <= 1e-8 * b.norm());
    }
}

TEST_CASE("statistical pipeline beats its start and random precoders")
{
    const SystemConfig cfg = config(2, 3, 3, 1);
    const ChannelSet H = generate_channels(cfg, 6);
    const StatisticalResult res = run_statistical(H, cfg, 0.0);
    auto value = [&](const PrecoderSet& V) { return gee(H, V, mmse_receivers(H, V, cfg), cfg).gee; };
    CHECK(res.report.converged);
    CHECK(res.report.gee == doctest::Approx(value(res.precoders)).epsilon(1e-10));
    CHECK(res.report.gee >= value(initial_precoders(H, cfg)) - 1e-12);
    Rng rng(7);
    for (int t = 0; t < 50; ++t)
        CHECK(res.report.gee >= value(random_feasible_precoders(cfg, rng)));
    for (const auto& v : res.precoders.V)
        CHECK(v.squaredNorm() <= cfg.P_m + 1e-9);

    double last_eta = -1.0, last_obj = 0.0;
    for (const auto& [eta, obj] : res.report.trace) {
        if (eta == last_eta)
            CHECK(obj >= last_obj - 1e-6);
        last_eta = eta;
        last_obj = obj;
    }
    for (std::size_t t = 1; t < res.dinkelbach.etas.size(); ++t)
        CHECK(res.dinkelbach.etas[t] >= res.dinkelbach.etas[t - 1] - 1e-6);
}

TEST_CASE("single-antenna single-user pipeline matches a power grid")
{
    SystemConfig cfg = config(1, 1, 1, 1);
    cfg.sigma2 = 0.5;
    cfg.P_cir = 0.2;
    cfg.rho = 1.3;
    cfg.P_m = 2.0;
    const ChannelSet H = generate_channels(cfg, 8);
    const double g = std::norm(H(0, 0)(0, 0));
    double best = 0.0;
    for (int k = 0; k <= 20000; ++k) {
        const double p = cfg.P_m * k / 20000.0;
        best = std::max(best, std::log2(1.0 + g * p / cfg.sigma2) / (cfg.rho * p + cfg.P_cir));
    }
    CHECK(run_statistical(H, cfg, 0.0).report.gee == doctest::Approx(best).epsilon(1e-3));
}

TEST_CASE("statistical GEE falls with the error variance")
{
    const SystemConfig cfg = reference_config(4);
    const ChannelSet H = generate_channels(cfg, 9);
    double prev = 1e300;
    for (double s2 : {0.0, 0.05, 0.1, 0.15}) {
        const double g = run_statistical(H, cfg, s2).report.gee;
        CHECK(g <= prev + 1e-9);
        prev = g;
    }
}

TEST_CASE("expected quantities at zero variance reduce to the nominal ones")
{
    const SystemConfig cfg = config(2, 3, 2, 2);
    const ChannelSet H = generate_channels(cfg, 10);
    Rng rng(11);
    const PrecoderSet V = random_feasible_precoders(cfg, rng);
    const DecoderSet U = mmse_receivers(H, V, cfg);
    for (int k = 0; k < 2; ++k) {
        CHECK(expected_rate(H, V, cfg, k, 0.0) == doctest::Approx(user_rate(H, V, U, cfg, k)).epsilon(1e-12));
        CHECK(max_abs_diff(expected_mmse_receiver(H, V, cfg, k, 0.0), U.U[k]) <= 1e-12);
        CHECK(expected_rate(H, V, cfg, k, 0.3) < expected_rate(H, V, cfg, k, 0.0));
    }
    CHECK_THROWS_AS(run_statistical(H, cfg, -0.1), ConfigError);
}

TEST_CASE("random restarts never lower the result")
{
    const SystemConfig cfg = config(2, 3, 3, 1);
    const ChannelSet H = generate_channels(cfg, 12);
    StatisticalOptions opts;
    const double plain = run_statistical(H, cfg, 0.05, opts).report.gee;
    opts.restarts = 3;
    opts.seed = 4;
    CHECK(run_statistical(H, cfg, 0.05, opts).report.gee >= plain);
}
