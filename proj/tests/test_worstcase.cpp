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

#include "geeprec/worstcase.hpp"

#include "geeprec/stat_robust.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <numbers>

using namespace testutil;

namespace {

struct Instance {
    SystemConfig cfg;
    ChannelSet H;
    PrecoderSet V;
    DecoderSet U;
    WeightSet G;
};

Instance make_instance(int K, int M, int N, int d, std::uint64_t seed)
{
    Instance in{config(K, M, N, d), {}, {}, {}, {}};
    in.H = generate_channels(in.cfg, seed);
    Rng rng(seed + 1000);
    in.V = random_feasible_precoders(in.cfg, rng);
    in.U = random_decoders(in.cfg, rng);
    in.G = random_weights(in.cfg, rng);
    return in;
}

// largest ||e + E vec(D^H)||^2 over random D with ||B D||_F = eps
double probe(const VecC& e, const MatC& E, const MatC& B, double eps, int M, Rng& rng, int samples = 1000)
{
    const Index N = B.rows();
    double worst = e.squaredNorm();
    for (int s = 0; s < samples; ++s) {
        MatC Z = random_matrix(N, M, rng);
        Z *= eps / Z.norm();
        const MatC D = B.fullPivLu().solve(Z);
        worst = std::max(worst, (e + E * error_coordinates(D)).squaredNorm());
    }
    return worst;
}

} // namespace

TEST_CASE("error term shapes")
{
    const Instance in = make_instance(3, 4, 2, 2, 1);
    const ErrorTermPair t = assemble_error_terms(in.H, in.V, in.U, in.G, in.cfg);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const Index l = i == j ? 4 + 2 * 2 : 4;
            CHECK(error_term_length(in.cfg, i, j) == l);
            CHECK(t.e(i, j).size() == l);
            CHECK(t.E(i, j).rows() == l);
            CHECK(t.E(i, j).cols() == 8);
        }
    Instance bad = in;
    bad.G.G[1] = MatC::Identity(3, 3);
    CHECK_THROWS_AS(assemble_error_terms(bad.H, bad.V, bad.U, bad.G, bad.cfg), DimensionError);
}

TEST_CASE("trace decomposition identity")
{
    for (const auto& [K, M, N, d] : {std::array{2, 2, 2, 1}, std::array{3, 3, 2, 2}, std::array{2, 2, 3, 1}}) {
        const Instance in = make_instance(K, M, N, d, 10 + K + M + N + d);
        const ErrorTermPair t = assemble_error_terms(in.H, in.V, in.U, in.G, in.cfg);
        for (int i = 0; i < K; ++i) {
            double sum = 0.0;
            for (int j = 0; j < K; ++j)
                sum += t.e(i, j).squaredNorm();
            CHECK(std::abs(sum - weighted_mse(in.H, in.V, in.U, in.G, in.cfg, i)) <= 1e-10);
        }
        for (std::uint64_t s = 0; s < 20; ++s) {
            const ErrorRealization D = sample_error(in.cfg, StochasticError{0.3}, s);
            const ChannelSet Ht = compose(in.H, D);
            for (int i = 0; i < K; ++i) {
                double sum = 0.0;
                for (int j = 0; j < K; ++j)
                    sum += (t.e(i, j) + t.E(i, j) * error_coordinates(D.Delta(i, j))).squaredNorm();
                CHECK(std::abs(sum - weighted_mse(Ht, in.V, in.U, in.G, in.cfg, i)) <= 1e-10);
            }
        }
    }
}

TEST_CASE("power LMI")
{
    const MatC F0 = build_power_lmi(MatC::Zero(2, 1), 0.5);
    CHECK(F0.rows() == 3);
    CHECK(max_abs_diff(F0, (VecC(3) << 0.5, 1.0, 1.0).finished().asDiagonal().toDenseMatrix()) == 0.0);

    const double P = 0.8;
    const MatC Fb = build_power_lmi(MatC::Constant(1, 1, std::sqrt(P)), P);
    CHECK(std::abs(Fb.determinant()) <= 1e-14);
    CHECK(min_eigenvalue(Fb) >= -1e-14);

    Rng rng(2);
    MatC V = random_matrix(3, 2, rng);
    V *= std::sqrt(P + 0.01) / V.norm();
    const MatC Fo = build_power_lmi(V, P);
    CHECK(Fo.rows() == 7);
    CHECK(min_eigenvalue(Fo) < 0.0);
    V *= std::sqrt((P - 0.01) / (P + 0.01));
    CHECK(min_eigenvalue(build_power_lmi(V, P)) > 0.0);
}

TEST_CASE("robust LMI structure and the zero-radius case")
{
    const Instance in = make_instance(2, 3, 2, 1, 3);
    const ErrorTermPair t = assemble_error_terms(in.H, in.V, in.U, in.G, in.cfg);
    Rng rng(4);
    const MatC B = random_hpd(2, rng);
    const MatC F = build_robust_lmi(t.e(0, 0), t.E(0, 0), B, 0.3, 5.0, 1.0, 3);
    CHECK(F.rows() == 1 + t.e(0, 0).size() + 6);
    CHECK(max_abs_diff(F, F.adjoint()) == 0.0);

    const double e2 = t.e(1, 0).squaredNorm();
    CHECK(min_eigenvalue(build_robust_lmi(t.e(1, 0), t.E(1, 0), B, 0.0, e2 + 1e-9, 0.0, 3)) >= -1e-12);
    CHECK(min_eigenvalue(build_robust_lmi(t.e(1, 0), t.E(1, 0), B, 0.0, e2 - 1e-6, 0.0, 3)) < 0.0);
    CHECK(worst_case_bound(t.e(1, 0), t.E(1, 0), 0.0) == e2);

    CHECK_THROWS_AS(build_robust_lmi(t.e(1, 0), t.E(1, 0), MatC::Zero(2, 2), 0.1, 1.0, 1.0, 3), ShapingMatrixError);
}

TEST_CASE("scalar S-procedure instance")
{
    const VecC e = VecC::Constant(1, cd(1.0, 0.0));
    const MatC E = MatC::Constant(1, 1, cd(1.0, 0.0));
    CHECK(worst_case_bound(e, E, 0.5) == doctest::Approx(2.25).epsilon(1e-12));
    CHECK(oracle::scalar_lmi_min_lambda(cd(1, 0), cd(1, 0), 0.5, 4.0) == doctest::Approx(2.25).epsilon(1e-2));
    CHECK(oracle::scalar_worst_case_grid(cd(1, 0), cd(1, 0), 0.5) == doctest::Approx(2.25).epsilon(1e-9));

    // the library block agrees with the oracle's 3 x 3 block
    double mu = 0.0;
    const double lam = worst_case_bound(e, E, 0.5, &mu);
    const MatC F = build_robust_lmi(e, E, MatC::Identity(1, 1), 0.5, lam + 1e-9, mu, 1);
    CHECK(min_eigenvalue(F) >= -1e-9);
    CHECK(min_eigenvalue(build_robust_lmi(e, E, MatC::Identity(1, 1), 0.5, lam - 1e-3, mu, 1)) < 0.0);
}

TEST_CASE("exact worst-case bound against random probing")
{
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const VecC e = random_matrix(3, 1, rng);
        const MatC A = random_matrix(3, 4, rng);
        const double eps = 0.5 * rng.uniform();
        const double bound = worst_case_bound(e, A, eps);
        double worst = e.squaredNorm();
        for (int s = 0; s < 2000; ++s) {
            VecC x = random_matrix(4, 1, rng);
            x *= eps / x.norm();
            worst = std::max(worst, (e + A * x).squaredNorm());
        }
        CHECK(worst <= bound + 1e-10);
        CHECK(worst >= 0.9 * bound); // probing gets close in four complex dimensions
    }
    // hard case: e orthogonal to the range of A
    VecC e = VecC::Zero(2);
    e(0) = 1.0;
    MatC A = MatC::Zero(2, 2);
    A(1, 1) = 2.0;
    CHECK(worst_case_bound(e, A, 0.5) == doctest::Approx(1.0 + 1.0).epsilon(1e-9));
    CHECK(worst_case_bound(e, MatC::Zero(2, 2), 0.5) == 1.0);
}

TEST_CASE("steps at zero radius match the non-robust WMMSE updates")
{
    SystemConfig cfg = config(1, 2, 2, 1);
    const ChannelSet H = generate_channels(cfg, 6);
    const NormBoundedError model = NormBoundedError::spherical(1, 2, 0.0);
    Rng rng(7);
    const PrecoderSet V = random_feasible_precoders(cfg, rng);
    const DecoderSet U = mmse_receivers(H, V, cfg);
    const WeightSet G = nominal_weights(H, V, U, cfg);
    const double eta = 0.4;

    // V: min tr(W MSE) + eta rho ||V||^2 over the power ball
    const MatC W = G.G[0] * G.G[0].adjoint();
    const MatC Psi = H(0, 0).adjoint() * U.U[0] * W * U.U[0].adjoint() * H(0, 0);
    const VecC b = -vec((H(0, 0).adjoint() * U.U[0] * W).eval());
    const QcqpSolution q = solve_qcqp(Psi, b, eta, cfg.rho, cfg.P_m);
    const auto vs = solve_v_step(H, cfg, model, eta, V, U, G);
    CHECK((vec(vs.value.V[0]) - q.x).norm() <= 1e-4);
    CHECK(vs.objective_after >= vs.objective_before - 1e-6);

    // U: the MMSE receiver
    const auto us = solve_u_step(H, cfg, model, eta, vs.value, U, G);
    CHECK(max_abs_diff(us.value.U[0], mmse_receiver(H, vs.value, cfg, 0)) <= 1e-4);
    CHECK(us.objective_after >= us.objective_before - 1e-6);

    // G: W = (MSE ln2)^{-1}
    const auto gs = solve_g_step(H, cfg, model, eta, vs.value, us.value, G);
    const MatC Wn = gs.value.G[0] * gs.value.G[0].adjoint();
    const MatC target = (std::numbers::ln2 * mse_matrix(H, vs.value, us.value, cfg, 0)).inverse();
    CHECK(max_abs_diff(Wn, target) <= 1e-4);
    CHECK(gs.objective_after >= gs.objective_before - 1e-6);
}

TEST_CASE("robust steps are monotone and their multipliers certify the bound")
{
    const Instance in = make_instance(2, 2, 2, 1, 8);
    NormBoundedError model = NormBoundedError::spherical(2, 2, 0.2);
    Rng rng(9);
    model.B(0, 1) = random_hpd(2, rng);
    const double eta = 0.3;

    auto certify = [&](const PrecoderSet& V, const DecoderSet& U, const WeightSet& G, const RobustAuxiliaries& aux) {
        const ErrorTermPair t = assemble_error_terms(in.H, V, U, G, in.cfg);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                CHECK(aux.lambda(i, j) >= 0.0);
                CHECK(aux.mu(i, j) >= 0.0);
                CHECK(probe(t.e(i, j), t.E(i, j), model.B(i, j), model.eps(i, j), in.cfg.M, rng) <=
                      aux.lambda(i, j) + 1e-7);
            }
    };

    const auto vs = solve_v_step(in.H, in.cfg, model, eta, in.V, in.U, in.G);
    CHECK(vs.objective_after >= vs.objective_before - 1e-6);
    certify(vs.value, in.U, in.G, vs.aux);
    for (const auto& v : vs.value.V)
        CHECK(v.squaredNorm() <= in.cfg.P_m + 1e-9);

    const auto us = solve_u_step(in.H, in.cfg, model, eta, vs.value, in.U, in.G);
    CHECK(us.objective_after >= us.objective_before - 1e-6);
    certify(vs.value, us.value, in.G, us.aux);

    const auto gs = solve_g_step(in.H, in.cfg, model, eta, vs.value, us.value, in.G);
    CHECK(gs.objective_after >= gs.objective_before - 1e-6);
    certify(vs.value, us.value, gs.value, gs.aux);
    for (const auto& g : gs.value.G)
        CHECK(std::abs(g.determinant()) > 0.0);
}

TEST_CASE("scalar G-step matches a one-dimensional search")
{
    const Instance in = make_instance(2, 2, 2, 1, 11);
    const NormBoundedError model = NormBoundedError::spherical(2, 2, 0.15);
    const auto gs = solve_g_step(in.H, in.cfg, model, 0.0, in.V, in.U, in.G);
    for (int i = 0; i < 2; ++i) {
        auto f = [&](double g) {
            WeightSet G = in.G;
            G.G[i] = MatC::Constant(1, 1, cd(g, 0.0));
            const auto aux = robust_bounds(in.H, in.V, in.U, G, in.cfg, model);
            return 2.0 * std::log2(g) - aux.lambda(i, 0) - aux.lambda(i, 1);
        };
        const double g = oracle::golden_max(f, 1e-3, 10.0);
        CHECK(std::abs(gs.value.G[i](0, 0)) == doctest::Approx(g).epsilon(1e-4));
    }
}

TEST_CASE("worst-case pipeline")
{
    const SystemConfig cfg = reference_config(3);
    const ChannelSet H = generate_channels(cfg, 12);

    const auto zero = run_worstcase(H, cfg, NormBoundedError::spherical(3, 3, 0.0));
    const auto stat = run_statistical(H, cfg, 0.0);
    CHECK(std::abs(zero.report.gee - stat.report.gee) <= 1e-3);

    double prev = 1e300;
    for (double eps : {0.0, 0.1, 0.2, 0.4}) {
        const auto res = eps == 0.0 ? zero : run_worstcase(H, cfg, NormBoundedError::spherical(3, 3, eps));
        CHECK(res.report.gee <= prev + 1e-9);
        prev = res.report.gee;
        const double nominal = gee(H, res.precoders, mmse_receivers(H, res.precoders, cfg), cfg).gee;
        CHECK(res.report.gee <= nominal + 1e-9);
        for (const auto& v : res.precoders.V)
            CHECK(v.squaredNorm() <= cfg.P_m + 1e-9);
        for (std::size_t t = 1; t < res.dinkelbach.etas.size(); ++t)
            CHECK(res.dinkelbach.etas[t] >= res.dinkelbach.etas[t - 1] - 1e-6);
    }
}
