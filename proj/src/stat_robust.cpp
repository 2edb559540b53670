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

#include "geeprec/channel.hpp"
#include "geeprec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace geeprec {

namespace {

double sum_power(const PrecoderSet& precoders)
{
    double p = 0.0;
    for (const auto& V : precoders.V)
        p += V.squaredNorm();
    return p;
}

Eigen::LLT<MatC> factor_pd(const MatC& A, const char* what)
{
    Eigen::LLT<MatC> llt(hermitian_part(A));
    if (llt.info() != Eigen::Success)
        throw SolverError(std::string(what) + " is not positive definite");
    return llt;
}

} // namespace

MatC expected_covariance(const ChannelSet& estimates, const PrecoderSet& precoders, const SystemConfig& cfg, int k,
                         double sigma_delta2)
{
    MatC C = interference_covariance(estimates, precoders, cfg, k);
    if (sigma_delta2 > 0.0)
        C.diagonal().array() += sigma_delta2 * sum_power(precoders);
    return C;
}

MatC expected_mmse_receiver(const ChannelSet& estimates, const PrecoderSet& precoders, const SystemConfig& cfg, int k,
                            double sigma_delta2)
{
    const MatC HV = estimates(k, k) * precoders.V[k];
    MatC T = expected_covariance(estimates, precoders, cfg, k, sigma_delta2);
    T.noalias() += HV * HV.adjoint();
    return factor_pd(T, "expected receive covariance").solve(HV);
}

double expected_rate(const ChannelSet& estimates, const PrecoderSet& precoders, const SystemConfig& cfg, int k,
                     double sigma_delta2)
{
    const MatC HV = estimates(k, k) * precoders.V[k];
    const MatC C = expected_covariance(estimates, precoders, cfg, k, sigma_delta2);
    const MatC S = MatC::Identity(cfg.d, cfg.d) + HV.adjoint() * factor_pd(C, "expected covariance").solve(HV);
    return std::max(0.0, log2_det_hpd(S));
}

double statistical_objective(const ChannelSet& estimates, const PrecoderSet& precoders, const SystemConfig& cfg,
                             double sigma_delta2, double eta)
{
    double num = 0.0;
    for (int k = 0; k < cfg.K; ++k)
        num += cfg.weight(k) * expected_rate(estimates, precoders, cfg, k, sigma_delta2);
    return num - eta * total_power(precoders, cfg);
}

SurrogateData build_surrogate(const ChannelSet& estimates, const PrecoderSet& prev_precoders, const SystemConfig& cfg,
                              double sigma_delta2)
{
    check_channels(estimates, cfg);
    check_precoders(prev_precoders, cfg);
    const int K = cfg.K;
    SurrogateData sur;
    sur.F12.resize(K);
    sur.F22.resize(K);
    sur.W.resize(K);
    sur.Psi.assign(K, MatC::Zero(cfg.M, cfg.M));
    sur.b.resize(K);

    for (int i = 0; i < K; ++i) {
        const MatC HV = estimates(i, i) * prev_precoders.V[i];
        const auto llt = factor_pd(expected_covariance(estimates, prev_precoders, cfg, i, sigma_delta2),
                                   "interference-plus-noise covariance");
        const MatC CinvHV = llt.solve(HV); // N x d
        sur.F12[i] = -CinvHV.adjoint();
        sur.W[i] = hermitian_part((MatC::Identity(cfg.d, cfg.d) + HV.adjoint() * CinvHV).eval());
        const auto wllt = factor_pd(sur.W[i], "MMSE weight");
        sur.F22[i] = hermitian_part((sur.F12[i].adjoint() * wllt.solve(sur.F12[i])).eval());
        const MatC Bmat = cfg.weight(i) * estimates(i, i).adjoint() * sur.F12[i].adjoint(); // M x d
        sur.b[i] = vec(Bmat);
    }

    for (int i = 0; i < K; ++i) {
        MatC& Psi = sur.Psi[i];
        for (int l = 0; l < K; ++l) {
            const double a = cfg.weight(l);
            if (a == 0.0)
                continue;
            Psi.noalias() += a * estimates(l, i).adjoint() * sur.F22[l] * estimates(l, i);
            if (sigma_delta2 > 0.0)
                Psi.diagonal().array() += a * sigma_delta2 * std::real(sur.F22[l].trace());
        }
        Psi = hermitian_part(Psi);
    }
    return sur;
}

double surrogate_objective(const SurrogateData& sur, const PrecoderSet& precoders, const SystemConfig& cfg,
                           double eta)
{
    const double ln2 = std::numbers::ln2;
    double quad = 0.0;
    double constant = 0.0;
    for (int i = 0; i < cfg.K; ++i) {
        const MatC& V = precoders.V[i];
        // x^H (I_d (x) Psi) x = tr(V^H Psi V)
        quad += std::real((V.adjoint() * sur.Psi[i] * V).trace()) + 2.0 * std::real(sur.b[i].dot(vec(V)));
        const double a = cfg.weight(i);
        constant += a * (ln2 * log2_det_hpd(sur.W[i]) + cfg.d) / ln2;
        constant -= a * (std::real(sur.W[i].trace()) + cfg.sigma2 * std::real(sur.F22[i].trace())) / ln2;
    }
    return constant - quad / ln2 - eta * total_power(precoders, cfg);
}

double qcqp_objective(const MatC& Psi, const VecC& b, double eta, double rho, const VecC& x)
{
    const Index M = Psi.rows();
    const MatC X = unvec(x, M, x.size() / M);
    return std::real((X.adjoint() * Psi * X).trace()) + eta * rho * x.squaredNorm() + 2.0 * std::real(x.dot(b));
}

QcqpSolution solve_qcqp(const MatC& Psi, const VecC& b, double eta, double rho, double P)
{
    const Index M = Psi.rows();
    if (Psi.cols() != M || M == 0 || b.size() % M != 0)
        throw DimensionError("QCQP: b must have length M*d for an M x M Psi");
    if (!(P > 0.0) || !(eta >= 0.0) || !(rho >= 0.0))
        throw ConfigError("QCQP: need P > 0, eta >= 0, rho >= 0");
    const Index d = b.size() / M;

    QcqpSolution sol;
    sol.x = VecC::Zero(b.size());
    const double bnorm = b.norm();
    if (bnorm == 0.0)
        return sol;

    // I_d (x) Psi = (I (x) Q) (I (x) L) (I (x) Q)^H, so every evaluation of the
    // secular function is O(Md) after one M x M eigendecomposition.
    Eigen::SelfAdjointEigenSolver<MatC> es(hermitian_part(Psi));
    const VecR shift = (es.eigenvalues().array().max(0.0) + eta * rho).matrix();
    const MatC coeff = es.eigenvectors().adjoint() * unvec(b, M, d); // M x d
    const MatR weight = coeff.cwiseAbs2();

    const double zero_tol = 1e-14 * (1.0 + shift.cwiseAbs().maxCoeff());
    auto secular = [&](double lambda) {
        double g = 0.0;
        for (Index c = 0; c < d; ++c)
            for (Index m = 0; m < M; ++m) {
                const double den = shift(m) + lambda;
                if (weight(m, c) == 0.0)
                    continue;
                if (den <= zero_tol)
                    return std::numeric_limits<double>::infinity();
                g += weight(m, c) / (den * den);
            }
        return g;
    };
    auto solution_at = [&](double lambda) {
        MatC X(M, d);
        for (Index c = 0; c < d; ++c)
            for (Index m = 0; m < M; ++m) {
                const double den = shift(m) + lambda;
                X(m, c) = (weight(m, c) == 0.0 || den <= zero_tol) ? cd(0.0) : -coeff(m, c) / den;
            }
        return vec((es.eigenvectors() * X).eval());
    };

    if (secular(0.0) <= P) {
        sol.x = solution_at(0.0);
        sol.lambda = 0.0;
        return sol;
    }

    // g is strictly decreasing on (0, inf) and g(||b||/sqrt(P)) <= P.
    double lo = 0.0;
    double hi = bnorm / std::sqrt(P);
    while (hi - lo > 1e-10 * std::max(hi, 1e-300)) {
        const double mid = 0.5 * (lo + hi);
        if (secular(mid) > P)
            lo = mid;
        else
            hi = mid;
    }
    // Newton on 1/sqrt(g) - 1/sqrt(P), which is nearly linear in lambda.
    double lambda = hi;
    for (int it = 0; it < 5; ++it) {
        double g = 0.0, dg = 0.0;
        for (Index c = 0; c < d; ++c)
            for (Index m = 0; m < M; ++m) {
                const double den = shift(m) + lambda;
                if (weight(m, c) == 0.0)
                    continue;
                g += weight(m, c) / (den * den);
                dg += -2.0 * weight(m, c) / (den * den * den);
            }
        const double phi = 1.0 / std::sqrt(g) - 1.0 / std::sqrt(P);
        const double dphi = -0.5 * dg / (g * std::sqrt(g));
        if (!(dphi > 0.0))
            break;
        const double next = lambda - phi / dphi;
        if (!(next > lo) || !(next < 2.0 * hi + 1.0))
            break;
        lambda = next;
    }
    sol.lambda = lambda;
    sol.x = solution_at(lambda);
    const double n2 = sol.x.squaredNorm();
    if (n2 > P)
        sol.x *= std::sqrt(P / n2);
    return sol;
}

PrecoderSet initial_precoders(const ChannelSet& estimates, const SystemConfig& cfg)
{
    PrecoderSet out;
    for (int k = 0; k < cfg.K; ++k) {
        Eigen::JacobiSVD<MatC> svd(estimates(k, k), Eigen::ComputeFullV);
        out.V.push_back(std::sqrt(cfg.P_m / cfg.d) * svd.matrixV().leftCols(cfg.d));
    }
    return out;
}

PrecoderSet random_precoders(const SystemConfig& cfg, std::uint64_t seed)
{
    PrecoderSet out;
    for (int k = 0; k < cfg.K; ++k) {
        Rng rng(derive_seed(seed, link_stream(3, k, k)));
        MatC V = random_complex_matrix(cfg.M, cfg.d, 1.0, rng);
        V *= std::sqrt(cfg.P_m) / V.norm();
        out.V.push_back(std::move(V));
    }
    return out;
}

namespace {

StatisticalResult run_from(const ChannelSet& estimates, const SystemConfig& cfg, double sigma_delta2,
                           const StatisticalOptions& opts, PrecoderSet start)
{
    const double ln2 = std::numbers::ln2;
    auto numerator = [&](const PrecoderSet& P) { return statistical_objective(estimates, P, cfg, sigma_delta2, 0.0); };

    std::vector<std::pair<double, double>> trace;
    PrecoderSet current = std::move(start);
    bool mami_capped = false;

    auto inner = [&](double eta) {
        double obj = statistical_objective(estimates, current, cfg, sigma_delta2, eta);
        trace.emplace_back(eta, obj);
        int it = 0;
        for (; it < opts.mami_max_iter; ++it) {
            const SurrogateData sur = build_surrogate(estimates, current, cfg, sigma_delta2);
            PrecoderSet next;
            next.V.reserve(static_cast<std::size_t>(cfg.K));
            for (int i = 0; i < cfg.K; ++i) {
                // the minorant is in nats, the power penalty in bits
                const QcqpSolution q = solve_qcqp(sur.Psi[i], sur.b[i], eta * ln2, cfg.rho, cfg.P_m);
                next.V.push_back(unvec(q.x, cfg.M, cfg.d));
            }
            const double next_obj = statistical_objective(estimates, next, cfg, sigma_delta2, eta);
            const double change = next_obj - obj;
            if (change < 0.0) // only roundoff can get here
                break;
            current = std::move(next);
            obj = next_obj;
            trace.emplace_back(eta, obj);
            if (change <= opts.mami_rel_tol * std::abs(obj) || change <= 1e-14)
                break;
        }
        if (it == opts.mami_max_iter)
            mami_capped = true;
        return FractionalStep<PrecoderSet>{current, numerator(current), total_power(current, cfg)};
    };

    const double eta0 = numerator(current) / total_power(current, cfg);
    auto [precoders, ftrace] = solve_fractional(inner, eta0, opts.dinkelbach);

    StatisticalResult res;
    res.precoders = std::move(precoders);
    for (int k = 0; k < cfg.K; ++k)
        res.decoders.U.push_back(expected_mmse_receiver(estimates, res.precoders, cfg, k, sigma_delta2));
    res.report.total_power = total_power(res.precoders, cfg);
    double num = 0.0;
    for (int k = 0; k < cfg.K; ++k) {
        res.report.rates.push_back(expected_rate(estimates, res.precoders, cfg, k, sigma_delta2));
        num += cfg.weight(k) * res.report.rates.back();
    }
    res.report.gee = num / res.report.total_power;
    res.report.trace = std::move(trace);
    res.report.iterations = ftrace.iterations;
    res.report.converged = ftrace.converged;
    if (!ftrace.converged)
        res.report.warning = "Dinkelbach did not reach tolerance within the iteration cap";
    else if (mami_capped)
        res.report.warning = "MaMi iteration cap reached in at least one inner loop";
    res.dinkelbach = std::move(ftrace);
    return res;
}

} // namespace

StatisticalResult run_statistical(const ChannelSet& estimates, const SystemConfig& cfg, double sigma_delta2,
                                  const StatisticalOptions& opts)
{
    cfg.validate();
    check_channels(estimates, cfg);
    if (!(sigma_delta2 >= 0.0))
        throw ConfigError("error variance must be non-negative");
    if (!(total_power(initial_precoders(estimates, cfg), cfg) > 0.0))
        throw DegeneratePowerError("total consumed power is zero");

    StatisticalResult best = run_from(estimates, cfg, sigma_delta2, opts, initial_precoders(estimates, cfg));
    for (int r = 0; r < opts.restarts; ++r) {
        StatisticalResult cand =
            run_from(estimates, cfg, sigma_delta2, opts, random_precoders(cfg, derive_seed(opts.seed, r)));
        if (cand.report.gee > best.report.gee)
            best = std::move(cand);
    }
    return best;
}

} // namespace geeprec
