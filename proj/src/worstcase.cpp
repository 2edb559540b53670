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

#include "geeprec/metrics.hpp"
#include "geeprec/stat_robust.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

namespace geeprec {

namespace {

constexpr double kLn2 = std::numbers::ln2;

void check_weights(const WeightSet& weights, const SystemConfig& cfg)
{
    if (static_cast<int>(weights.G.size()) != cfg.K)
        throw DimensionError("weight set must hold K matrices");
    for (const auto& G : weights.G)
        if (G.rows() != cfg.d || G.cols() != cfg.d)
            throw DimensionError("weight factors must be d x d");
}

void check_all(const ChannelSet& estimates, const PrecoderSet& precoders, const DecoderSet& decoders,
               const WeightSet& weights, const SystemConfig& cfg)
{
    check_channels(estimates, cfg);
    check_precoders(precoders, cfg);
    check_decoders(decoders, cfg);
    check_weights(weights, cfg);
}

// log2 det(G G^H) = 2 log2 |det G|
double log2_gram_det(const MatC& G)
{
    return 2.0 * std::log2(std::abs(G.determinant()));
}

} // namespace

Index error_term_length(const SystemConfig& cfg, int i, int j)
{
    const Index d2 = static_cast<Index>(cfg.d) * cfg.d;
    return i == j ? d2 + static_cast<Index>(cfg.N) * cfg.d : d2;
}

VecC error_coordinates(const MatC& Delta)
{
    return vec(Delta.adjoint());
}

void assemble_error_pair(const MatC& H_ij, const MatC& V_j, const MatC& U_i, const MatC& G_i, double sigma2,
                         bool own_link, VecC& e, MatC& E)
{
    const Index d = G_i.rows();
    const Index N = U_i.rows();
    const Index M = V_j.rows();
    const MatC UG = U_i * G_i;                           // N x d
    MatC core = V_j.adjoint() * H_ij.adjoint() * UG;     // d x d
    const MatC kr = kron(UG.transpose(), V_j.adjoint()); // d^2 x MN
    if (!own_link) {
        e = vec(core);
        E = kr;
        return;
    }
    core -= G_i;
    e.resize(d * d + N * d);
    e.head(d * d) = vec(core);
    e.tail(N * d) = std::sqrt(sigma2) * vec(UG);
    E = MatC::Zero(d * d + N * d, M * N);
    E.topRows(d * d) = kr;
}

ErrorTermPair assemble_error_terms(const ChannelSet& estimates, const PrecoderSet& precoders,
                                   const DecoderSet& decoders, const WeightSet& weights, const SystemConfig& cfg)
{
    check_all(estimates, precoders, decoders, weights, cfg);
    ErrorTermPair out{PairGrid<VecC>(cfg.K), PairGrid<MatC>(cfg.K)};
    for (int i = 0; i < cfg.K; ++i)
        for (int j = 0; j < cfg.K; ++j)
            assemble_error_pair(estimates(i, j), precoders.V[j], decoders.U[i], weights.G[i], cfg.sigma2, i == j,
                                out.e(i, j), out.E(i, j));
    return out;
}

double weighted_mse(const ChannelSet& channels, const PrecoderSet& precoders, const DecoderSet& decoders,
                    const WeightSet& weights, const SystemConfig& cfg, int i)
{
    const MatC W = weights.G[i] * weights.G[i].adjoint();
    return std::real((W * mse_matrix(channels, precoders, decoders, cfg, i)).trace());
}

MatC shaping_transform(const MatC& B, int M)
{
    Eigen::FullPivLU<MatC> lu(B);
    if (!lu.isInvertible())
        throw ShapingMatrixError("shaping matrix is singular");
    return kron(lu.inverse().transpose().eval(), MatC::Identity(M, M));
}

MatC build_power_lmi(const MatC& V, double P_m)
{
    const VecC x = vec(V);
    const Index n = x.size();
    MatC F = MatC::Identity(n + 1, n + 1);
    F(0, 0) = P_m;
    F.block(1, 0, n, 1) = x;
    F.block(0, 1, 1, n) = x.adjoint();
    return F;
}

MatC build_robust_lmi(const VecC& e, const MatC& E, const MatC& B, double eps, double lambda, double mu, int M)
{
    const Index l = e.size();
    if (E.rows() != l)
        throw DimensionError("E must have as many rows as e");
    const MatC Bt = shaping_transform(B, M);
    if (Bt.rows() != E.cols())
        throw DimensionError("E must have M N columns");
    const Index c = E.cols();
    const Index n = 1 + l + c;
    MatC F = MatC::Zero(n, n);
    F(0, 0) = lambda - mu;
    F.block(1, 0, l, 1) = e;
    F.block(0, 1, 1, l) = e.adjoint();
    F.block(1, 1, l, l).setIdentity();
    const MatC off = -eps * E * Bt;
    F.block(1, 1 + l, l, c) = off;
    F.block(1 + l, 1, c, l) = off.adjoint();
    F.block(1 + l, 1 + l, c, c) = mu * MatC::Identity(c, c);
    return F;
}

double worst_case_bound(const VecC& e, const MatC& A, double eps, double* mu_out)
{
    const double e2 = e.squaredNorm();
    if (eps == 0.0 || A.size() == 0 || A.cwiseAbs().maxCoeff() == 0.0) {
        if (mu_out)
            *mu_out = 0.0;
        return e2;
    }
    Eigen::JacobiSVD<MatC> svd(A, Eigen::ComputeThinU);
    const VecR s = svd.singularValues();
    const VecR c = (svd.matrixU().adjoint() * e).cwiseAbs2();
    const double e2s = eps * eps;
    const double a = e2s * s(0) * s(0);
    const double skip = 1e-300 + 1e-28 * e2;

    // lambda(mu) = mu + |e|^2 + eps^2 sum_k s_k^2 c_k / (mu - eps^2 s_k^2), mu = a + tau
    auto slope = [&](double tau) {
        double acc = 0.0;
        for (Index k = 0; k < s.size(); ++k) {
            if (c(k) <= skip)
                continue;
            const double den = a + tau - e2s * s(k) * s(k);
            acc += e2s * s(k) * s(k) * c(k) / (den * den);
        }
        return 1.0 - acc;
    };
    auto value = [&](double tau) {
        double acc = a + tau + e2;
        for (Index k = 0; k < s.size(); ++k) {
            if (c(k) <= skip)
                continue;
            const double den = a + tau - e2s * s(k) * s(k);
            if (den <= 0.0)
                return std::numeric_limits<double>::infinity();
            acc += e2s * s(k) * s(k) * c(k) / den;
        }
        return acc;
    };

    double hi = eps * s(0) * std::sqrt(e2);
    double tau = 0.0;
    if (hi > 0.0 && slope(1e-300) < 0.0) {
        double lo = 0.0;
        for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (slope(mid) < 0.0)
                lo = mid;
            else
                hi = mid;
        }
        tau = hi;
    }
    if (mu_out)
        *mu_out = a + tau;
    return value(tau);
}

RobustAuxiliaries robust_bounds(const ChannelSet& estimates, const PrecoderSet& precoders, const DecoderSet& decoders,
                                const WeightSet& weights, const SystemConfig& cfg, const NormBoundedError& model)
{
    check_all(estimates, precoders, decoders, weights, cfg);
    model.validate(cfg.K, cfg.N);
    RobustAuxiliaries aux{PairGrid<double>(cfg.K, 0.0), PairGrid<double>(cfg.K, 0.0), PairGrid<MatC>(cfg.K)};
    VecC e;
    MatC E;
    for (int i = 0; i < cfg.K; ++i)
        for (int j = 0; j < cfg.K; ++j) {
            aux.Btilde(i, j) = shaping_transform(model.B(i, j), cfg.M);
            assemble_error_pair(estimates(i, j), precoders.V[j], decoders.U[i], weights.G[i], cfg.sigma2, i == j, e,
                                E);
            double mu = 0.0;
            aux.lambda(i, j) = worst_case_bound(e, E * aux.Btilde(i, j), model.eps(i, j), &mu);
            aux.mu(i, j) = mu;
        }
    return aux;
}

double robust_objective(const ChannelSet& estimates, const PrecoderSet& precoders, const DecoderSet& decoders,
                        const WeightSet& weights, const SystemConfig& cfg, const NormBoundedError& model, double eta)
{
    const RobustAuxiliaries aux = robust_bounds(estimates, precoders, decoders, weights, cfg, model);
    double obj = 0.0;
    for (int i = 0; i < cfg.K; ++i) {
        const double a = cfg.weight(i);
        if (a > 0.0) {
            double lam = 0.0;
            for (int j = 0; j < cfg.K; ++j)
                lam += aux.lambda(i, j);
            obj += a * (log2_gram_det(weights.G[i]) - lam);
        }
        obj -= eta * cfg.rho * precoders.V[i].squaredNorm();
    }
    return obj;
}

std::vector<double> worst_case_rates(const ChannelSet& estimates, const PrecoderSet& precoders,
                                     const DecoderSet& decoders, const WeightSet& weights, const SystemConfig& cfg,
                                     const NormBoundedError& model)
{
    const RobustAuxiliaries aux = robust_bounds(estimates, precoders, decoders, weights, cfg, model);
    const double constant = cfg.d * (std::log2(kLn2) + 1.0 / kLn2);
    std::vector<double> rates;
    for (int i = 0; i < cfg.K; ++i) {
        double lam = 0.0;
        for (int j = 0; j < cfg.K; ++j)
            lam += aux.lambda(i, j);
        rates.push_back(log2_gram_det(weights.G[i]) + constant - lam);
    }
    return rates;
}

WeightSet nominal_weights(const ChannelSet& estimates, const PrecoderSet& precoders, const DecoderSet& decoders,
                          const SystemConfig& cfg)
{
    WeightSet out;
    for (int i = 0; i < cfg.K; ++i) {
        const MatC mse = mse_matrix(estimates, precoders, decoders, cfg, i);
        const MatC W = (kLn2 * mse).inverse();
        out.G.push_back(hermitian_sqrt(hermitian_part(W)));
    }
    return out;
}

// ----- alternating steps ------------------------------------------------------

namespace {

struct LinkTerms {
    VecC e;
    MatC A; // E * B~
};

using TermFn = std::function<LinkTerms(const VecR&)>;

/// lambda(mu) = mu + |e|^2 + eps^2 e^H A (mu I - eps^2 A^H A)^{-1} A^H e
std::pair<double, double> multiplier_start(const LinkTerms& t, double eps)
{
    double mu = 0.0;
    const double wc = worst_case_bound(t.e, t.A, eps, &mu);
    const double margin = 1e-2 * (1.0 + wc);
    mu += margin;
    double lam = mu + t.e.squaredNorm();
    if (eps > 0.0 && t.A.size() > 0) {
        const Index c = t.A.cols();
        const MatC S = mu * MatC::Identity(c, c) - eps * eps * t.A.adjoint() * t.A;
        const VecC v = t.A.adjoint() * t.e;
        lam += eps * eps * std::real(v.dot(hermitian_part(S).llt().solve(v)));
    }
    return {lam + margin, mu};
}

/// LMI blocks certifying ||e(y) + A(y) delta||^2 <= y(lambda) over
/// ||delta|| <= eps. The mu I block is restricted to the joint row space of
/// A(y); on its orthogonal complement the block reads mu I and only needs
/// mu >= 0.
void add_robust_blocks(sdp::SdpProblem& p, const std::vector<Index>& term_vars, Index lambda_var, Index mu_var,
                       double eps, const TermFn& terms)
{
    const Index m = p.num_scalars();
    VecR y = VecR::Zero(m);
    const LinkTerms t0 = terms(y);
    const Index l = t0.e.size();
    const Index cols = t0.A.cols();

    MatC P(cols, 0);
    if (eps > 0.0) {
        MatC S(cols, l * static_cast<Index>(1 + term_vars.size()));
        S.leftCols(l) = t0.A.adjoint();
        for (std::size_t q = 0; q < term_vars.size(); ++q) {
            y(term_vars[q]) = 1.0;
            S.middleCols(l * static_cast<Index>(q + 1), l) = (terms(y).A - t0.A).adjoint();
            y(term_vars[q]) = 0.0;
        }
        Eigen::ColPivHouseholderQR<MatC> qr(S.rows(), S.cols());
        qr.setThreshold(1e-13);
        qr.compute(S);
        const Index r = qr.rank();
        P = qr.householderQ() * MatC::Identity(cols, r);
    }
    const Index r = P.cols();

    std::vector<Index> vars = term_vars;
    vars.push_back(lambda_var);
    vars.push_back(mu_var);
    p.constraints.push_back(sdp::AffineHermitian::from_function(m, vars, [&](const VecR& yy) {
        const LinkTerms t = terms(yy);
        const Index n = 1 + l + r;
        MatC F = MatC::Zero(n, n);
        F(0, 0) = yy(lambda_var) - yy(mu_var);
        F.block(1, 0, l, 1) = t.e;
        F.block(0, 1, 1, l) = t.e.adjoint();
        F.block(1, 1, l, l).setIdentity();
        if (r > 0) {
            const MatC off = -eps * t.A * P;
            F.block(1, 1 + l, l, r) = off;
            F.block(1 + l, 1, r, l) = off.adjoint();
            F.block(1 + l, 1 + l, r, r) = yy(mu_var) * MatC::Identity(r, r);
        }
        return F;
    }));
    if (r == 0)
        p.constraints.push_back(sdp::AffineHermitian::from_function(
            m, {mu_var}, [&](const VecR& yy) { return MatC::Constant(1, 1, cd(yy(mu_var), 0.0)); }));
}

std::vector<Index> block_indices(const sdp::VariableBlock& b)
{
    std::vector<Index> out;
    for (Index k = 0; k < b.size(); ++k)
        out.push_back(b.offset + k);
    return out;
}

bool accept(double before, double after, bool minimize)
{
    const double slack = 1e-9 * (1.0 + std::abs(before));
    return minimize ? after <= before + slack : after >= before - slack;
}

double link_bound(const ChannelSet& est, const SystemConfig& cfg, const NormBoundedError& model, int i, int j,
                  const MatC& V_j, const MatC& U_i, const MatC& G_i, const MatC& Bt)
{
    VecC e;
    MatC E;
    assemble_error_pair(est(i, j), V_j, U_i, G_i, cfg.sigma2, i == j, e, E);
    return worst_case_bound(e, E * Bt, model.eps(i, j));
}

template <typename T>
StepResult<T> start_step(const ChannelSet& estimates, const SystemConfig& cfg, const NormBoundedError& model,
                         double eta, const PrecoderSet& precoders, const DecoderSet& decoders,
                         const WeightSet& weights, T value)
{
    cfg.validate();
    StepResult<T> res;
    res.value = std::move(value);
    res.aux = robust_bounds(estimates, precoders, decoders, weights, cfg, model);
    res.objective_before = robust_objective(estimates, precoders, decoders, weights, cfg, model, eta);
    return res;
}

} // namespace

StepResult<PrecoderSet> solve_v_step(const ChannelSet& estimates, const SystemConfig& cfg,
                                     const NormBoundedError& model, double eta, const PrecoderSet& precoders,
                                     const DecoderSet& decoders, const WeightSet& weights,
                                     const sdp::SdpOptions& opts)
{
    auto res = start_step(estimates, cfg, model, eta, precoders, decoders, weights, precoders);
    const double penalty = std::max(eta, 0.0) * cfg.rho;

    for (int j = 0; j < cfg.K; ++j) {
        sdp::SdpProblem p;
        const auto xv = p.add_complex("V", cfg.M, cfg.d);
        const Index tv = penalty > 0.0 ? p.add_real("t").offset : -1;
        std::vector<int> users;
        std::vector<Index> lam, mu;
        for (int i = 0; i < cfg.K; ++i) {
            if (cfg.weight(i) <= 0.0)
                continue;
            users.push_back(i);
            lam.push_back(p.add_real("lambda_" + std::to_string(i)).offset);
            mu.push_back(p.add_real("mu_" + std::to_string(i)).offset);
        }
        for (std::size_t q = 0; q < users.size(); ++q)
            p.objective(lam[q]) = cfg.weight(users[q]);
        if (tv >= 0)
            p.objective(tv) = penalty;
        const Index m = p.num_scalars();
        const auto xs = block_indices(xv);

        p.constraints.push_back(sdp::AffineHermitian::from_function(
            m, xs, [&](const VecR& y) { return build_power_lmi(xv.value(y), cfg.P_m); }));
        if (tv >= 0) {
            auto vars = xs;
            vars.push_back(tv);
            p.constraints.push_back(sdp::AffineHermitian::from_function(
                m, vars, [&](const VecR& y) { return build_power_lmi(xv.value(y), y(tv)); }));
        }

        // strictly feasible start from the current precoder
        MatC V0 = precoders.V[j];
        const double cap = (1.0 - 1e-4) * cfg.P_m;
        if (V0.squaredNorm() > cap)
            V0 *= std::sqrt(cap / V0.squaredNorm());
        VecR y0 = VecR::Zero(m);
        xv.pack(V0, y0);
        if (tv >= 0)
            y0(tv) = V0.squaredNorm() + 1e-2 * (1.0 + V0.squaredNorm());

        for (std::size_t q = 0; q < users.size(); ++q) {
            const int i = users[q];
            const MatC& Bt = res.aux.Btilde(i, j);
            TermFn terms = [&, i](const VecR& y) {
                LinkTerms t;
                MatC E;
                assemble_error_pair(estimates(i, j), xv.value(y), decoders.U[i], weights.G[i], cfg.sigma2, i == j,
                                    t.e, E);
                t.A = E * Bt;
                return t;
            };
            add_robust_blocks(p, xs, lam[q], mu[q], model.eps(i, j), terms);
            const auto [l0, m0] = multiplier_start(terms(y0), model.eps(i, j));
            y0(lam[q]) = l0;
            y0(mu[q]) = m0;
        }

        const sdp::SdpSolution sol = sdp::solve_sdp(p, opts, y0);
        ++res.sdp_solves;
        res.sdp_iterations += sol.iterations;
        if (sol.status == sdp::SdpStatus::Infeasible || sol.status == sdp::SdpStatus::Unbounded)
            throw SolverError("V-step SDP for transmitter " + std::to_string(j) + " ended " + to_string(sol.status));

        const MatC Vnew = xv.value(sol.assignment);
        auto part = [&](const MatC& V) {
            double acc = penalty * V.squaredNorm();
            for (int i : users)
                acc += cfg.weight(i) *
                       link_bound(estimates, cfg, model, i, j, V, decoders.U[i], weights.G[i], res.aux.Btilde(i, j));
            return acc;
        };
        if (Vnew.squaredNorm() <= cfg.P_m * (1.0 + 1e-12) && accept(part(precoders.V[j]), part(Vnew), true)) {
            res.value.V[j] = Vnew;
            for (std::size_t q = 0; q < users.size(); ++q) {
                res.aux.lambda(users[q], j) = sol.assignment(lam[q]);
                res.aux.mu(users[q], j) = sol.assignment(mu[q]);
            }
        } else {
            ++res.sdp_failures;
        }
    }
    res.objective_after = robust_objective(estimates, res.value, decoders, weights, cfg, model, eta);
    return res;
}

StepResult<DecoderSet> solve_u_step(const ChannelSet& estimates, const SystemConfig& cfg,
                                    const NormBoundedError& model, double eta, const PrecoderSet& precoders,
                                    const DecoderSet& decoders, const WeightSet& weights,
                                    const sdp::SdpOptions& opts)
{
    auto res = start_step(estimates, cfg, model, eta, precoders, decoders, weights, decoders);

    for (int i = 0; i < cfg.K; ++i) {
        if (cfg.weight(i) <= 0.0)
            continue;
        sdp::SdpProblem p;
        const auto uv = p.add_complex("U", cfg.N, cfg.d);
        std::vector<Index> lam, mu;
        for (int j = 0; j < cfg.K; ++j) {
            lam.push_back(p.add_real("lambda_" + std::to_string(j)).offset);
            mu.push_back(p.add_real("mu_" + std::to_string(j)).offset);
        }
        for (Index k : lam)
            p.objective(k) = 1.0;
        const Index m = p.num_scalars();
        const auto us = block_indices(uv);

        VecR y0 = VecR::Zero(m);
        uv.pack(decoders.U[i], y0);
        for (int j = 0; j < cfg.K; ++j) {
            const MatC& Bt = res.aux.Btilde(i, j);
            TermFn terms = [&, j](const VecR& y) {
                LinkTerms t;
                MatC E;
                assemble_error_pair(estimates(i, j), precoders.V[j], uv.value(y), weights.G[i], cfg.sigma2, i == j,
                                    t.e, E);
                t.A = E * Bt;
                return t;
            };
            add_robust_blocks(p, us, lam[j], mu[j], model.eps(i, j), terms);
            const auto [l0, m0] = multiplier_start(terms(y0), model.eps(i, j));
            y0(lam[j]) = l0;
            y0(mu[j]) = m0;
        }

        const sdp::SdpSolution sol = sdp::solve_sdp(p, opts, y0);
        ++res.sdp_solves;
        res.sdp_iterations += sol.iterations;
        if (sol.status == sdp::SdpStatus::Infeasible || sol.status == sdp::SdpStatus::Unbounded)
            throw SolverError("U-step SDP for receiver " + std::to_string(i) + " ended " + to_string(sol.status));

        const MatC Unew = uv.value(sol.assignment);
        auto part = [&](const MatC& U) {
            double acc = 0.0;
            for (int j = 0; j < cfg.K; ++j)
                acc += link_bound(estimates, cfg, model, i, j, precoders.V[j], U, weights.G[i], res.aux.Btilde(i, j));
            return acc;
        };
        if (accept(part(decoders.U[i]), part(Unew), true)) {
            res.value.U[i] = Unew;
            for (int j = 0; j < cfg.K; ++j) {
                res.aux.lambda(i, j) = sol.assignment(lam[j]);
                res.aux.mu(i, j) = sol.assignment(mu[j]);
            }
        } else {
            ++res.sdp_failures;
        }
    }
    res.objective_after = robust_objective(estimates, precoders, res.value, weights, cfg, model, eta);
    return res;
}

StepResult<WeightSet> solve_g_step(const ChannelSet& estimates, const SystemConfig& cfg,
                                   const NormBoundedError& model, double eta, const PrecoderSet& precoders,
                                   const DecoderSet& decoders, const WeightSet& weights,
                                   const sdp::SdpOptions& opts)
{
    auto res = start_step(estimates, cfg, model, eta, precoders, decoders, weights, weights);

    for (int i = 0; i < cfg.K; ++i) {
        if (cfg.weight(i) <= 0.0)
            continue;
        sdp::SdpProblem p;
        p.sense = sdp::Sense::Maximize;
        const auto gv = p.add_hermitian("G", cfg.d);
        std::vector<Index> lam, mu;
        for (int j = 0; j < cfg.K; ++j) {
            lam.push_back(p.add_real("lambda_" + std::to_string(j)).offset);
            mu.push_back(p.add_real("mu_" + std::to_string(j)).offset);
        }
        for (Index k : lam)
            p.objective(k) = -1.0;
        const Index m = p.num_scalars();
        const auto gs = block_indices(gv);
        p.logdet.push_back({2.0, sdp::AffineHermitian::from_function(m, gs, [&](const VecR& y) { return gv.value(y); })});

        VecR y0 = VecR::Zero(m);
        gv.pack(hermitian_part(weights.G[i]), y0);
        for (int j = 0; j < cfg.K; ++j) {
            const MatC& Bt = res.aux.Btilde(i, j);
            TermFn terms = [&, j](const VecR& y) {
                LinkTerms t;
                MatC E;
                assemble_error_pair(estimates(i, j), precoders.V[j], decoders.U[i], gv.value(y), cfg.sigma2, i == j,
                                    t.e, E);
                t.A = E * Bt;
                return t;
            };
            add_robust_blocks(p, gs, lam[j], mu[j], model.eps(i, j), terms);
            const auto [l0, m0] = multiplier_start(terms(y0), model.eps(i, j));
            y0(lam[j]) = l0;
            y0(mu[j]) = m0;
        }

        const sdp::SdpSolution sol = sdp::solve_maxdet(p, opts, y0);
        ++res.sdp_solves;
        res.sdp_iterations += sol.iterations;
        if (sol.status == sdp::SdpStatus::Infeasible || sol.status == sdp::SdpStatus::Unbounded)
            throw SolverError("G-step max-det for receiver " + std::to_string(i) + " ended " + to_string(sol.status));

        const MatC Gnew = gv.value(sol.assignment);
        auto part = [&](const MatC& G) {
            double acc = log2_gram_det(G);
            for (int j = 0; j < cfg.K; ++j)
                acc -= link_bound(estimates, cfg, model, i, j, precoders.V[j], decoders.U[i], G, res.aux.Btilde(i, j));
            return acc;
        };
        if (std::isfinite(log2_det_hpd(Gnew)) && accept(part(weights.G[i]), part(Gnew), false)) {
            res.value.G[i] = Gnew;
            for (int j = 0; j < cfg.K; ++j) {
                res.aux.lambda(i, j) = sol.assignment(lam[j]);
                res.aux.mu(i, j) = sol.assignment(mu[j]);
            }
        } else {
            ++res.sdp_failures;
        }
    }
    res.objective_after = robust_objective(estimates, precoders, decoders, res.value, cfg, model, eta);
    return res;
}

// ----- full pipeline ----------------------------------------------------------

WorstCaseResult run_worstcase(const ChannelSet& estimates, const SystemConfig& cfg, const NormBoundedError& model,
                              const WorstCaseOptions& opts)
{
    cfg.validate();
    check_channels(estimates, cfg);
    model.validate(cfg.K, cfg.N);

    struct State {
        PrecoderSet V;
        DecoderSet U;
        WeightSet G;
    };
    State state;
    state.V = initial_precoders(estimates, cfg);
    state.U = mmse_receivers(estimates, state.V, cfg);
    state.G = nominal_weights(estimates, state.V, state.U, cfg);

    auto numerator = [&](const State& s) {
        const auto rates = worst_case_rates(estimates, s.V, s.U, s.G, cfg, model);
        double n = 0.0;
        for (int k = 0; k < cfg.K; ++k)
            n += cfg.weight(k) * rates[k];
        return n;
    };

    WorstCaseResult out;
    std::vector<std::pair<double, double>> trace;
    double sdp_seconds = 0.0;
    bool capped = false;
    int failures = 0;

    auto inner = [&](double eta) {
        double obj = robust_objective(estimates, state.V, state.U, state.G, cfg, model, eta);
        trace.emplace_back(eta, obj);
        int sweep = 0;
        for (; sweep < opts.alt_max_sweeps; ++sweep) {
            const auto t0 = std::chrono::steady_clock::now();
            auto v = solve_v_step(estimates, cfg, model, eta, state.V, state.U, state.G, opts.sdp);
            state.V = std::move(v.value);
            auto u = solve_u_step(estimates, cfg, model, eta, state.V, state.U, state.G, opts.sdp);
            state.U = std::move(u.value);
            auto g = solve_g_step(estimates, cfg, model, eta, state.V, state.U, state.G, opts.sdp);
            state.G = std::move(g.value);
            sdp_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            out.sdp_solves += v.sdp_solves + u.sdp_solves + g.sdp_solves;
            failures += v.sdp_failures + u.sdp_failures + g.sdp_failures;
            ++out.sweeps;

            const double next = g.objective_after;
            const double change = next - obj;
            obj = next;
            trace.emplace_back(eta, obj);
            if (std::abs(change) <= opts.alt_rel_tol * std::abs(obj) || std::abs(change) <= 1e-12)
                break;
        }
        if (sweep == opts.alt_max_sweeps)
            capped = true;
        return FractionalStep<State>{state, numerator(state), total_power(state.V, cfg)};
    };

    const double eta0 = std::max(0.0, numerator(state) / total_power(state.V, cfg));
    auto [final_state, ftrace] = solve_fractional(inner, eta0, opts.dinkelbach);

    out.precoders = std::move(final_state.V);
    out.decoders = std::move(final_state.U);
    out.weights = std::move(final_state.G);
    out.aux = robust_bounds(estimates, out.precoders, out.decoders, out.weights, cfg, model);
    out.report.rates = worst_case_rates(estimates, out.precoders, out.decoders, out.weights, cfg, model);
    out.report.total_power = total_power(out.precoders, cfg);
    double num = 0.0;
    for (int k = 0; k < cfg.K; ++k)
        num += cfg.weight(k) * out.report.rates[k];
    out.report.gee = num / out.report.total_power;
    out.report.trace = std::move(trace);
    out.report.iterations = ftrace.iterations;
    out.report.converged = ftrace.converged;
    if (!ftrace.converged)
        out.report.warning = "Dinkelbach did not reach tolerance within the iteration cap";
    else if (capped)
        out.report.warning = "alternating sweep cap reached in at least one inner loop";
    else if (failures > 0)
        out.report.warning = std::to_string(failures) + " SDP steps were rejected";
    out.dinkelbach = std::move(ftrace);
    out.sdp_seconds = sdp_seconds;
    return out;
}

} // namespace geeprec
