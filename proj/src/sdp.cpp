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

#include "geeprec/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace geeprec::sdp {

// ----- variables --------------------------------------------------------------

Index VariableBlock::size() const
{
    switch (kind) {
    case VariableKind::Real:
        return 1;
    case VariableKind::Complex:
        return 2 * rows * cols;
    case VariableKind::Hermitian:
        return rows * rows;
    }
    return 0;
}

MatC VariableBlock::value(const VecR& y) const
{
    switch (kind) {
    case VariableKind::Real:
        return MatC::Constant(1, 1, cd(y(offset), 0.0));
    case VariableKind::Complex: {
        MatC X(rows, cols);
        for (Index c = 0; c < cols; ++c)
            for (Index r = 0; r < rows; ++r) {
                const Index p = offset + 2 * (r + rows * c);
                X(r, c) = cd(y(p), y(p + 1));
            }
        return X;
    }
    case VariableKind::Hermitian: {
        const Index n = rows;
        MatC X(n, n);
        for (Index i = 0; i < n; ++i)
            X(i, i) = cd(y(offset + i), 0.0);
        Index p = offset + n;
        for (Index r = 0; r < n; ++r)
            for (Index c = r + 1; c < n; ++c) {
                X(r, c) = cd(y(p), y(p + 1));
                X(c, r) = std::conj(X(r, c));
                p += 2;
            }
        return X;
    }
    }
    return {};
}

void VariableBlock::pack(const MatC& value, VecR& y) const
{
    switch (kind) {
    case VariableKind::Real:
        y(offset) = std::real(value(0, 0));
        return;
    case VariableKind::Complex:
        if (value.rows() != rows || value.cols() != cols)
            throw DimensionError("value does not match variable '" + name + "'");
        for (Index c = 0; c < cols; ++c)
            for (Index r = 0; r < rows; ++r) {
                const Index p = offset + 2 * (r + rows * c);
                y(p) = std::real(value(r, c));
                y(p + 1) = std::imag(value(r, c));
            }
        return;
    case VariableKind::Hermitian: {
        const Index n = rows;
        if (value.rows() != n || value.cols() != n)
            throw DimensionError("value does not match variable '" + name + "'");
        for (Index i = 0; i < n; ++i)
            y(offset + i) = std::real(value(i, i));
        Index p = offset + n;
        for (Index r = 0; r < n; ++r)
            for (Index c = r + 1; c < n; ++c) {
                const cd v = 0.5 * (value(r, c) + std::conj(value(c, r)));
                y(p) = std::real(v);
                y(p + 1) = std::imag(v);
                p += 2;
            }
        return;
    }
    }
}

// ----- affine maps ------------------------------------------------------------

MatC AffineHermitian::evaluate(const VecR& y) const
{
    MatC F = constant;
    for (const auto& [k, A] : terms)
        if (y(k) != 0.0)
            F += y(k) * A;
    return F;
}

AffineHermitian AffineHermitian::from_function(Index num_vars, const std::vector<Index>& vars,
                                               const std::function<MatC(const VecR&)>& fn)
{
    AffineHermitian out;
    VecR y = VecR::Zero(num_vars);
    out.constant = fn(y);
    for (Index k : vars) {
        if (k < 0 || k >= num_vars)
            throw DimensionError("variable index out of range");
        y(k) = 1.0;
        MatC A = fn(y) - out.constant;
        y(k) = 0.0;
        if (A.rows() != out.constant.rows() || A.cols() != out.constant.cols())
            throw DimensionError("affine map changed shape");
        if (A.cwiseAbs().maxCoeff() > 0.0)
            out.terms.emplace_back(k, hermitian_part(A));
    }
    out.constant = hermitian_part(out.constant);
    return out;
}

// ----- problem ----------------------------------------------------------------

Index SdpProblem::num_scalars() const
{
    return variables.empty() ? 0 : variables.back().offset + variables.back().size();
}

namespace {

const VariableBlock& append(SdpProblem& p, VariableBlock b)
{
    for (const auto& v : p.variables)
        if (v.name == b.name)
            throw ConfigError("duplicate variable name '" + b.name + "'");
    b.offset = p.num_scalars();
    p.variables.push_back(std::move(b));
    const Index m = p.num_scalars();
    VecR c = VecR::Zero(m);
    c.head(p.objective.size()) = p.objective;
    p.objective = c;
    return p.variables.back();
}

} // namespace

const VariableBlock& SdpProblem::add_real(const std::string& name)
{
    return append(*this, VariableBlock{name, VariableKind::Real, 1, 1, 0});
}

const VariableBlock& SdpProblem::add_complex(const std::string& name, Index rows, Index cols)
{
    return append(*this, VariableBlock{name, VariableKind::Complex, rows, cols, 0});
}

const VariableBlock& SdpProblem::add_hermitian(const std::string& name, Index n)
{
    return append(*this, VariableBlock{name, VariableKind::Hermitian, n, n, 0});
}

const VariableBlock& SdpProblem::variable(const std::string& name) const
{
    for (const auto& v : variables)
        if (v.name == name)
            return v;
    throw ConfigError("unknown variable '" + name + "'");
}

double SdpProblem::objective_value(const VecR& y) const
{
    double f = objective.dot(y);
    for (const auto& term : logdet)
        f += term.weight * log2_det_hpd(term.map.evaluate(y));
    return f;
}

void SdpProblem::validate() const
{
    const Index m = num_scalars();
    if (objective.size() != m)
        throw DimensionError("objective length does not match the variable count");
    auto check_map = [&](const AffineHermitian& F, const char* what) {
        const Index n = F.side();
        if (n == 0 || F.constant.cols() != n)
            throw DimensionError(std::string(what) + " must be square and non-empty");
        const double scale = 1.0 + F.constant.norm();
        if ((F.constant - F.constant.adjoint()).norm() > 1e-10 * scale)
            throw ConfigError(std::string(what) + " constant is not Hermitian");
        for (const auto& [k, A] : F.terms) {
            if (k < 0 || k >= m)
                throw DimensionError(std::string(what) + " references an unknown variable");
            if (A.rows() != n || A.cols() != n)
                throw DimensionError(std::string(what) + " coefficient has the wrong size");
            if ((A - A.adjoint()).norm() > 1e-10 * (1.0 + A.norm()))
                throw ConfigError(std::string(what) + " coefficient is not Hermitian");
        }
    };
    for (const auto& F : constraints)
        check_map(F, "constraint");
    for (const auto& t : logdet)
        check_map(t.map, "log-det term");
}

std::string to_string(SdpStatus status)
{
    switch (status) {
    case SdpStatus::Optimal:
        return "optimal";
    case SdpStatus::MaxIterations:
        return "max-iterations";
    case SdpStatus::Infeasible:
        return "infeasible";
    case SdpStatus::Unbounded:
        return "unbounded";
    }
    return "unknown";
}

// ----- lowered barrier problem ------------------------------------------------

namespace {

struct Triplet {
    int r;
    int c;
    double v;
};

struct LoweredBlock {
    Index n = 0;          // real side
    MatR constant;
    std::vector<Index> vars;
    std::vector<std::vector<Triplet>> coeff; // one list per entry of vars
    double kappa = 0.5;   // weight of -ln det on the real embedding
    bool objective = false; // log-det objective term, scaled by t
    bool constraint = true; // counted in the barrier parameter
};

struct Lowered {
    Index m = 0;
    VecR c;
    std::vector<LoweredBlock> blocks;
    double barrier_param = 0.0;
    std::vector<Index> active; // variables that enter some block
};

std::vector<Triplet> sparse_lower(const MatC& A)
{
    const MatR R = real_embedding(A);
    std::vector<Triplet> out;
    for (Index c = 0; c < R.cols(); ++c)
        for (Index r = 0; r < R.rows(); ++r)
            if (R(r, c) != 0.0)
                out.push_back({static_cast<int>(r), static_cast<int>(c), R(r, c)});
    return out;
}

LoweredBlock lower_map(const AffineHermitian& F)
{
    LoweredBlock b;
    b.constant = real_embedding(F.constant);
    b.n = b.constant.rows();
    for (const auto& [k, A] : F.terms) {
        auto trip = sparse_lower(A);
        if (trip.empty())
            continue;
        auto it = std::find(b.vars.begin(), b.vars.end(), k);
        if (it == b.vars.end()) {
            b.vars.push_back(k);
            b.coeff.push_back(std::move(trip));
        } else {
            auto& dst = b.coeff[static_cast<std::size_t>(it - b.vars.begin())];
            dst.insert(dst.end(), trip.begin(), trip.end());
        }
    }
    return b;
}

MatR block_value(const LoweredBlock& b, const VecR& y)
{
    MatR A = b.constant;
    for (std::size_t q = 0; q < b.vars.size(); ++q) {
        const double yk = y(b.vars[q]);
        if (yk == 0.0)
            continue;
        for (const auto& t : b.coeff[q])
            A(t.r, t.c) += yk * t.v;
    }
    return A;
}

void finalize(Lowered& L)
{
    std::vector<char> used(static_cast<std::size_t>(L.m), 0);
    L.barrier_param = 0.0;
    for (const auto& b : L.blocks) {
        for (Index k : b.vars)
            used[static_cast<std::size_t>(k)] = 1;
        if (b.constraint)
            L.barrier_param += static_cast<double>(b.n) / 2.0;
    }
    L.active.clear();
    for (Index k = 0; k < L.m; ++k)
        if (used[static_cast<std::size_t>(k)])
            L.active.push_back(k);
}

Lowered lower(const SdpProblem& p)
{
    const double sign = p.sense == Sense::Minimize ? 1.0 : -1.0;
    Lowered L;
    L.m = p.num_scalars();
    L.c = sign * p.objective;
    for (const auto& t : p.logdet) {
        // minimize ... - omega ln det(map)
        const double omega = -sign * t.weight / std::numbers::ln2;
        if (omega < 0.0)
            throw ConfigError("log-det term makes the objective non-convex for this sense");
        if (omega == 0.0)
            continue;
        LoweredBlock b = lower_map(t.map);
        b.kappa = 0.5 * omega;
        b.objective = true;
        b.constraint = false;
        L.blocks.push_back(std::move(b));
    }
    for (const auto& F : p.constraints)
        L.blocks.push_back(lower_map(F));
    finalize(L);
    return L;
}

struct Evaluation {
    bool in_domain = false;
    double f_obj = 0.0;
    double f_bar = 0.0;
    VecR g_obj, g_bar;
    MatR H_obj, H_bar;
};

// Value (and optionally derivatives) of
//   f_obj = c'y - sum_objective kappa ln det,  f_bar = - sum_barrier kappa ln det.
Evaluation evaluate(const Lowered& L, const VecR& y, bool derivatives)
{
    Evaluation ev;
    ev.f_obj = L.c.dot(y);
    if (derivatives) {
        ev.g_obj = L.c;
        ev.g_bar = VecR::Zero(L.m);
        ev.H_obj = MatR::Zero(L.m, L.m);
        ev.H_bar = MatR::Zero(L.m, L.m);
    }
    for (const auto& b : L.blocks) {
        const MatR A = block_value(b, y);
        Eigen::LLT<MatR> llt(A);
        if (llt.info() != Eigen::Success)
            return ev;
        double logdet = 0.0;
        for (Index i = 0; i < b.n; ++i) {
            const double dii = llt.matrixLLT()(i, i);
            if (!(dii > 0.0) || !std::isfinite(dii))
                return ev;
            logdet += 2.0 * std::log(dii);
        }
        (b.objective ? ev.f_obj : ev.f_bar) -= b.kappa * logdet;
        if (!derivatives)
            continue;

        const MatR Ainv = llt.solve(MatR::Identity(b.n, b.n));
        VecR& g = b.objective ? ev.g_obj : ev.g_bar;
        MatR& H = b.objective ? ev.H_obj : ev.H_bar;
        const std::size_t nv = b.vars.size();
        for (std::size_t p = 0; p < nv; ++p) {
            const auto& Ap = b.coeff[p];
            double tr = 0.0;
            for (const auto& t : Ap)
                tr += t.v * Ainv(t.c, t.r);
            g(b.vars[p]) -= b.kappa * tr;
            for (std::size_t q = p; q < nv; ++q) {
                const auto& Aq = b.coeff[q];
                double h = 0.0;
                for (const auto& s : Ap)
                    for (const auto& t : Aq)
                        h += s.v * t.v * Ainv(t.c, s.r) * Ainv(s.c, t.r);
                h *= b.kappa;
                H(b.vars[p], b.vars[q]) += h;
                if (q != p)
                    H(b.vars[q], b.vars[p]) += h;
            }
        }
    }
    ev.in_domain = true;
    return ev;
}

double min_constraint_eigenvalue(const Lowered& L, const VecR& y)
{
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& b : L.blocks) {
        if (!b.constraint)
            continue;
        Eigen::SelfAdjointEigenSolver<MatR> es(block_value(b, y), Eigen::EigenvaluesOnly);
        lo = std::min(lo, es.eigenvalues().minCoeff());
    }
    return lo;
}

double min_block_eigenvalue(const Lowered& L, const VecR& y)
{
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& b : L.blocks) {
        Eigen::SelfAdjointEigenSolver<MatR> es(block_value(b, y), Eigen::EigenvaluesOnly);
        lo = std::min(lo, es.eigenvalues().minCoeff());
    }
    return lo;
}

enum class PathResult { Converged, IterationCap, Unbounded, EarlyExit };

struct PathState {
    VecR y;
    double t = 1.0;
    double decrement = 0.0;
    int iterations = 0;
};

VecR newton_direction(const MatR& H, const VecR& g, const std::vector<Index>& active)
{
    const Index na = static_cast<Index>(active.size());
    MatR Ha(na, na);
    VecR ga(na);
    for (Index p = 0; p < na; ++p) {
        ga(p) = g(active[p]);
        for (Index q = 0; q < na; ++q)
            Ha(p, q) = H(active[p], active[q]);
    }
    VecR da;
    Eigen::LLT<MatR> llt(Ha);
    if (llt.info() == Eigen::Success) {
        da = llt.solve(-ga);
    } else {
        const double ridge = 1e-12 * (1.0 + Ha.diagonal().cwiseAbs().maxCoeff());
        Eigen::LDLT<MatR> ldlt(Ha + ridge * MatR::Identity(na, na));
        da = ldlt.solve(-ga);
    }
    VecR d = VecR::Zero(g.size());
    for (Index p = 0; p < na; ++p)
        d(active[p]) = da(p);
    return d;
}

// Barrier path following on t f_obj + f_bar starting from a strictly
// feasible state.y. `stop_early` is polled after every accepted step.
PathResult follow_path(const Lowered& L, PathState& state, const SdpOptions& opts,
                       const std::function<bool(const VecR&)>& stop_early, double gap_floor)
{
    const double alpha = 0.01;
    const double beta = 0.5;
    const double center_tol = 1e-10;

    for (;;) {
        // centering
        for (;;) {
            const Evaluation ev = evaluate(L, state.y, true);
            if (!ev.in_domain)
                return PathResult::Unbounded; // cannot happen from an interior start
            const VecR g = state.t * ev.g_obj + ev.g_bar;
            const MatR H = state.t * ev.H_obj + ev.H_bar;
            const VecR dy = newton_direction(H, g, L.active);
            const double dec2 = -g.dot(dy);
            state.decrement = std::sqrt(std::max(dec2, 0.0));
            if (!(dec2 > 2.0 * center_tol))
                break;
            if (state.iterations >= opts.max_iter)
                return PathResult::IterationCap;
            ++state.iterations;

            const double phi0 = state.t * ev.f_obj + ev.f_bar;
            double s = 1.0;
            VecR trial;
            bool accepted = false;
            for (int ls = 0; ls < 60; ++ls) {
                trial = state.y + s * dy;
                const Evaluation tv = evaluate(L, trial, false);
                if (tv.in_domain && state.t * tv.f_obj + tv.f_bar <= phi0 - alpha * s * dec2) {
                    accepted = true;
                    break;
                }
                s *= beta;
            }
            if (!accepted)
                break; // numerical floor reached, treat as centered
            state.y = trial;
            if (!std::isfinite(state.y.squaredNorm()) || state.y.cwiseAbs().maxCoeff() > 1e12)
                return PathResult::Unbounded;
            if (stop_early && stop_early(state.y))
                return PathResult::EarlyExit;
        }

        const double gap = L.barrier_param / state.t;
        const double obj = std::abs(L.c.dot(state.y));
        if (gap <= std::max(opts.gap_tol * (1.0 + obj), gap_floor))
            return PathResult::Converged;
        state.t *= opts.barrier_growth;
    }
}

double initial_t(const Lowered& L, const VecR& y)
{
    const Evaluation ev = evaluate(L, y, true);
    if (!ev.in_domain)
        return 1.0;
    // t minimizing || t g_obj + g_bar || in the barrier Hessian metric
    const MatR H = ev.H_bar + ev.H_obj;
    const VecR u = newton_direction(H, ev.g_obj, L.active);
    const VecR v = newton_direction(H, ev.g_bar, L.active);
    const double num = -ev.g_obj.dot(v);
    const double den = -ev.g_obj.dot(u);
    const double t = num / den;
    if (!std::isfinite(t) || t < 1e-6 || t > 1e6)
        return 1.0;
    return t;
}

// Finds a strictly feasible point by minimizing s subject to F_b(y) + s I >= 0
// and |y_k - y0_k| <= radius. The box keeps the auxiliary problem bounded
// when some variable direction acts on every block like s does.
std::optional<VecR> phase_one(const Lowered& L, const VecR& y0, double radius, const SdpOptions& opts,
                              int& iterations, bool& capped)
{
    Lowered P;
    P.m = L.m + 1;
    P.c = VecR::Zero(P.m);
    P.c(L.m) = 1.0;
    for (const auto& b : L.blocks) {
        LoweredBlock q = b;
        q.kappa = 0.5;
        q.objective = false;
        q.constraint = true;
        std::vector<Triplet> eye;
        for (Index i = 0; i < q.n; ++i)
            eye.push_back({static_cast<int>(i), static_cast<int>(i), 1.0});
        q.vars.push_back(L.m);
        q.coeff.push_back(std::move(eye));
        P.blocks.push_back(std::move(q));
    }
    if (!L.active.empty()) {
        const Index na = static_cast<Index>(L.active.size());
        AffineHermitian box;
        box.constant = MatC::Zero(2 * na, 2 * na);
        for (Index p = 0; p < na; ++p) {
            const Index k = L.active[static_cast<std::size_t>(p)];
            box.constant(p, p) = radius + y0(k);
            box.constant(na + p, na + p) = radius - y0(k);
            MatC coef = MatC::Zero(2 * na, 2 * na);
            coef(p, p) = -1.0;
            coef(na + p, na + p) = 1.0;
            box.terms.emplace_back(k, std::move(coef));
        }
        P.blocks.push_back(lower_map(box));
    }
    finalize(P);

    PathState state;
    state.y = VecR::Zero(P.m);
    state.y.head(L.m) = y0;
    state.y(L.m) = std::max(0.0, -min_block_eigenvalue(L, y0)) + 1.0;
    state.t = 1.0 / (1.0 + state.y(L.m));
    state.iterations = iterations;

    auto feasible = [&](const VecR& z) {
        if (z(L.m) >= 0.0)
            return false;
        return evaluate(L, z.head(L.m), false).in_domain;
    };
    SdpOptions popts = opts;
    popts.gap_tol = 0.0;
    const PathResult r = follow_path(P, state, popts, feasible, 1e-9);
    iterations = state.iterations;
    capped = r == PathResult::IterationCap;
    if (r == PathResult::EarlyExit || r == PathResult::Unbounded) {
        if (feasible(state.y))
            return VecR(state.y.head(L.m));
    }
    return std::nullopt;
}

SdpSolution solve_impl(const SdpProblem& problem, const SdpOptions& opts, const std::optional<VecR>& start)
{
    problem.validate();
    const Lowered L = lower(problem);

    SdpSolution sol;
    sol.assignment = start.value_or(VecR::Zero(L.m));
    if (sol.assignment.size() != L.m)
        throw DimensionError("start point has the wrong length");

    // variables outside every block: fixed if free of cost, otherwise unbounded
    {
        std::vector<char> used(static_cast<std::size_t>(L.m), 0);
        for (Index k : L.active)
            used[static_cast<std::size_t>(k)] = 1;
        for (Index k = 0; k < L.m; ++k)
            if (!used[static_cast<std::size_t>(k)] && L.c(k) != 0.0) {
                sol.status = SdpStatus::Unbounded;
                sol.objective_value = problem.objective_value(sol.assignment);
                return sol;
            }
    }

    int iterations = 0;
    if (!evaluate(L, sol.assignment, false).in_domain) {
        bool capped = false;
        const double scale = 1.0 + (L.m > 0 ? sol.assignment.cwiseAbs().maxCoeff() : 0.0);
        std::optional<VecR> y;
        for (double radius : {1e2 * scale, 1e6 * scale}) {
            y = phase_one(L, sol.assignment, radius, opts, iterations, capped);
            if (y || capped)
                break;
        }
        if (!y) {
            sol.iterations = iterations;
            sol.status = capped ? SdpStatus::MaxIterations : SdpStatus::Infeasible;
            sol.objective_value = problem.objective_value(sol.assignment);
            return sol;
        }
        sol.assignment = *y;
    }

    PathState state;
    state.y = sol.assignment;
    state.t = initial_t(L, state.y);
    state.iterations = iterations;
    const PathResult r = follow_path(L, state, opts, {}, 0.0);

    sol.assignment = state.y;
    sol.iterations = state.iterations;
    sol.objective_value = problem.objective_value(state.y);
    sol.min_eigenvalue = L.barrier_param > 0.0 ? min_constraint_eigenvalue(L, state.y) : 0.0;
    sol.kkt.primal = std::max(0.0, -sol.min_eigenvalue);
    sol.kkt.dual = state.decrement / state.t;
    sol.kkt.gap = L.barrier_param / state.t;
    switch (r) {
    case PathResult::Converged:
        sol.status = SdpStatus::Optimal;
        break;
    case PathResult::Unbounded:
        sol.status = SdpStatus::Unbounded;
        break;
    default:
        sol.status = SdpStatus::MaxIterations;
        break;
    }
    return sol;
}

} // namespace

SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& opts, const std::optional<VecR>& start)
{
    if (!problem.logdet.empty())
        throw ConfigError("solve_sdp takes linear objectives only, use solve_maxdet");
    return solve_impl(problem, opts, start);
}

SdpSolution solve_maxdet(const SdpProblem& problem, const SdpOptions& opts, const std::optional<VecR>& start)
{
    return solve_impl(problem, opts, start);
}

} // namespace geeprec::sdp
