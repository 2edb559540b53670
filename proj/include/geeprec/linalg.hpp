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

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>

// Small dense helpers shared by every module. Everything here is templated on
// the Eigen expression so callers can pass blocks and products directly.

namespace geeprec {

using cd = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using MatR = Eigen::MatrixXd;
using VecR = Eigen::VectorXd;
using Index = Eigen::Index;

/// Column-stacking vectorization.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> vec(const Eigen::MatrixBase<Derived>& A)
{
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> tmp = A;
    return Eigen::Map<const Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>>(tmp.data(), tmp.size());
}

/// Inverse of vec() for a rows x cols matrix.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> unvec(const Eigen::MatrixBase<Derived>& v,
                                                                              Index rows, Index cols)
{
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> tmp = v;
    return Eigen::Map<const Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>>(tmp.data(), rows,
                                                                                                    cols);
}

template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(const Eigen::MatrixBase<DerivedA>& A,
                                                                              const Eigen::MatrixBase<DerivedB>& B)
{
    Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(A.rows() * B.rows(),
                                                                                A.cols() * B.cols());
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < A.cols(); ++j)
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return out;
}

/// (A + A^H) / 2
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> hermitian_part(const Eigen::MatrixBase<Derived>& A)
{
    return (A + A.adjoint()) / typename Derived::RealScalar(2);
}

template <typename Derived>
typename Derived::RealScalar min_eigenvalue(const Eigen::MatrixBase<Derived>& A)
{
    using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Mat H = hermitian_part(A);
    Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/// log2 det of a Hermitian positive definite matrix. Returns -inf when the
/// Cholesky factorization fails.
template <typename Derived>
typename Derived::RealScalar log2_det_hpd(const Eigen::MatrixBase<Derived>& A)
{
    using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Real = typename Derived::RealScalar;
    Eigen::LLT<Mat> llt(hermitian_part(A));
    if (llt.info() != Eigen::Success)
        return -std::numeric_limits<Real>::infinity();
    Real acc = 0;
    for (Index i = 0; i < A.rows(); ++i)
        acc += std::log2(std::real(llt.matrixL()(i, i)));
    return Real(2) * acc;
}

/// Hermitian square root of a Hermitian PSD matrix.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> hermitian_sqrt(const Eigen::MatrixBase<Derived>& A)
{
    using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(A));
    auto ev = es.eigenvalues().cwiseMax(0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

/// Real symmetric embedding [[Re, -Im], [Im, Re]] of a complex matrix.
inline MatR real_embedding(const MatC& A)
{
    const Index n = A.rows(), m = A.cols();
    MatR out(2 * n, 2 * m);
    out.topLeftCorner(n, m) = A.real();
    out.topRightCorner(n, m) = -A.imag();
    out.bottomLeftCorner(n, m) = A.imag();
    out.bottomRightCorner(n, m) = A.real();
    return out;
}

} // namespace geeprec
