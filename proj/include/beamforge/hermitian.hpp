// SPDX-License-Identifier: Apache-2.0
//
// beamforge - covariance-domain transmit beampattern design for MIMO arrays
// Copyright (C) 2026 The beamforge authors
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

// Hermitian matrices, dominant eigenpairs and PSD checks.

#include <Eigen/Dense>
#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace beamforge
{

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

// Thrown when an iterative method exhausts its budget. Carries the last residual.
class ConvergenceError : public std::runtime_error
{
public:
    ConvergenceError(const std::string &what, double residual)
        : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// Square complex matrix with exact conjugate symmetry.
//
// The constructor rejects inputs whose asymmetry exceeds kSymmetryTol (relative to the largest
// entry magnitude, floor 1) and then stores the symmetrized average, so the stored entries satisfy
// m(k,l) == conj(m(l,k)) bit for bit and the diagonal is real.
class HermitianMatrix
{
public:
    static constexpr double kSymmetryTol = 1e-12;

    explicit HermitianMatrix(CMatrix m)
    {
        if (m.rows() < 1 || m.rows() != m.cols())
            throw std::invalid_argument("HermitianMatrix: matrix must be square with dim >= 1");
        if (!m.allFinite())
            throw std::invalid_argument("HermitianMatrix: entries must be finite");

        const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
        const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
        if (asym > kSymmetryTol * scale)
            throw std::invalid_argument("HermitianMatrix: input violates conjugate symmetry by " + std::to_string(asym));

        const Eigen::Index n = m.rows();
        m_.resize(n, n);
        for (Eigen::Index k = 0; k < n; ++k)
        {
            m_(k, k) = cplx(m(k, k).real(), 0.0);
            for (Eigen::Index l = k + 1; l < n; ++l)
            {
                const cplx avg = 0.5 * (m(k, l) + std::conj(m(l, k)));
                m_(k, l) = avg;
                m_(l, k) = std::conj(avg);
            }
        }
    }

    static HermitianMatrix identity(Eigen::Index n) { return HermitianMatrix(CMatrix::Identity(n, n)); }

    // scale * v * v^H
    static HermitianMatrix outer(const CVector &v, double scale = 1.0)
    {
        return HermitianMatrix(scale * (v * v.adjoint()));
    }

    Eigen::Index dim() const noexcept { return m_.rows(); }
    const CMatrix &matrix() const noexcept { return m_; }
    cplx operator()(Eigen::Index k, Eigen::Index l) const { return m_(k, l); }

    bool operator==(const HermitianMatrix &o) const { return m_ == o.m_; }

private:
    CMatrix m_;
};

// Sum of the (real) diagonal.
inline double trace(const HermitianMatrix &m)
{
    double t = 0.0;
    for (Eigen::Index k = 0; k < m.dim(); ++k)
        t += m(k, k).real();
    return t;
}

struct EigenPair
{
    double value = 0.0;
    CVector vector;          // unit norm
    bool degenerate = false; // a second Ritz value lies within rel_tol * |value| of value
    double residual = 0.0;   // ||m v - value v|| at exit
    int iterations = 0;
};

// Largest eigenpair of a Hermitian (normally PSD) matrix.
//
// Block power iteration on a subspace of width min(N, 12) with a Rayleigh-Ritz projection every
// sweep. The Ritz step turns the per-sweep contraction from lambda2/lambda1 into
// lambda_{p+1}/lambda1, which matters for user gram matrices: their leading eigenvalues are close
// together and the rest of the spectrum is zero.
//
// Converged when ||m v - lambda v|| <= rel_tol * |lambda|. For indefinite input the iteration
// favours eigenvalues of large magnitude and returns the algebraically largest Ritz value it found.
inline EigenPair dominant_eigenpair(const HermitianMatrix &m, double rel_tol = 1e-12, int max_iter = 10000)
{
    if (!(rel_tol > 0.0))
        throw std::invalid_argument("dominant_eigenpair: rel_tol must be positive");
    if (max_iter < 1)
        throw std::invalid_argument("dominant_eigenpair: max_iter must be >= 1");

    const CMatrix &a = m.matrix();
    const Eigen::Index n = a.rows();
    if (a.cwiseAbs().maxCoeff() == 0.0)
        throw std::domain_error("zero matrix has no dominant direction");

    if (n == 1)
    {
        EigenPair out;
        out.value = a(0, 0).real();
        out.vector = CVector::Ones(1);
        out.iterations = 1;
        return out;
    }

    const Eigen::Index p = std::min<Eigen::Index>(n, 12);

    // Fixed seed: the start block, and hence the result, is a pure function of the input.
    std::mt19937_64 rng(0x5eed5eedULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    CMatrix block(n, p);
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
        {
            const double re = gauss(rng);
            const double im = gauss(rng);
            block(i, j) = cplx(re, im);
        }

    auto orthonormalize = [n, p](const CMatrix &w) {
        Eigen::HouseholderQR<CMatrix> qr(w);
        return CMatrix(qr.householderQ() * CMatrix::Identity(n, p));
    };

    CMatrix q = orthonormalize(block);
    double residual = 0.0;

    for (int iter = 1; iter <= max_iter; ++iter)
    {
        const CMatrix w = a * q;

        CMatrix h = q.adjoint() * w;
        h = 0.5 * (h + h.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<CMatrix> ritz(h);
        const Eigen::VectorXd &theta = ritz.eigenvalues(); // ascending

        const CVector y = ritz.eigenvectors().col(p - 1);
        CVector x = q * y;
        const CVector mx = w * y;
        const double lambda = theta(p - 1);
        const double xnorm = x.norm();
        residual = (mx - lambda * x).norm() / xnorm;

        const double scale = std::max(std::abs(lambda), std::abs(theta(0)));
        if (residual <= rel_tol * scale)
        {
            EigenPair out;
            out.value = lambda;
            out.vector = x / xnorm;
            out.degenerate = theta(p - 2) >= lambda - rel_tol * std::abs(lambda);
            out.residual = residual;
            out.iterations = iter;
            return out;
        }

        q = orthonormalize(w);
    }

    throw ConvergenceError("dominant_eigenpair: no convergence after " + std::to_string(max_iter) + " iterations",
                           residual);
}

// True iff the smallest eigenvalue is >= -tol * (largest eigenvalue magnitude).
inline bool is_psd(const HermitianMatrix &m, double tol = 1e-9)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m.matrix(), Eigen::EigenvaluesOnly);
    const Eigen::VectorXd &ev = es.eigenvalues();
    const double big = ev.cwiseAbs().maxCoeff();
    return ev(0) >= -tol * big;
}

// Seeded PSD matrix with trace exactly `power`: A A^H from a complex Gaussian A, rescaled.
inline HermitianMatrix random_feasible_covariance(Eigen::Index dim, double power, std::uint64_t seed)
{
    if (dim < 1)
        throw std::invalid_argument("random_feasible_covariance: dim must be >= 1");
    if (!(power > 0.0))
        throw std::invalid_argument("random_feasible_covariance: power must be positive");

    std::mt19937_64 rng(seed);
    boost::random::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    CMatrix a(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index i = 0; i < dim; ++i)
        {
            const double re = gauss(rng);
            const double im = gauss(rng);
            a(i, j) = cplx(re, im);
        }

    CMatrix r = CMatrix::Zero(dim, dim);
    r.selfadjointView<Eigen::Lower>().rankUpdate(a);
    r.triangularView<Eigen::StrictlyUpper>() = r.adjoint();
    double t = 0.0;
    for (Eigen::Index k = 0; k < dim; ++k)
        t += r(k, k).real();
    r *= power / t;

    // Absorb the rescaling round-off in the last diagonal entry so the trace is exact.
    double head = 0.0;
    for (Eigen::Index k = 0; k + 1 < dim; ++k)
    {
        r(k, k) = cplx(r(k, k).real(), 0.0);
        head += r(k, k).real();
    }
    r(dim - 1, dim - 1) = cplx(power - head, 0.0);
    return HermitianMatrix(std::move(r));
}

} // namespace beamforge
