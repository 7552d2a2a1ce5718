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

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"

#include <beamforge/design.hpp>
#include <beamforge/hermitian.hpp>
#include <beamforge/radiation.hpp>

#include <cmath>

using namespace beamforge;
using Catch::Approx;

namespace
{

// |<a, b>| for unit vectors; 1 when they agree up to a phase.
double phase_free_overlap(const CVector &a, const std::vector<oracle::cplx> &b)
{
    oracle::cplx acc = 0.0;
    for (Eigen::Index k = 0; k < a.size(); ++k)
        acc += std::conj(a(k)) * b[static_cast<std::size_t>(k)];
    return std::abs(acc);
}

HermitianMatrix diag(std::initializer_list<double> d)
{
    CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
    Eigen::Index k = 0;
    for (double x : d)
        m(k, k) = x, ++k;
    return HermitianMatrix(m);
}

} // namespace

TEST_CASE("HermitianMatrix - symmetry enforced on construction")
{
    CMatrix m(2, 2);
    m << cplx(2, 0), cplx(1, 1), cplx(1, -1), cplx(3, 0);
    const HermitianMatrix h(m);
    CHECK(h(0, 1) == std::conj(h(1, 0)));

    SECTION("tiny asymmetry is averaged away")
    {
        CMatrix n = m;
        n(1, 0) += cplx(5e-13, 0);
        n(0, 0) += cplx(0, 4e-13);
        const HermitianMatrix hn(n);
        CHECK(hn(0, 1) == std::conj(hn(1, 0)));
        CHECK(hn(0, 0).imag() == 0.0);
    }

    SECTION("asymmetry beyond 1e-12 is rejected")
    {
        CMatrix n = m;
        n(1, 0) += cplx(1e-9, 0);
        CHECK_THROWS_AS(HermitianMatrix(n), std::invalid_argument);
        CMatrix d = m;
        d(1, 1) = cplx(3, 1e-6);
        CHECK_THROWS_AS(HermitianMatrix(d), std::invalid_argument);
    }

    SECTION("non-square and empty inputs are rejected")
    {
        CHECK_THROWS_AS(HermitianMatrix(CMatrix(2, 3)), std::invalid_argument);
        CHECK_THROWS_AS(HermitianMatrix(CMatrix(0, 0)), std::invalid_argument);
    }
}

TEST_CASE("trace")
{
    CHECK(trace(HermitianMatrix::identity(10)) == 10.0);
    CHECK(trace(HermitianMatrix(CMatrix::Ones(10, 10))) == 10.0);

    CVector v(3);
    v << cplx(0.6, 0), cplx(0, 0.8), cplx(0, 0);
    CHECK(trace(HermitianMatrix::outer(v)) == Approx(1.0).margin(1e-15));
}

TEST_CASE("dominant_eigenpair - small closed cases")
{
    SECTION("identity is degenerate")
    {
        const EigenPair ep = dominant_eigenpair(HermitianMatrix::identity(2));
        CHECK(ep.value == Approx(1.0).margin(1e-14));
        CHECK(ep.degenerate);
        CHECK(ep.vector.norm() == Approx(1.0).margin(1e-12));
    }

    SECTION("diagonal")
    {
        const EigenPair ep = dominant_eigenpair(diag({3.0, 1.0}));
        CHECK(ep.value == Approx(3.0).margin(1e-12));
        CHECK_FALSE(ep.degenerate);
        CHECK(std::abs(ep.vector(0)) == Approx(1.0).margin(1e-12));
        CHECK(std::abs(ep.vector(1)) < 1e-12);
    }

    SECTION("1x1")
    {
        const EigenPair ep = dominant_eigenpair(diag({7.0}));
        CHECK(ep.value == 7.0);
        CHECK_FALSE(ep.degenerate);
    }

    SECTION("zero matrix")
    {
        CHECK_THROWS_WITH(dominant_eigenpair(HermitianMatrix(CMatrix::Zero(3, 3))),
                          "zero matrix has no dominant direction");
    }

    SECTION("argument checks")
    {
        CHECK_THROWS_AS(dominant_eigenpair(HermitianMatrix::identity(2), 0.0), std::invalid_argument);
        CHECK_THROWS_AS(dominant_eigenpair(HermitianMatrix::identity(2), 1e-12, 0), std::invalid_argument);
    }

    SECTION("iteration budget exhausted")
    {
        const HermitianMatrix m = random_feasible_covariance(40, 40.0, 7);
        try
        {
            dominant_eigenpair(m, 1e-12, 1);
            FAIL("expected ConvergenceError");
        }
        catch (const ConvergenceError &e)
        {
            CHECK(e.residual() > 0.0);
        }
    }
}

TEST_CASE("dominant_eigenpair - two-user gram matrix against the Jacobi oracle")
{
    const ArrayGeometry ula = make_ula(4, 0.5);
    const UserSet users{{Direction::from_degrees(30, 0), Direction::from_degrees(-30, 0)}, "pm30"};
    const HermitianMatrix z = build_user_gram(ula, users);

    const oracle::Spectrum ref = oracle::jacobi_eigen(oracle::to_dense(z));
    const EigenPair ep = dominant_eigenpair(z);

    CHECK(ep.value == Approx(ref.values.back()).epsilon(1e-10));
    CHECK(ep.residual <= 1e-12 * ep.value);

    // The two steering vectors are orthogonal here, so lambda1 = 4 is double and
    // only the eigenspace span{s1, s2} is determined.
    CHECK(ep.value == Approx(4.0).epsilon(1e-12));
    CHECK(ep.degenerate);
    const CVector s1 = steering_vector(ula, users.users[0]).values;
    const CVector s2 = steering_vector(ula, users.users[1]).values;
    CHECK(std::abs(s1.dot(s2)) < 1e-12);
    const double captured = (std::norm(s1.dot(ep.vector)) + std::norm(s2.dot(ep.vector))) / 4.0;
    CHECK(captured == Approx(1.0).margin(1e-10));
}

TEST_CASE("dominant_eigenpair - non-degenerate gram matrix against the Jacobi oracle")
{
    const ArrayGeometry ula = make_ula(4, 0.5);
    const UserSet users{{Direction::from_degrees(30, 0), Direction::from_degrees(-10, 0)}, "asym"};
    const HermitianMatrix z = build_user_gram(ula, users);

    const oracle::Spectrum ref = oracle::jacobi_eigen(oracle::to_dense(z));
    const EigenPair ep = dominant_eigenpair(z);

    CHECK(ep.value == Approx(ref.values.back()).epsilon(1e-10));
    CHECK_FALSE(ep.degenerate);
    CHECK(phase_free_overlap(ep.vector, ref.vectors.back()) == Approx(1.0).margin(1e-10));
}

TEST_CASE("dominant_eigenpair - properties on seeded PSD matrices")
{
    for (std::uint64_t seed = 1; seed <= 40; ++seed)
    {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(seed % 37);
        const HermitianMatrix m = random_feasible_covariance(n, static_cast<double>(n), seed);
        const EigenPair ep = dominant_eigenpair(m);
        CAPTURE(seed, n);

        const double res = (m.matrix() * ep.vector - ep.value * ep.vector).norm();
        CHECK(res <= 1e-10 * ep.value);
        CHECK(ep.vector.norm() == Approx(1.0).margin(1e-12));
        CHECK(ep.value >= 0.0);

        const oracle::Dense dense = oracle::to_dense(m);
        const oracle::Spectrum ref = oracle::jacobi_eigen(dense);
        CHECK(ep.value == Approx(ref.values.back()).epsilon(1e-10));

        // Rayleigh bound: no unit vector beats lambda1, and the returned vector attains it.
        if (seed % 8 == 0)
        {
            std::mt19937_64 rng(seed);
            double best = -1e300;
            for (int t = 0; t < 1000; ++t)
                best = std::max(best, oracle::rayleigh(dense, oracle::random_unit_vector(dense.size(), rng)));
            CHECK(best <= ep.value * (1.0 + 1e-9));
            std::vector<oracle::cplx> v(ep.vector.data(), ep.vector.data() + ep.vector.size());
            CHECK(oracle::rayleigh(dense, v) == Approx(ep.value).epsilon(1e-9));
        }
    }
}

TEST_CASE("is_psd")
{
    CHECK(is_psd(HermitianMatrix::identity(5)));
    CHECK_FALSE(is_psd(diag({1.0, -1.0})));
    CHECK(is_psd(HermitianMatrix(CMatrix::Zero(3, 3))));

    const ArrayGeometry g = make_square_grid(4, 0.5);
    UserSet users;
    for (int k = 0; k < 5; ++k)
        users.users.push_back(Direction::from_degrees(-20.0 + 9.0 * k, 15.0 * k));
    const HermitianMatrix z = build_user_gram(g, users);
    CHECK(is_psd(z));

    const oracle::Spectrum ref = oracle::jacobi_eigen(oracle::to_dense(z));
    CHECK(ref.values.front() >= -1e-9 * ref.values.back());
}

TEST_CASE("random_feasible_covariance")
{
    const HermitianMatrix one = random_feasible_covariance(1, 5.0, 123);
    CHECK(one.dim() == 1);
    CHECK(one(0, 0) == cplx(5.0, 0.0));

    for (std::uint64_t seed = 0; seed < 50; ++seed)
    {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(seed % 20);
        const double power = 0.5 + static_cast<double>(seed);
        const HermitianMatrix r = random_feasible_covariance(n, power, seed);
        CHECK(std::abs(trace(r) - power) <= 1e-12 * std::max(1.0, power));
        CHECK(is_psd(r));
    }

    CHECK(random_feasible_covariance(8, 3.0, 42) == random_feasible_covariance(8, 3.0, 42));
    CHECK_FALSE(random_feasible_covariance(8, 3.0, 42) == random_feasible_covariance(8, 3.0, 43));
    CHECK_THROWS_AS(random_feasible_covariance(0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(random_feasible_covariance(2, 0.0, 1), std::invalid_argument);
}
