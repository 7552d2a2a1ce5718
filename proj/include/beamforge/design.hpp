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

// Transmit covariance designs: the user gram matrix, the dominant-eigenvector design that
// maximizes tr(R Z) under tr(R) = Pt, the "ideal" design R proportional to Z, and the canonical
// fully-correlated / Toeplitz / uncorrelated matrices.

#include "hermitian.hpp"
#include "radiation.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace beamforge
{

enum class DesignMethod
{
    eig,
    ideal,
    identity,
    full_ones,
    toeplitz,
};

inline std::string to_string(DesignMethod m)
{
    switch (m)
    {
    case DesignMethod::eig: return "eig";
    case DesignMethod::ideal: return "ideal";
    case DesignMethod::identity: return "identity";
    case DesignMethod::full_ones: return "full_ones";
    case DesignMethod::toeplitz: return "toeplitz";
    }
    return "unknown";
}

inline DesignMethod parse_design_method(const std::string &s)
{
    for (DesignMethod m : {DesignMethod::eig, DesignMethod::ideal, DesignMethod::identity, DesignMethod::full_ones,
                           DesignMethod::toeplitz})
        if (to_string(m) == s)
            return m;
    throw std::invalid_argument("unknown design method '" + s + "' (expected eig, ideal, identity, full_ones, toeplitz)");
}

inline bool needs_users(DesignMethod m) { return m == DesignMethod::eig || m == DesignMethod::ideal; }

struct DesignSpec
{
    double power_budget = 1.0; // Pt
    DesignMethod method = DesignMethod::eig;
    double rho = 0.8; // toeplitz only

    void validate() const
    {
        if (!(power_budget > 0.0))
            throw std::invalid_argument("DesignSpec: power budget must be positive");
        if (method == DesignMethod::toeplitz && !(rho >= 0.0 && rho <= 1.0))
            throw std::invalid_argument("DesignSpec: toeplitz rho must lie in [0, 1]");
    }
};

struct DesignResult
{
    DesignSpec spec;
    HermitianMatrix R;
    std::optional<double> achieved_objective; // tr(R Z); absent when designed without users
    std::optional<CVector> rank1_factor;      // unit v with R = Pt v v^H
    std::optional<CMatrix> low_rank_factor;   // F with R = F F^H
    bool degenerate = false;

    Covariance covariance() const
    {
        if (rank1_factor)
            return Covariance(R, CMatrix(std::sqrt(spec.power_budget) * *rank1_factor));
        if (low_rank_factor)
            return Covariance(R, *low_rank_factor);
        return Covariance(R);
    }
};

// tr(R Z) for Hermitian R, Z (real up to round-off).
inline double trace_product(const HermitianMatrix &r, const HermitianMatrix &z)
{
    if (r.dim() != z.dim())
        throw std::invalid_argument("trace_product: dimension mismatch");
    return r.matrix().cwiseProduct(z.matrix().transpose()).sum().real();
}

// Z = sum_k s(u_k) s(u_k)^H. PSD with trace K * N.
inline HermitianMatrix build_user_gram(const ArrayGeometry &geom, const UserSet &users)
{
    if (users.size() == 0)
        throw std::invalid_argument("build_user_gram: need at least one user");
    const CMatrix s = steering_matrix(geom, users);
    return HermitianMatrix(s * s.adjoint());
}

namespace detail
{

inline void check_gram(const HermitianMatrix &z, const char *who)
{
    if (z.matrix().cwiseAbs().maxCoeff() == 0.0 || !(trace(z) > 0.0))
        throw std::domain_error(std::string(who) + ": zero matrix has no dominant direction");
    if (!is_psd(z))
        throw std::invalid_argument(std::string(who) + ": user gram matrix is not positive semidefinite");
}

} // namespace detail

// R = Pt v v^H with v the unit dominant eigenvector of Z; maximizes tr(R Z) over PSD R with
// trace Pt, reaching Pt * lambda_1(Z).
inline DesignResult design_eig(const HermitianMatrix &z, DesignSpec spec)
{
    spec.method = DesignMethod::eig;
    spec.validate();
    detail::check_gram(z, "design_eig");

    const EigenPair ep = dominant_eigenpair(z);
    DesignResult out{spec, HermitianMatrix::outer(ep.vector, spec.power_budget), std::nullopt, ep.vector,
                     std::nullopt, ep.degenerate};
    out.achieved_objective = trace_product(out.R, z);
    return out;
}

// R = Pt Z / tr(Z).
inline DesignResult design_ideal(const HermitianMatrix &z, DesignSpec spec)
{
    spec.method = DesignMethod::ideal;
    spec.validate();
    detail::check_gram(z, "design_ideal");

    const double scale = spec.power_budget / trace(z);
    DesignResult out{spec, HermitianMatrix(scale * z.matrix()), std::nullopt, std::nullopt, std::nullopt, false};
    out.achieved_objective = trace_product(out.R, z);
    return out;
}

// Same design, built from the users directly so the result carries the factor
// sqrt(Pt / tr Z) * [s_1 ... s_K] for O(N K) pattern evaluation.
inline DesignResult design_ideal(const ArrayGeometry &geom, const UserSet &users, const DesignSpec &spec)
{
    const HermitianMatrix z = build_user_gram(geom, users);
    DesignResult out = design_ideal(z, spec);
    out.low_rank_factor = std::sqrt(spec.power_budget / trace(z)) * steering_matrix(geom, users);
    return out;
}

// Fully correlated (all ones), Toeplitz rho^|k-l|, or identity; scaled to trace Pt.
inline HermitianMatrix canonical_matrix(DesignMethod kind, Eigen::Index dim, double power_budget, double rho = 0.8)
{
    if (dim < 1)
        throw std::invalid_argument("canonical_matrix: dim must be >= 1");
    DesignSpec{power_budget, kind, rho}.validate();

    CMatrix m(dim, dim);
    switch (kind)
    {
    case DesignMethod::full_ones: m.setOnes(); break;
    case DesignMethod::identity: m.setIdentity(); break;
    case DesignMethod::toeplitz:
        for (Eigen::Index k = 0; k < dim; ++k)
            for (Eigen::Index l = 0; l < dim; ++l)
                m(k, l) = std::pow(rho, static_cast<double>(std::abs(k - l)));
        break;
    default: throw std::invalid_argument("canonical_matrix: " + to_string(kind) + " is not a canonical kind");
    }
    const double scale = power_budget / static_cast<double>(dim);
    if (scale != 1.0)
        m *= scale;
    return HermitianMatrix(std::move(m));
}

// Canonical design; the objective is filled in when a gram matrix is supplied.
inline DesignResult design_canonical(const DesignSpec &spec, Eigen::Index dim, const HermitianMatrix *z = nullptr)
{
    DesignResult out{spec, canonical_matrix(spec.method, dim, spec.power_budget, spec.rho), std::nullopt,
                     std::nullopt, std::nullopt, false};
    if (spec.method == DesignMethod::full_ones)
        out.rank1_factor = CVector::Constant(dim, cplx(1.0 / std::sqrt(static_cast<double>(dim)), 0.0));
    if (z)
        out.achieved_objective = trace_product(out.R, *z);
    return out;
}

// Dispatch on spec.method. eig and ideal need users.
inline DesignResult design(const ArrayGeometry &geom, const UserSet *users, const DesignSpec &spec)
{
    spec.validate();
    const auto n = static_cast<Eigen::Index>(geom.size());
    if (needs_users(spec.method))
    {
        if (!users || users->size() == 0)
            throw std::invalid_argument("design: method " + to_string(spec.method) + " needs a user set");
        if (spec.method == DesignMethod::ideal)
            return design_ideal(geom, *users, spec);
        return design_eig(build_user_gram(geom, *users), spec);
    }
    if (users && users->size() > 0)
    {
        const HermitianMatrix z = build_user_gram(geom, *users);
        return design_canonical(spec, n, &z);
    }
    return design_canonical(spec, n);
}

} // namespace beamforge
