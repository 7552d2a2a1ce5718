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

// Steering vectors, beampattern evaluation on spherical grids, radiated-power quadrature and
// pattern metrics.
//
// Directions use theta = elevation from the x-y plane and phi = azimuth from +x towards +y, so
// the unit vector is (cos t cos p, cos t sin p, sin t) and a z-axis element picks up the phase
// 2*pi*z*sin(theta). Patterns are P = s^H R s / (4 pi), range and propagation delay dropped.

#include "constellations.hpp"
#include "hermitian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace beamforge
{

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kFourPi = 4.0 * std::numbers::pi;
inline constexpr double kAngleSlack = 1e-12;

inline double deg2rad(double d) { return d * (kPi / 180.0); }
inline double rad2deg(double r) { return r * (180.0 / kPi); }

struct Direction
{
    double theta = 0.0; // [-pi/2, pi/2]
    double phi = 0.0;   // [0, 2*pi)

    // Validates theta and wraps phi into [0, 2*pi).
    static Direction make(double theta, double phi)
    {
        if (!std::isfinite(theta) || !std::isfinite(phi))
            throw std::invalid_argument("Direction: non-finite angle");
        if (theta < -0.5 * kPi - kAngleSlack || theta > 0.5 * kPi + kAngleSlack)
            throw std::invalid_argument("Direction: theta outside [-pi/2, pi/2]");
        theta = std::clamp(theta, -0.5 * kPi, 0.5 * kPi);
        phi = std::fmod(phi, kTwoPi);
        if (phi < 0.0)
            phi += kTwoPi;
        if (phi >= kTwoPi)
            phi = 0.0;
        return {theta, phi};
    }

    static Direction from_degrees(double theta_deg, double phi_deg)
    {
        return make(deg2rad(theta_deg), deg2rad(phi_deg));
    }

    Eigen::Vector3d unit() const { return unit_vector(theta, phi); }

    static Eigen::Vector3d unit_vector(double theta, double phi)
    {
        const double ct = std::cos(theta);
        return {ct * std::cos(phi), ct * std::sin(phi), std::sin(theta)};
    }
};

// Great-circle separation in degrees.
inline double angular_distance_deg(double theta1, double phi1, double theta2, double phi2)
{
    const double c = std::sin(theta1) * std::sin(theta2) + std::cos(theta1) * std::cos(theta2) * std::cos(phi1 - phi2);
    const Eigen::Vector3d a = Direction::unit_vector(theta1, phi1);
    const Eigen::Vector3d b = Direction::unit_vector(theta2, phi2);
    // atan2 form stays accurate for nearly coincident directions.
    return rad2deg(std::atan2(a.cross(b).norm(), c));
}

struct UserSet
{
    std::vector<Direction> users;
    std::string label;

    std::size_t size() const noexcept { return users.size(); }

    // Non-empty message when K > N (the array cannot separate more users than it has elements).
    std::string warning_for(std::size_t n_elements) const
    {
        if (users.size() > n_elements)
            return "user count " + std::to_string(users.size()) + " exceeds element count " + std::to_string(n_elements);
        return {};
    }
};

struct SteeringVector
{
    Direction dir;
    CVector values;
};

namespace detail
{

// Path difference p . u in wavelengths.
inline double path_cycles(const Position &p, const Eigen::Vector3d &u)
{
    return p.x() * u.x() + p.y() * u.y() + p.z() * u.z();
}

// exp(j 2 pi t). Whole cycles are removed first; t - round(t) is exact in floating point.
inline cplx phasor_cycles(double t)
{
    const double phase = kTwoPi * (t - std::nearbyint(t));
    return {std::cos(phase), std::sin(phase)};
}

} // namespace detail

inline SteeringVector steering_vector(const ArrayGeometry &geom, const Direction &dir)
{
    const Eigen::Vector3d u = dir.unit();
    SteeringVector s{dir, CVector(static_cast<Eigen::Index>(geom.size()))};
    for (std::size_t i = 0; i < geom.size(); ++i)
        s.values(static_cast<Eigen::Index>(i)) = detail::phasor_cycles(detail::path_cycles(geom[i], u));
    return s;
}

// N x K matrix of user steering vectors.
inline CMatrix steering_matrix(const ArrayGeometry &geom, const UserSet &users)
{
    CMatrix s(static_cast<Eigen::Index>(geom.size()), static_cast<Eigen::Index>(users.size()));
    for (std::size_t k = 0; k < users.size(); ++k)
        s.col(static_cast<Eigen::Index>(k)) = steering_vector(geom, users.users[k]).values;
    return s;
}

// A transmit covariance together with whatever structure makes evaluating s^H R s cheap.
//
// With a factor F (R = F F^H, F is N x r) a pattern value costs O(N r); a diagonal R costs O(N);
// otherwise the dense quadratic form is used.
class Covariance
{
public:
    Covariance(HermitianMatrix r) : r_(std::move(r)) { init(); } // NOLINT: implicit by intent

    // R = F F^H. The factor must reproduce R to 1e-10 relative.
    Covariance(HermitianMatrix r, CMatrix factor) : r_(std::move(r)), factor_(std::move(factor))
    {
        if (factor_->rows() != r_.dim() || factor_->cols() < 1)
            throw std::invalid_argument("Covariance: factor shape does not match matrix");
        const double scale = std::max(r_.matrix().cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
        const double err = (*factor_ * factor_->adjoint() - r_.matrix()).cwiseAbs().maxCoeff();
        if (err > 1e-10 * scale)
            throw std::invalid_argument("Covariance: factor does not reproduce the matrix");
        init();
    }

    // scale * v v^H
    static Covariance rank1(double scale, const CVector &v)
    {
        if (!(scale >= 0.0))
            throw std::invalid_argument("Covariance::rank1: scale must be non-negative");
        return Covariance(HermitianMatrix::outer(v, scale), CMatrix(std::sqrt(scale) * v));
    }

    const HermitianMatrix &matrix() const noexcept { return r_; }
    Eigen::Index dim() const noexcept { return r_.dim(); }
    bool has_factor() const noexcept { return factor_.has_value(); }
    const CMatrix &factor() const { return *factor_; }
    bool is_diagonal() const noexcept { return diagonal_; }

    // Values in (negativity_floor, 0) are round-off and clamp to zero; anything lower means R is
    // not PSD. The floor is 1e-9 of N * sum|R_kk| / (4 pi), an upper bound on P for PSD R.
    double negativity_floor() const noexcept { return -1e-9 * bound_ / kFourPi; }

    // Absolute slack on the imaginary part of s^H R s.
    double imag_slack() const noexcept { return 1e-12 * bound_; }

private:
    void init()
    {
        const CMatrix &m = r_.matrix();
        const Eigen::Index n = m.rows();
        double diag_abs = 0.0;
        diagonal_ = true;
        for (Eigen::Index k = 0; k < n; ++k)
        {
            diag_abs += std::abs(m(k, k).real());
            for (Eigen::Index l = 0; l < n && diagonal_; ++l)
                if (l != k && m(k, l) != cplx(0.0, 0.0))
                    diagonal_ = false;
        }
        bound_ = static_cast<double>(n) * diag_abs;
    }

    HermitianMatrix r_;
    std::optional<CMatrix> factor_;
    bool diagonal_ = false;
    double bound_ = 0.0;
};

namespace detail
{

// Pattern values (already divided by 4 pi) for the steering vectors in the columns of s.
inline Eigen::VectorXd quadratic_forms(const Covariance &cov, const CMatrix &s)
{
    const Eigen::Index m = s.cols();
    Eigen::VectorXd out(m);
    if (cov.has_factor())
    {
        const CMatrix t = cov.factor().adjoint() * s;
        for (Eigen::Index j = 0; j < m; ++j)
            out(j) = t.col(j).squaredNorm();
    }
    else if (cov.is_diagonal())
    {
        const CMatrix &r = cov.matrix().matrix();
        for (Eigen::Index j = 0; j < m; ++j)
        {
            double acc = 0.0;
            for (Eigen::Index i = 0; i < s.rows(); ++i)
                acc += r(i, i).real() * std::norm(s(i, j));
            out(j) = acc;
        }
    }
    else
    {
        const CMatrix y = cov.matrix().matrix() * s;
        for (Eigen::Index j = 0; j < m; ++j)
        {
            const cplx q = s.col(j).dot(y.col(j)); // s^H (R s)
            if (std::abs(q.imag()) > 1e-9 * std::abs(q.real()) + cov.imag_slack())
                throw std::domain_error("pattern_value: imaginary residual " + std::to_string(q.imag()) +
                                        " indicates a non-Hermitian covariance");
            out(j) = q.real();
        }
    }

    const double floor = cov.negativity_floor();
    for (Eigen::Index j = 0; j < m; ++j)
    {
        double v = out(j) / kFourPi;
        if (v < 0.0)
        {
            if (v < floor)
                throw std::domain_error("pattern_value: negative power " + std::to_string(v) +
                                        "; covariance is not positive semidefinite");
            v = 0.0;
        }
        out(j) = v;
    }
    return out;
}

// Steering vectors for one theta row. When the elements take few distinct values per axis
// (lattices, ULAs) each entry is built as a product of per-axis phasors, which needs far fewer
// trig calls than one per element.
class SteeringPlan
{
public:
    explicit SteeringPlan(const ArrayGeometry &geom) : geom_(geom)
    {
        std::size_t distinct = 0;
        for (int a = 0; a < 3; ++a)
        {
            std::vector<double> &v = values_[a];
            for (const auto &p : geom.elements())
                v.push_back(p(a));
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
            index_[a].reserve(geom.size());
            for (const auto &p : geom.elements())
                index_[a].push_back(static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), p(a)) - v.begin()));
            distinct += v.size();
        }
        separable_ = distinct < geom.size();
    }

    bool separable() const noexcept { return separable_; }

    void fill(double theta, const std::vector<double> &phis, CMatrix &s) const
    {
        const auto n = static_cast<Eigen::Index>(geom_.size());
        const auto m = static_cast<Eigen::Index>(phis.size());
        s.resize(n, m);
        std::array<std::vector<cplx>, 3> table;
        for (Eigen::Index j = 0; j < m; ++j)
        {
            const Eigen::Vector3d u = Direction::unit_vector(theta, phis[static_cast<std::size_t>(j)]);
            if (!separable_)
            {
                for (Eigen::Index i = 0; i < n; ++i)
                    s(i, j) = phasor_cycles(path_cycles(geom_[static_cast<std::size_t>(i)], u));
                continue;
            }
            for (int a = 0; a < 3; ++a)
            {
                table[a].resize(values_[a].size());
                for (std::size_t k = 0; k < values_[a].size(); ++k)
                    table[a][k] = values_[a][k] == 0.0 ? cplx(1.0, 0.0) : phasor_cycles(values_[a][k] * u(a));
            }
            for (Eigen::Index i = 0; i < n; ++i)
            {
                const auto e = static_cast<std::size_t>(i);
                s(i, j) = table[0][index_[0][e]] * table[1][index_[1][e]] * table[2][index_[2][e]];
            }
        }
    }

private:
    const ArrayGeometry &geom_;
    std::array<std::vector<double>, 3> values_;
    std::array<std::vector<std::size_t>, 3> index_;
    bool separable_ = false;
};

inline void check_samples(const std::vector<double> &v, double lo, double hi, const char *what)
{
    if (v.empty())
        throw std::invalid_argument(std::string("evaluate_grid: no ") + what + " samples");
    for (std::size_t i = 0; i < v.size(); ++i)
    {
        if (!std::isfinite(v[i]) || v[i] < lo - kAngleSlack || v[i] > hi + kAngleSlack)
            throw std::invalid_argument(std::string("evaluate_grid: ") + what + " sample out of range");
        if (i > 0 && !(v[i] > v[i - 1]))
            throw std::invalid_argument(std::string("evaluate_grid: ") + what + " samples must be strictly increasing");
    }
}

} // namespace detail

// Worker count: `requested` if positive, else BEAMFORGE_THREADS if set and positive, else the
// hardware concurrency.
inline unsigned resolve_threads(unsigned requested = 0)
{
    if (requested > 0)
        return requested;
    if (const char *env = std::getenv("BEAMFORGE_THREADS"))
    {
        char *end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0)
            return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

inline double pattern_value(const Covariance &cov, const SteeringVector &s)
{
    if (s.values.size() != cov.dim())
        throw std::invalid_argument("pattern_value: steering vector length does not match covariance");
    return detail::quadratic_forms(cov, CMatrix(s.values))(0);
}

struct PatternGrid
{
    std::vector<double> theta; // radians, increasing
    std::vector<double> phi;   // radians, increasing
    std::vector<double> power; // theta-major, |theta| x |phi|

    std::size_t rows() const noexcept { return theta.size(); }
    std::size_t cols() const noexcept { return phi.size(); }
    double at(std::size_t i, std::size_t j) const { return power[i * phi.size() + j]; }
};

// Evaluates several covariances on one grid, sharing the steering vectors. Rows are distributed
// over workers round-robin; each row is computed by identical code whatever the worker count,
// so the result is bitwise independent of `threads`.
inline std::vector<PatternGrid> evaluate_grids(const ArrayGeometry &geom, const std::vector<const Covariance *> &covs,
                                               const std::vector<double> &theta_samples,
                                               const std::vector<double> &phi_samples, unsigned threads = 0)
{
    detail::check_samples(theta_samples, -0.5 * kPi, 0.5 * kPi, "theta");
    detail::check_samples(phi_samples, 0.0, kTwoPi, "phi");
    for (const Covariance *c : covs)
        if (c->dim() != static_cast<Eigen::Index>(geom.size()))
            throw std::invalid_argument("evaluate_grid: covariance dimension does not match geometry");

    std::vector<PatternGrid> grids(covs.size());
    for (auto &g : grids)
    {
        g.theta = theta_samples;
        g.phi = phi_samples;
        g.power.assign(theta_samples.size() * phi_samples.size(), 0.0);
    }

    const std::size_t rows = theta_samples.size();
    const std::size_t cols = phi_samples.size();
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), rows));

    const detail::SteeringPlan plan(geom);
    auto run = [&](unsigned w) {
        CMatrix s;
        for (std::size_t i = w; i < rows; i += workers)
        {
            plan.fill(std::clamp(theta_samples[i], -0.5 * kPi, 0.5 * kPi), phi_samples, s);
            for (std::size_t c = 0; c < covs.size(); ++c)
            {
                const Eigen::VectorXd v = detail::quadratic_forms(*covs[c], s);
                std::copy(v.data(), v.data() + cols, grids[c].power.begin() + static_cast<std::ptrdiff_t>(i * cols));
            }
        }
    };

    if (workers <= 1)
    {
        run(0);
        return grids;
    }

    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try
                {
                    run(w);
                }
                catch (...)
                {
                    errors[w] = std::current_exception();
                }
            });
    }
    for (auto &e : errors)
        if (e)
            std::rethrow_exception(e);
    return grids;
}

inline PatternGrid evaluate_grid(const ArrayGeometry &geom, const Covariance &cov, const std::vector<double> &theta_samples,
                                 const std::vector<double> &phi_samples, unsigned threads = 0)
{
    return std::move(evaluate_grids(geom, {&cov}, theta_samples, phi_samples, threads).front());
}

// Samples lo, lo+step, ..., hi (degrees in, radians out). The last sample is hi exactly when the
// span is a whole number of steps.
inline std::vector<double> angle_samples_deg(double lo_deg, double hi_deg, double step_deg)
{
    if (!(step_deg > 0.0) || !(hi_deg >= lo_deg))
        throw std::invalid_argument("angle_samples_deg: need step > 0 and hi >= lo");
    const double span = (hi_deg - lo_deg) / step_deg;
    auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
    {
        const double d = (i + 1 == count && std::abs(span - std::round(span)) < 1e-9) ? hi_deg : lo_deg + i * step_deg;
        out.push_back(deg2rad(d));
    }
    return out;
}

// Gauss-Legendre nodes and weights on [-1, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int order)
{
    if (order < 1)
        throw std::invalid_argument("gauss_legendre: order must be >= 1");
    std::vector<double> x(order), w(order);
    for (int i = 0; i < (order + 1) / 2; ++i)
    {
        double z = std::cos(kPi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it)
        {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= order; ++k)
            {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16)
                break;
        }
        // Recompute the derivative at the converged node.
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= order; ++k)
        {
            const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = order * (z * p1 - p0) / (z * z - 1.0);
        x[i] = -z;
        x[order - 1 - i] = z;
        w[i] = w[order - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return {x, w};
}

// Radiated power: the integral of P(theta, phi) cos(theta) over the sphere, using Gauss-Legendre
// nodes in u = sin(theta) and the periodic trapezoid rule in phi (phi_points defaults to
// max(2 * order, 16)).
inline double integrate_over_sphere(const ArrayGeometry &geom, const Covariance &cov, int order, int phi_points = 0)
{
    if (order < 2)
        throw std::invalid_argument("integrate_over_sphere: quadrature order must be >= 2");
    if (phi_points <= 0)
        phi_points = std::max(2 * order, 16);

    const auto [u, w] = gauss_legendre(order);
    std::vector<double> theta(u.size());
    std::transform(u.begin(), u.end(), theta.begin(), [](double x) { return std::asin(x); });
    std::vector<double> phi(static_cast<std::size_t>(phi_points));
    for (int m = 0; m < phi_points; ++m)
        phi[static_cast<std::size_t>(m)] = kTwoPi * m / phi_points;

    const PatternGrid g = evaluate_grid(geom, cov, theta, phi);
    double total = 0.0;
    for (std::size_t i = 0; i < g.rows(); ++i)
    {
        double row = 0.0;
        for (std::size_t j = 0; j < g.cols(); ++j)
            row += g.at(i, j);
        total += w[i] * row * (kTwoPi / phi_points);
    }
    return total;
}

// Trapezoid estimate of the same integral over the region a sampled grid covers. Accurate only
// for grids spanning the whole sphere at a resolution that resolves the pattern.
inline double integrate_over_sphere(const PatternGrid &g)
{
    if (g.rows() < 2 || g.cols() < 2)
        throw std::invalid_argument("integrate_over_sphere: grid needs at least 2 samples per axis");
    auto trap = [](const std::vector<double> &x, auto &&f) {
        double s = 0.0;
        for (std::size_t k = 1; k < x.size(); ++k)
            s += 0.5 * (f(k - 1) + f(k)) * (x[k] - x[k - 1]);
        return s;
    };
    return trap(g.theta, [&](std::size_t i) {
        return std::cos(g.theta[i]) * trap(g.phi, [&](std::size_t j) { return g.at(i, j); });
    });
}

// Pattern value at each user direction. Their sum times 4 pi equals tr(R Z).
inline std::vector<double> user_powers(const ArrayGeometry &geom, const Covariance &cov, const UserSet &users)
{
    if (cov.dim() != static_cast<Eigen::Index>(geom.size()))
        throw std::invalid_argument("user_powers: covariance dimension does not match geometry");
    std::vector<double> out;
    out.reserve(users.size());
    for (const auto &u : users.users)
        out.push_back(pattern_value(cov, steering_vector(geom, u)));
    return out;
}

// 10 log10(p / peak), floored at -100 dB.
inline double to_db(double p, double peak)
{
    if (!(p > 0.0) || !(peak > 0.0))
        return -100.0;
    return std::max(-100.0, 10.0 * std::log10(p / peak));
}

struct MetricsReport
{
    std::vector<double> user_powers; // nearest-sample grid power per user
    std::vector<bool> resolved;
    double fairness = 0.0;           // min / max of user_powers
    int resolved_count = 0;
    double psl_db = -100.0;          // largest local max away from every user, relative to the peak
    double hpbw_deg = 0.0;           // half-power width of the global peak along theta
    double peak_power = 0.0;
};

namespace detail
{

// Column topology of a grid: whether phi wraps around, and whether the last column repeats the
// first (phi = 0 and phi = 2 pi both sampled).
struct PhiTopology
{
    bool periodic = false;
    std::size_t cols = 0; // distinct columns

    explicit PhiTopology(const std::vector<double> &phi)
    {
        cols = phi.size();
        if (phi.size() < 3)
            return;
        const double span = phi.back() - phi.front();
        const double step = span / static_cast<double>(phi.size() - 1);
        if (span >= kTwoPi - 1e-9)
        {
            periodic = true;
            cols = phi.size() - 1;
        }
        else if (span + step >= kTwoPi - 1e-9)
            periodic = true;
    }

    std::optional<std::size_t> shift(std::size_t j, int dj) const
    {
        const auto t = static_cast<long>(j) + dj;
        if (periodic)
            return static_cast<std::size_t>((t + static_cast<long>(cols)) % static_cast<long>(cols));
        if (t < 0 || t >= static_cast<long>(cols))
            return std::nullopt;
        return static_cast<std::size_t>(t);
    }
};

inline std::size_t nearest_index(const std::vector<double> &v, double x)
{
    std::size_t best = 0;
    for (std::size_t k = 1; k < v.size(); ++k)
        if (std::abs(v[k] - x) < std::abs(v[best] - x))
            best = k;
    return best;
}

inline double half_gap(const std::vector<double> &v, std::size_t k, bool upper)
{
    if (v.size() < 2)
        return 1e-9;
    if (upper)
        return 0.5 * (k + 1 < v.size() ? v[k + 1] - v[k] : v[k] - v[k - 1]);
    return 0.5 * (k > 0 ? v[k] - v[k - 1] : v[k + 1] - v[k]);
}

} // namespace detail

// Per-user power, fairness, resolved users, peak sidelobe level and theta half-power beamwidth.
//
// Local maxima use the 8-neighbourhood (phi wraps when the grid spans the full circle); a cell
// that equals a neighbour wins only if it has the lower (theta, phi) index. A user is resolved
// when a local maximum within resolve_tol_deg of it reaches half the best user's power.
inline MetricsReport pattern_metrics(const PatternGrid &g, const UserSet &users, double resolve_tol_deg = 1.0)
{
    if (g.rows() == 0 || g.cols() == 0 || g.power.size() != g.rows() * g.cols())
        throw std::invalid_argument("pattern_metrics: malformed grid");
    if (!(resolve_tol_deg > 0.0))
        throw std::invalid_argument("pattern_metrics: resolve tolerance must be positive");

    const detail::PhiTopology topo(g.phi);
    const std::size_t rows = g.rows();

    // Users -> nearest samples.
    MetricsReport rep;
    for (const auto &u : users.users)
    {
        const std::size_t i = detail::nearest_index(g.theta, u.theta);
        const bool theta_in = u.theta >= g.theta[i] - detail::half_gap(g.theta, i, false) - kAngleSlack &&
                              u.theta <= g.theta[i] + detail::half_gap(g.theta, i, true) + kAngleSlack;
        std::size_t j = 0;
        bool phi_in = true;
        if (topo.periodic)
        {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < topo.cols; ++c)
            {
                double d = std::abs(std::remainder(g.phi[c] - u.phi, kTwoPi));
                if (d < best)
                    best = d, j = c;
            }
        }
        else
        {
            j = detail::nearest_index(g.phi, u.phi);
            phi_in = u.phi >= g.phi[j] - detail::half_gap(g.phi, j, false) - kAngleSlack &&
                     u.phi <= g.phi[j] + detail::half_gap(g.phi, j, true) + kAngleSlack;
        }
        if (!theta_in || !phi_in)
            throw std::invalid_argument("pattern_metrics: user direction outside grid coverage");
        rep.user_powers.push_back(g.at(i, j));
    }

    // Local maxima.
    struct Peak
    {
        std::size_t i, j;
        double p;
    };
    std::vector<Peak> peaks;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < topo.cols; ++j)
        {
            const double v = g.at(i, j);
            bool is_max = true;
            for (int di = -1; di <= 1 && is_max; ++di)
                for (int dj = -1; dj <= 1 && is_max; ++dj)
                {
                    if (di == 0 && dj == 0)
                        continue;
                    const long ni = static_cast<long>(i) + di;
                    if (ni < 0 || ni >= static_cast<long>(rows))
                        continue;
                    const auto nj = topo.shift(j, dj);
                    if (!nj || (static_cast<std::size_t>(ni) == i && *nj == j))
                        continue;
                    const double nv = g.at(static_cast<std::size_t>(ni), *nj);
                    const bool lower_index = std::make_pair(static_cast<std::size_t>(ni), *nj) < std::make_pair(i, j);
                    if (nv > v || (nv == v && lower_index))
                        is_max = false;
                }
            if (is_max)
                peaks.push_back({i, j, v});
        }

    // Global peak, lowest index on ties.
    std::size_t pi = 0, pj = 0;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < topo.cols; ++j)
            if (g.at(i, j) > g.at(pi, pj))
                pi = i, pj = j;
    rep.peak_power = g.at(pi, pj);

    const double best_user =
        rep.user_powers.empty() ? 0.0 : *std::max_element(rep.user_powers.begin(), rep.user_powers.end());
    const double worst_user =
        rep.user_powers.empty() ? 0.0 : *std::min_element(rep.user_powers.begin(), rep.user_powers.end());
    rep.fairness = best_user > 0.0 ? worst_user / best_user : 0.0;

    rep.resolved.assign(users.size(), false);
    double sidelobe = -1.0;
    for (const auto &pk : peaks)
    {
        bool near_user = false;
        for (std::size_t k = 0; k < users.size(); ++k)
        {
            const auto &u = users.users[k];
            if (angular_distance_deg(g.theta[pk.i], g.phi[pk.j], u.theta, u.phi) <= resolve_tol_deg)
            {
                near_user = true;
                if (pk.p >= 0.5 * best_user && best_user > 0.0)
                    rep.resolved[k] = true;
            }
        }
        if (!near_user)
            sidelobe = std::max(sidelobe, pk.p);
    }
    rep.resolved_count = static_cast<int>(std::count(rep.resolved.begin(), rep.resolved.end(), true));
    rep.psl_db = sidelobe >= 0.0 ? to_db(sidelobe, rep.peak_power) : -100.0;

    // Half-power crossing along theta through the peak column.
    const double half = 0.5 * rep.peak_power;
    auto crossing = [&](int dir) {
        std::size_t prev = pi;
        for (long i = static_cast<long>(pi) + dir; i >= 0 && i < static_cast<long>(rows); i += dir)
        {
            const auto k = static_cast<std::size_t>(i);
            const double p = g.at(k, pj);
            if (p < half)
            {
                const double a = g.at(prev, pj);
                const double f = (a - half) / (a - p);
                return g.theta[prev] + f * (g.theta[k] - g.theta[prev]);
            }
            prev = k;
        }
        return g.theta[prev];
    };
    rep.hpbw_deg = rad2deg(crossing(+1) - crossing(-1));
    return rep;
}

} // namespace beamforge
