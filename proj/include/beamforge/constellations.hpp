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

// Array geometry generators. Positions are in wavelengths; linear arrays lie on the z-axis,
// planar constellations in the y-z plane (x = 0). Every array is centered on the origin.

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace beamforge
{

using Position = Eigen::Vector3d;

class ArrayGeometry
{
public:
    static constexpr double kMinSeparation = 1e-9;

    ArrayGeometry(std::vector<Position> elements, std::string label)
        : elements_(std::move(elements)), label_(std::move(label))
    {
        if (elements_.empty())
            throw std::invalid_argument("ArrayGeometry: needs at least one element");
        for (const auto &p : elements_)
            if (!p.allFinite())
                throw std::invalid_argument("ArrayGeometry: non-finite element position");
        const double d = min_pairwise_distance();
        if (d < kMinSeparation)
            throw std::invalid_argument("ArrayGeometry '" + label_ + "': elements closer than 1e-9 wavelengths");
    }

    std::size_t size() const noexcept { return elements_.size(); }
    const Position &operator[](std::size_t i) const { return elements_[i]; }
    const std::vector<Position> &elements() const noexcept { return elements_; }
    const std::string &label() const noexcept { return label_; }

    // O(N^2) scan; +inf for a single element.
    double min_pairwise_distance() const
    {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < elements_.size(); ++i)
            for (std::size_t j = i + 1; j < elements_.size(); ++j)
                best = std::min(best, (elements_[i] - elements_[j]).norm());
        return best;
    }

    ArrayGeometry translated(const Position &offset) const
    {
        std::vector<Position> moved = elements_;
        for (auto &p : moved)
            p += offset;
        return ArrayGeometry(std::move(moved), label_);
    }

    bool operator==(const ArrayGeometry &o) const { return label_ == o.label_ && elements_ == o.elements_; }

private:
    std::vector<Position> elements_;
    std::string label_;
};

// Polar spiral parameters. `a` in wavelengths; `b` is the log-spiral growth rate; `n` the
// Archimedes root order; start_angle in radians, measured from the +y axis towards +z.
struct SpiralParams
{
    double a = 0.15;
    double b = 0.1;
    int n = 1;
    double start_angle = 0.0;
};

inline ArrayGeometry make_ula(int count, double spacing)
{
    if (count < 1)
        throw std::invalid_argument("make_ula: count must be >= 1");
    if (!(spacing > 0.0))
        throw std::invalid_argument("make_ula: spacing must be positive");

    const double mid = 0.5 * (count - 1);
    std::vector<Position> el;
    el.reserve(count);
    for (int i = 0; i < count; ++i)
        el.emplace_back(0.0, 0.0, (i - mid) * spacing);
    return ArrayGeometry(std::move(el), "ula" + std::to_string(count));
}

// side x side grid, row-major over (m, n) -> (y, z).
inline ArrayGeometry make_square_grid(int side, double spacing)
{
    if (side < 1)
        throw std::invalid_argument("make_square_grid: side must be >= 1");
    if (!(spacing > 0.0))
        throw std::invalid_argument("make_square_grid: spacing must be positive");

    const double mid = 0.5 * (side - 1);
    std::vector<Position> el;
    el.reserve(static_cast<std::size_t>(side) * side);
    for (int m = 0; m < side; ++m)
        for (int n = 0; n < side; ++n)
            el.emplace_back(0.0, (m - mid) * spacing, (n - mid) * spacing);
    return ArrayGeometry(std::move(el), "square" + std::to_string(side * side));
}

namespace detail
{

// Angle of (y, z) from +y counterclockwise, in [0, 2*pi).
inline double polar_angle(double y, double z)
{
    double t = std::atan2(z, y);
    if (t < 0.0)
        t += 2.0 * std::numbers::pi;
    return t;
}

// Shape norms on the half-cell grid. Arguments are the odd integers Y = 2m+1, Z = 2n+1, i.e.
// coordinates in units of spacing/2. Both norms depend on |Y|, |Z| only, so points related by
// a reflection tie exactly.
inline double disk_norm(long y, long z) { return static_cast<double>(y * y + z * z); }

// Smallest circumradius t of a regular hexagon with a vertex on +y containing the point.
inline double hexagon_norm(long y, long z)
{
    const double ay = static_cast<double>(std::labs(y));
    const double az = static_cast<double>(std::labs(z));
    const double s3 = std::numbers::sqrt3;
    return std::max(2.0 * az / s3, ay + az / s3);
}

// Lower bound of `norm` over all grid points with max(|Y|,|Z|) >= edge.
template <typename Norm>
double outside_bound(Norm norm, long edge)
{
    return std::min(norm(edge, 1L), norm(1L, edge));
}

template <typename Norm>
ArrayGeometry select_offset_grid(int count, double spacing, Norm norm, const std::string &label)
{
    if (count < 1)
        throw std::invalid_argument("offset-grid constellation: count must be >= 1");
    if (!(spacing > 0.0))
        throw std::invalid_argument("offset-grid constellation: spacing must be positive");

    struct Candidate
    {
        double key;
        double angle;
        long y, z;
    };

    // Grow the enumeration box until the count-th key is strictly inside everything the box
    // leaves out; then no excluded point can outrank an included one.
    long half = static_cast<long>(std::ceil(std::sqrt(static_cast<double>(count)))) + 1;
    for (;;)
    {
        std::vector<Candidate> cand;
        cand.reserve(static_cast<std::size_t>(4 * half * half));
        for (long m = -half; m < half; ++m)
            for (long n = -half; n < half; ++n)
            {
                const long y = 2 * m + 1;
                const long z = 2 * n + 1;
                cand.push_back({norm(y, z), polar_angle(static_cast<double>(y), static_cast<double>(z)), y, z});
            }

        if (cand.size() >= static_cast<std::size_t>(count))
        {
            auto by_rank = [](const Candidate &l, const Candidate &r) {
                return l.key != r.key ? l.key < r.key : l.angle < r.angle;
            };
            std::partial_sort(cand.begin(), cand.begin() + count, cand.end(), by_rank);
            if (cand[count - 1].key < outside_bound(norm, 2 * half + 1))
            {
                std::vector<Position> el;
                el.reserve(count);
                for (int i = 0; i < count; ++i)
                    el.emplace_back(0.0, 0.5 * spacing * cand[i].y, 0.5 * spacing * cand[i].z);
                return ArrayGeometry(std::move(el), label);
            }
        }
        half *= 2;
    }
}

} // namespace detail

// Offset half-cell grid points ranked by radius, then by angle from +y.
inline ArrayGeometry make_disk(int count, double spacing)
{
    return detail::select_offset_grid(count, spacing, detail::disk_norm, "disk" + std::to_string(count));
}

// Offset half-cell grid points ranked by hexagon norm (vertex on +y), then by angle from +y.
inline ArrayGeometry make_hexagon(int count, double spacing)
{
    return detail::select_offset_grid(count, spacing, detail::hexagon_norm, "hexagon" + std::to_string(count));
}

// Arclength of r = a e^{b t} from t0 to t1 (closed form).
inline double log_spiral_arclength(const SpiralParams &p, double t0, double t1)
{
    const double c = p.a * std::sqrt(1.0 + p.b * p.b) / p.b;
    return c * (std::exp(p.b * t1) - std::exp(p.b * t0));
}

// Elements marched along r = a e^{b t} at equal arclength steps, starting at start_angle.
inline ArrayGeometry make_log_spiral(int count, const SpiralParams &p, double arc_spacing)
{
    if (count < 1)
        throw std::invalid_argument("make_log_spiral: count must be >= 1");
    if (!(p.a > 0.0) || !(p.b > 0.0))
        throw std::invalid_argument("make_log_spiral: a and b must be positive");
    if (!(arc_spacing > 0.0))
        throw std::invalid_argument("make_log_spiral: arc_spacing must be positive");

    const double c = p.a * std::sqrt(1.0 + p.b * p.b) / p.b;
    std::vector<Position> el;
    el.reserve(count);
    double t = p.start_angle;
    for (int i = 0; i < count; ++i)
    {
        const double r = p.a * std::exp(p.b * t);
        el.emplace_back(0.0, r * std::cos(t), r * std::sin(t));
        t = std::log(std::exp(p.b * t) + arc_spacing / c) / p.b;
    }
    return ArrayGeometry(std::move(el), "log_spiral" + std::to_string(count));
}

// Arclength of r = a t^{1/n} from t0 to t1 by adaptive Gauss-Kronrod quadrature.
// Throws std::runtime_error if the error estimate does not meet 1e-13 relative.
inline double archimedes_arclength(const SpiralParams &p, double t0, double t1)
{
    const double inv_n = 1.0 / p.n;
    auto speed = [&](double t) {
        const double r = p.a * std::pow(t, inv_n);
        const double dr = p.a * inv_n * std::pow(t, inv_n - 1.0);
        return std::hypot(r, dr);
    };
    double err = 0.0;
    const double len =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(speed, t0, t1, 15, 1e-12, &err);
    if (!(err <= 1e-10 * std::max(1.0, std::abs(len))))
        throw std::runtime_error("archimedes_arclength: quadrature did not converge (error estimate " +
                                 std::to_string(err) + ")");
    return len;
}

// Elements marched along r = a t^{1/n} at equal arclength steps. start_angle must be > 0.
inline ArrayGeometry make_archimedes_spiral(int count, const SpiralParams &p, double arc_spacing)
{
    if (count < 1)
        throw std::invalid_argument("make_archimedes_spiral: count must be >= 1");
    if (!(p.a > 0.0) || p.n < 1)
        throw std::invalid_argument("make_archimedes_spiral: need a > 0 and n >= 1");
    if (!(p.start_angle > 0.0))
        throw std::invalid_argument("make_archimedes_spiral: start_angle must be > 0");
    if (!(arc_spacing > 0.0))
        throw std::invalid_argument("make_archimedes_spiral: arc_spacing must be positive");

    const double inv_n = 1.0 / p.n;
    auto radius = [&](double t) { return p.a * std::pow(t, inv_n); };
    auto speed = [&](double t) { return std::hypot(radius(t), p.a * inv_n * std::pow(t, inv_n - 1.0)); };

    std::vector<Position> el;
    el.reserve(count);
    double t = p.start_angle;
    for (int i = 0; i < count; ++i)
    {
        const double r = radius(t);
        el.emplace_back(0.0, r * std::cos(t), r * std::sin(t));
        if (i + 1 == count)
            break;

        // Safeguarded Newton on L(t, u) = arc_spacing; L is increasing in u with slope speed(u).
        double lo = t;
        double hi = t + arc_spacing / speed(t);
        while (archimedes_arclength(p, t, hi) < arc_spacing)
            hi = t + 2.0 * (hi - t);
        double u = 0.5 * (lo + hi);
        bool done = false;
        for (int it = 0; it < 200 && !done; ++it)
        {
            const double f = archimedes_arclength(p, t, u) - arc_spacing;
            if (std::abs(f) <= 1e-13 * arc_spacing)
                done = true;
            else
            {
                (f < 0.0 ? lo : hi) = u;
                double next = u - f / speed(u);
                if (!(next > lo && next < hi))
                    next = 0.5 * (lo + hi);
                if (next == u)
                    done = true;
                u = next;
            }
        }
        if (!done)
            throw std::runtime_error("make_archimedes_spiral: arclength step did not converge");
        t = u;
    }
    return ArrayGeometry(std::move(el), "archimedes" + std::to_string(p.n) + "_" + std::to_string(count));
}

} // namespace beamforge
