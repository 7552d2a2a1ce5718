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

// File formats: geometry / users / matrix / design / metrics JSON and pattern CSV.
// JSON objects use sorted keys, so output is byte-stable for a given value.

#include "design.hpp"
#include "radiation.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace beamforge::io
{

using json = nlohmann::json;

inline json to_json(const HermitianMatrix &m)
{
    const auto n = m.dim();
    json re = json::array(), im = json::array();
    for (Eigen::Index k = 0; k < n; ++k)
    {
        json rr = json::array(), ii = json::array();
        for (Eigen::Index l = 0; l < n; ++l)
        {
            rr.push_back(m(k, l).real());
            ii.push_back(m(k, l).imag());
        }
        re.push_back(std::move(rr));
        im.push_back(std::move(ii));
    }
    return {{"dim", n}, {"re", std::move(re)}, {"im", std::move(im)}};
}

namespace detail
{

inline CMatrix complex_rows(const json &re, const json &im, Eigen::Index rows, Eigen::Index cols, const char *what)
{
    if (!re.is_array() || !im.is_array() || static_cast<Eigen::Index>(re.size()) != rows ||
        static_cast<Eigen::Index>(im.size()) != rows)
        throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(rows) + " rows");
    CMatrix m(rows, cols);
    for (Eigen::Index k = 0; k < rows; ++k)
    {
        const json &rr = re[static_cast<std::size_t>(k)];
        const json &ii = im[static_cast<std::size_t>(k)];
        if (!rr.is_array() || !ii.is_array() || static_cast<Eigen::Index>(rr.size()) != cols ||
            static_cast<Eigen::Index>(ii.size()) != cols)
            throw std::invalid_argument(std::string(what) + ": row " + std::to_string(k) + " has wrong length");
        for (Eigen::Index l = 0; l < cols; ++l)
            m(k, l) = cplx(rr[static_cast<std::size_t>(l)].get<double>(), ii[static_cast<std::size_t>(l)].get<double>());
    }
    return m;
}

} // namespace detail

// Reads {"dim", "re", "im"}; Hermitian symmetry is verified by the HermitianMatrix constructor.
inline HermitianMatrix hermitian_from_json(const json &j)
{
    const auto n = j.at("dim").get<Eigen::Index>();
    if (n < 1)
        throw std::invalid_argument("matrix JSON: dim must be >= 1");
    return HermitianMatrix(detail::complex_rows(j.at("re"), j.at("im"), n, n, "matrix JSON"));
}

inline json to_json(const ArrayGeometry &g)
{
    json el = json::array();
    for (const auto &p : g.elements())
        el.push_back({p.x(), p.y(), p.z()});
    return {{"label", g.label()}, {"elements", std::move(el)}};
}

inline ArrayGeometry geometry_from_json(const json &j)
{
    std::vector<Position> el;
    for (const auto &p : j.at("elements"))
    {
        if (!p.is_array() || p.size() != 3)
            throw std::invalid_argument("geometry JSON: each element must be [x, y, z]");
        el.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
    }
    return ArrayGeometry(std::move(el), j.value("label", std::string{}));
}

inline json to_json(const UserSet &u)
{
    json arr = json::array();
    for (const auto &d : u.users)
        arr.push_back({{"theta", d.theta}, {"phi", d.phi}});
    return {{"label", u.label}, {"users", std::move(arr)}};
}

// Angles in radians. Extra keys (range, provenance) are ignored.
inline UserSet users_from_json(const json &j)
{
    UserSet u;
    u.label = j.value("label", std::string{});
    for (const auto &d : j.at("users"))
        u.users.push_back(Direction::make(d.at("theta").get<double>(), d.at("phi").get<double>()));
    return u;
}

inline json to_json(const DesignResult &d)
{
    json j = {{"method", to_string(d.spec.method)},
              {"power_budget", d.spec.power_budget},
              {"degenerate", d.degenerate},
              {"R", to_json(d.R)}};
    j["objective"] = d.achieved_objective ? json(*d.achieved_objective) : json(nullptr);
    if (d.spec.method == DesignMethod::toeplitz)
        j["rho"] = d.spec.rho;
    if (d.rank1_factor)
    {
        json re = json::array(), im = json::array();
        for (Eigen::Index k = 0; k < d.rank1_factor->size(); ++k)
        {
            re.push_back((*d.rank1_factor)(k).real());
            im.push_back((*d.rank1_factor)(k).imag());
        }
        j["rank1_factor"] = {{"re", std::move(re)}, {"im", std::move(im)}};
    }
    return j;
}

inline DesignResult design_from_json(const json &j)
{
    DesignSpec spec;
    spec.method = parse_design_method(j.at("method").get<std::string>());
    spec.power_budget = j.at("power_budget").get<double>();
    spec.rho = j.value("rho", 0.8);
    spec.validate();

    DesignResult d{spec, hermitian_from_json(j.at("R")), std::nullopt, std::nullopt, std::nullopt,
                   j.value("degenerate", false)};
    if (j.contains("objective") && !j.at("objective").is_null())
        d.achieved_objective = j.at("objective").get<double>();
    if (j.contains("rank1_factor"))
    {
        const json &f = j.at("rank1_factor");
        const CMatrix v = detail::complex_rows(json::array({f.at("re")}), json::array({f.at("im")}), 1, d.R.dim(),
                                               "rank1_factor");
        d.rank1_factor = CVector(v.row(0).transpose());
        d.covariance(); // validates R = Pt v v^H
    }
    return d;
}

inline json to_json(const MetricsReport &m)
{
    return {{"user_powers", m.user_powers},
            {"fairness", m.fairness},
            {"resolved_count", m.resolved_count},
            {"psl_db", m.psl_db},
            {"hpbw_deg", m.hpbw_deg}};
}

inline std::string dump(const json &j) { return j.dump(2) + "\n"; }

inline void write_text(const std::string &path, const std::string &text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    f << text;
    f.flush();
    if (!f)
        throw std::runtime_error("write to '" + path + "' failed");
}

inline void write_json(const std::string &path, const json &j) { write_text(path, dump(j)); }

inline json read_json(const std::string &path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open '" + path + "' for reading");
    try
    {
        return json::parse(f);
    }
    catch (const json::parse_error &e)
    {
        throw std::runtime_error("'" + path + "' is not valid JSON: " + e.what());
    }
}

// CSV: theta_deg,phi_deg,power,power_db; theta-major; 9 significant digits; dB relative to the
// grid maximum, floored at -100.
inline void write_pattern_csv(std::ostream &os, const PatternGrid &g)
{
    double peak = 0.0;
    for (double p : g.power)
        peak = std::max(peak, p);

    os << "theta_deg,phi_deg,power,power_db\n";
    char line[128];
    for (std::size_t i = 0; i < g.rows(); ++i)
    {
        const double td = rad2deg(g.theta[i]);
        for (std::size_t j = 0; j < g.cols(); ++j)
        {
            const double p = g.at(i, j);
            const int len =
                std::snprintf(line, sizeof line, "%.9g,%.9g,%.9g,%.9g\n", td, rad2deg(g.phi[j]), p, to_db(p, peak));
            os.write(line, len);
        }
    }
}

inline void write_pattern_csv(const std::string &path, const PatternGrid &g)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    write_pattern_csv(f, g);
    f.flush();
    if (!f)
        throw std::runtime_error("write to '" + path + "' failed");
}

} // namespace beamforge::io
