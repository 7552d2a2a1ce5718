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

// Command-line front end: geometry -> design -> pattern/metrics pipeline over files, plus the
// scripted scenarios. Angles on the command line are degrees; files hold radians.

#include "constellations.hpp"
#include "design.hpp"
#include "io.hpp"
#include "radiation.hpp"
#include "scenarios.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace beamforge::cli
{

struct GridFlags
{
    scenarios::GridSpec spec;

    void add(CLI::App *app)
    {
        app->add_option("--theta-min", spec.theta_min_deg, "First theta sample (deg)")->capture_default_str();
        app->add_option("--theta-max", spec.theta_max_deg, "Last theta sample (deg)")->capture_default_str();
        app->add_option("--theta-step", spec.theta_step_deg, "Theta step (deg)")->capture_default_str();
        app->add_option("--phi-min", spec.phi_min_deg, "First phi sample (deg)")->capture_default_str();
        app->add_option("--phi-max", spec.phi_max_deg, "Last phi sample (deg)")->capture_default_str();
        app->add_option("--phi-step", spec.phi_step_deg, "Phi step (deg)")->capture_default_str();
    }

    void validate() const
    {
        if (!(spec.theta_step_deg > 0.0) || !(spec.phi_step_deg > 0.0))
            throw std::invalid_argument("grid steps must be positive");
        if (spec.theta_min_deg < -90.0 || spec.theta_max_deg > 90.0 || spec.theta_min_deg > spec.theta_max_deg)
            throw std::invalid_argument("theta range must lie within [-90, 90] with min <= max");
        if (spec.phi_min_deg < 0.0 || spec.phi_max_deg > 360.0 || spec.phi_min_deg > spec.phi_max_deg)
            throw std::invalid_argument("phi range must lie within [0, 360] with min <= max");
    }
};

inline void print_geometry_summary(std::ostream &out, const ArrayGeometry &g)
{
    Position lo = g[0], hi = g[0];
    for (const auto &p : g.elements())
    {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    out << "N=" << g.size() << " bbox x=[" << lo.x() << ", " << hi.x() << "] y=[" << lo.y() << ", " << hi.y()
        << "] z=[" << lo.z() << ", " << hi.z() << "]\n";
}

inline void print_summary(std::ostream &out, const std::vector<scenarios::SummaryRow> &rows)
{
    out << scenarios::summary_csv(rows);
}

// Runs the CLI on argv-style arguments (args[0] is the program name). Returns the exit status.
inline int run(const std::vector<std::string> &args, std::ostream &out = std::cout, std::ostream &err = std::cerr)
{
    CLI::App app{"beamforge: covariance-based transmit beampattern design for MIMO arrays"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Expand all help");

    // geometry
    std::string g_kind, g_out, g_label;
    int g_count = 0, g_side = 20, g_n = 1;
    double g_spacing = 0.5, g_b = 0.1, g_arc = 0.5, g_unit = 1.0;
    std::optional<double> g_a, g_start_deg;
    auto *geo = app.add_subcommand("geometry", "Generate an array geometry file");
    geo->add_option("kind", g_kind, "ula | square | disk | hexagon | log-spiral | archimedes")
        ->required()
        ->check(CLI::IsMember({"ula", "square", "disk", "hexagon", "log-spiral", "archimedes"}));
    geo->add_option("--count", g_count, "Element count")->default_str("50 for ula, 400 otherwise");
    geo->add_option("--spacing", g_spacing, "Element spacing in wavelengths (ula, square, disk, hexagon)")
        ->capture_default_str();
    geo->add_option("--side", g_side, "Elements per side (square)")->capture_default_str();
    geo->add_option("--a", g_a, "Spiral scale a in wavelengths")
        ->default_str("0.15 (log-spiral); 0.08 for n=1, 0.28 for n=3 (archimedes)");
    geo->add_option("--b", g_b, "Log-spiral growth rate b")->capture_default_str();
    geo->add_option("--n", g_n, "Archimedes root order n")->capture_default_str();
    geo->add_option("--start-angle", g_start_deg, "Spiral start angle (deg) from +y")
        ->default_str("0 (log-spiral), 360 (archimedes)");
    geo->add_option("--arc-spacing", g_arc, "Arclength between spiral elements (wavelengths)")->capture_default_str();
    geo->add_option("--unit", g_unit, "Multiplier applied to a (spiral length unit in wavelengths)")
        ->capture_default_str();
    geo->add_option("--label", g_label, "Label stored in the file")->default_str("generator name");
    geo->add_option("--out", g_out, "Output geometry JSON")->required();

    // design
    std::string d_geom, d_users, d_method, d_out;
    std::optional<double> d_power;
    std::optional<int> d_dim;
    double d_rho = 0.8;
    auto *des = app.add_subcommand("design", "Design a transmit covariance");
    des->add_option("--geometry", d_geom, "Geometry JSON (required unless --dim is given for a canonical method)");
    des->add_option("--users", d_users, "Users JSON (required for eig and ideal)");
    des->add_option("--method", d_method, "eig | ideal | identity | full_ones | toeplitz")
        ->required()
        ->check(CLI::IsMember({"eig", "ideal", "identity", "full_ones", "toeplitz"}));
    des->add_option("--power", d_power, "Total transmit power Pt")->default_str("element count N");
    des->add_option("--rho", d_rho, "Toeplitz correlation coefficient")->capture_default_str();
    des->add_option("--dim", d_dim, "Matrix dimension for canonical methods without a geometry")
        ->default_str("element count");
    des->add_option("--out", d_out, "Output design JSON")->required();

    // pattern / metrics share most flags
    std::string p_geom, p_design, p_users, p_out, p_metrics_out;
    double p_tol = 1.0;
    unsigned p_threads = 0;
    GridFlags p_grid;
    auto *pat = app.add_subcommand("pattern", "Evaluate a design's beampattern on a theta/phi grid");
    pat->add_option("--geometry", p_geom, "Geometry JSON")->required();
    pat->add_option("--design", p_design, "Design JSON")->required();
    p_grid.add(pat);
    pat->add_option("--users", p_users, "Users JSON; enables the metrics output");
    pat->add_option("--metrics-out", p_metrics_out, "Metrics JSON path")->default_str("<out>.metrics.json");
    pat->add_option("--resolve-tol", p_tol, "User resolution radius (deg)")->capture_default_str();
    pat->add_option("--threads", p_threads, "Worker threads (0: BEAMFORGE_THREADS or all cores)")
        ->capture_default_str();
    pat->add_option("--out", p_out, "Output pattern CSV")->required();

    std::string m_geom, m_design, m_users, m_out;
    double m_tol = 1.0;
    unsigned m_threads = 0;
    GridFlags m_grid;
    auto *met = app.add_subcommand("metrics", "Pattern metrics for a design and a user set");
    met->add_option("--geometry", m_geom, "Geometry JSON")->required();
    met->add_option("--design", m_design, "Design JSON")->required();
    met->add_option("--users", m_users, "Users JSON")->required();
    m_grid.add(met);
    met->add_option("--resolve-tol", m_tol, "User resolution radius (deg)")->capture_default_str();
    met->add_option("--threads", m_threads, "Worker threads (0: BEAMFORGE_THREADS or all cores)")
        ->capture_default_str();
    met->add_option("--out", m_out, "Output metrics JSON")->required();

    // scenario
    std::string s_name, s_out, s_users;
    std::optional<double> s_power;
    double s_tol = 1.0;
    unsigned s_threads = 0;
    GridFlags s_grid;
    auto *scn = app.add_subcommand("scenario", "Run a scripted experiment and write its bundle");
    scn->add_option("name", s_name, "fig1 | ula50 | square | disk | hexagon | log_spiral | archimedes1 | "
                                    "archimedes3 | all-planar")
        ->required();
    scn->add_option("--out", s_out, "Output directory")->required();
    s_grid.add(scn);
    scn->add_option("--users", s_users, "Users JSON replacing the shipped user set");
    scn->add_option("--power", s_power, "Total transmit power Pt")->default_str("element count N");
    scn->add_option("--resolve-tol", s_tol, "User resolution radius (deg)")->capture_default_str();
    scn->add_option("--threads", s_threads, "Worker threads (0: BEAMFORGE_THREADS or all cores)")
        ->capture_default_str();

    std::vector<const char *> argv;
    for (const auto &a : args)
        argv.push_back(a.c_str());
    try
    {
        app.parse(static_cast<int>(argv.size()), argv.data());
    }
    catch (const CLI::ParseError &e)
    {
        return app.exit(e, out, err);
    }

    try
    {
        if (*geo)
        {
            ArrayGeometry g = [&] {
                const bool ula = g_kind == "ula";
                const int count = g_count > 0 ? g_count : (ula ? 50 : 400);
                if (g_kind == "ula")
                    return make_ula(count, g_spacing);
                if (g_kind == "square")
                    return make_square_grid(g_side, g_spacing);
                if (g_kind == "disk")
                    return make_disk(count, g_spacing);
                if (g_kind == "hexagon")
                    return make_hexagon(count, g_spacing);
                SpiralParams p;
                p.b = g_b;
                p.n = g_n;
                if (g_kind == "log-spiral")
                {
                    p.a = g_a.value_or(0.15) * g_unit;
                    p.start_angle = deg2rad(g_start_deg.value_or(0.0));
                    return make_log_spiral(count, p, g_arc);
                }
                if (!g_a && g_n != 1 && g_n != 3)
                    throw std::invalid_argument("archimedes: --a has no default for n=" + std::to_string(g_n));
                p.a = g_a.value_or(g_n == 3 ? 0.28 : 0.08) * g_unit;
                p.start_angle = deg2rad(g_start_deg.value_or(360.0));
                return make_archimedes_spiral(count, p, g_arc);
            }();
            if (!g_label.empty())
                g = ArrayGeometry(g.elements(), g_label);
            io::write_json(g_out, io::to_json(g));
            print_geometry_summary(out, g);
            return 0;
        }

        if (*des)
        {
            const DesignMethod method = parse_design_method(d_method);
            std::optional<ArrayGeometry> geom;
            if (!d_geom.empty())
                geom = io::geometry_from_json(io::read_json(d_geom));
            if (!geom && !d_dim)
                throw std::invalid_argument("design: need --geometry or --dim");
            if (geom && d_dim && static_cast<std::size_t>(*d_dim) != geom->size())
                throw std::invalid_argument("design: --dim " + std::to_string(*d_dim) +
                                            " does not match the geometry's " + std::to_string(geom->size()) +
                                            " elements");
            if (needs_users(method) && (d_users.empty() || !geom))
                throw std::invalid_argument("design: method " + d_method + " needs --geometry and --users");

            std::optional<UserSet> users;
            if (!d_users.empty())
            {
                if (!geom)
                    throw std::invalid_argument("design: --users needs --geometry");
                users = io::users_from_json(io::read_json(d_users));
                if (const auto w = users->warning_for(geom->size()); !w.empty())
                    err << "warning: " << w << "\n";
            }

            const Eigen::Index n = geom ? static_cast<Eigen::Index>(geom->size()) : *d_dim;
            const DesignSpec spec{d_power.value_or(static_cast<double>(n)), method, d_rho};
            spec.validate();
            const DesignResult r =
                geom ? design(*geom, users ? &*users : nullptr, spec) : design_canonical(spec, n);

            io::write_json(d_out, io::to_json(r));
            out << "method=" << d_method << " objective=";
            if (r.achieved_objective)
                out << *r.achieved_objective;
            else
                out << "n/a";
            out << " degenerate=" << (r.degenerate ? "true" : "false") << "\n";
            return 0;
        }

        if (*pat || *met)
        {
            const bool is_pattern = static_cast<bool>(*pat);
            const GridFlags &grid = is_pattern ? p_grid : m_grid;
            grid.validate();
            const std::string users_path = is_pattern ? p_users : m_users;
            const double tol = is_pattern ? p_tol : m_tol;
            if (!(tol > 0.0))
                throw std::invalid_argument("--resolve-tol must be positive");

            const ArrayGeometry geom = io::geometry_from_json(io::read_json(is_pattern ? p_geom : m_geom));
            const DesignResult d = io::design_from_json(io::read_json(is_pattern ? p_design : m_design));
            if (d.R.dim() != static_cast<Eigen::Index>(geom.size()))
                throw std::invalid_argument("covariance dimension " + std::to_string(d.R.dim()) +
                                            " does not match geometry with " + std::to_string(geom.size()) +
                                            " elements");
            std::optional<UserSet> users;
            if (!users_path.empty())
                users = io::users_from_json(io::read_json(users_path));

            const PatternGrid g = evaluate_grid(geom, d.covariance(), grid.spec.thetas(), grid.spec.phis(),
                                                is_pattern ? p_threads : m_threads);
            std::optional<MetricsReport> rep;
            if (users)
                rep = pattern_metrics(g, *users, tol);

            if (is_pattern)
            {
                io::write_pattern_csv(p_out, g);
                out << "wrote " << g.rows() * g.cols() << " samples (" << g.rows() << " x " << g.cols() << ") to "
                    << p_out << "\n";
                if (rep)
                {
                    std::string mpath = p_metrics_out;
                    if (mpath.empty())
                    {
                        mpath = p_out;
                        if (mpath.size() > 4 && mpath.substr(mpath.size() - 4) == ".csv")
                            mpath.resize(mpath.size() - 4);
                        mpath += ".metrics.json";
                    }
                    io::write_json(mpath, io::to_json(*rep));
                    out << "metrics: fairness=" << rep->fairness << " resolved=" << rep->resolved_count << "\n";
                }
            }
            else
            {
                io::write_json(m_out, io::to_json(*rep));
                out << "fairness=" << rep->fairness << " resolved=" << rep->resolved_count
                    << " psl_db=" << rep->psl_db << " hpbw_deg=" << rep->hpbw_deg << "\n";
            }
            return 0;
        }

        if (*scn)
        {
            s_grid.validate();
            const auto &names = scenarios::scenario_names();
            if (std::find(names.begin(), names.end(), s_name) == names.end())
            {
                err << "unknown scenario '" << s_name << "'; available:";
                for (const auto &n : names)
                    err << " " << n;
                err << "\n";
                return 2;
            }
            scenarios::RunOptions opt;
            opt.grid = s_grid.spec;
            opt.resolve_tol_deg = s_tol;
            opt.power_budget = s_power;
            opt.threads = s_threads;
            if (!s_users.empty())
                opt.users = io::users_from_json(io::read_json(s_users));

            const auto bundles = scenarios::run_scenario(s_name, s_out, opt);
            const auto rows = scenarios::summarize(bundles);
            if (rows.empty())
                for (const auto &b : bundles)
                    out << b.name << ": wrote " << b.files.size() + 1 << " files to " << s_out << "\n";
            else
                print_summary(out, rows);
            return 0;
        }
    }
    catch (const std::exception &e)
    {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace beamforge::cli
