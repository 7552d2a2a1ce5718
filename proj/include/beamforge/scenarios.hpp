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

// Scripted experiments: the 10-element ULA with the three canonical matrices, the 50-element ULA
// and the six 400-element planar constellations, each run with the eigen and ideal designs
// against one shipped 6-user set. Each run writes a self-describing bundle directory.

#include "constellations.hpp"
#include "design.hpp"
#include "io.hpp"
#include "radiation.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace beamforge::scenarios
{

using io::json;

// The spiral constants a = 0.15, 0.08, 0.28 are read in units of this many wavelengths. With a in
// plain wavelengths the inner turns of the log spiral and every turn of the n = 3 spiral sit
// closer than a quarter wavelength.
inline constexpr double kSpiralUnit = 8.0;
inline constexpr double kElementSpacing = 0.5;
inline constexpr double kArcSpacing = 0.5;
inline constexpr int kPlanarElements = 400;
inline constexpr double kUserRangeKm = 100.0;

// (y, z) offsets in km of the shipped users, all at x = 100 km.
inline constexpr std::array<std::array<double, 2>, 6> kShippedUserOffsetsKm = {{
    {-20.0, 15.0},
    {5.0, 25.0},
    {25.0, 5.0},
    {-10.0, -20.0},
    {15.0, -15.0},
    {-25.0, -3.0},
}};

inline Direction direction_from_position(double x, double y, double z)
{
    const double d = std::sqrt(x * x + y * y + z * z);
    return Direction::make(std::asin(z / d), std::atan2(y, x));
}

inline UserSet shipped_users()
{
    UserSet u;
    u.label = "shipped-v1";
    for (const auto &p : kShippedUserOffsetsKm)
        u.users.push_back(direction_from_position(kUserRangeKm, p[0], p[1]));
    return u;
}

inline const std::vector<std::string> &planar_names()
{
    static const std::vector<std::string> names = {"square", "disk", "hexagon", "log_spiral", "archimedes1", "archimedes3"};
    return names;
}

inline const std::vector<std::string> &scenario_names()
{
    static const std::vector<std::string> names = {"fig1",       "ula50",       "square",      "disk",      "hexagon",
                                                   "log_spiral", "archimedes1", "archimedes3", "all-planar"};
    return names;
}

inline ArrayGeometry make_constellation(const std::string &name)
{
    if (name == "square")
        return make_square_grid(20, kElementSpacing);
    if (name == "disk")
        return make_disk(kPlanarElements, kElementSpacing);
    if (name == "hexagon")
        return make_hexagon(kPlanarElements, kElementSpacing);
    if (name == "log_spiral")
        return make_log_spiral(kPlanarElements, {0.15 * kSpiralUnit, 0.1, 1, 0.0}, kArcSpacing);
    if (name == "archimedes1")
        return make_archimedes_spiral(kPlanarElements, {0.08 * kSpiralUnit, 0.0, 1, 2.0 * kPi}, kArcSpacing);
    if (name == "archimedes3")
        return make_archimedes_spiral(kPlanarElements, {0.28 * kSpiralUnit, 0.0, 3, 2.0 * kPi}, kArcSpacing);
    throw std::invalid_argument("unknown constellation '" + name + "'");
}

struct GridSpec
{
    double theta_min_deg = -90.0;
    double theta_max_deg = 90.0;
    double theta_step_deg = 0.25;
    double phi_min_deg = 0.0;
    double phi_max_deg = 360.0;
    double phi_step_deg = 0.5;

    std::vector<double> thetas() const { return angle_samples_deg(theta_min_deg, theta_max_deg, theta_step_deg); }
    std::vector<double> phis() const { return angle_samples_deg(phi_min_deg, phi_max_deg, phi_step_deg); }

    json to_json() const
    {
        return {{"theta_min_deg", theta_min_deg}, {"theta_max_deg", theta_max_deg}, {"theta_step_deg", theta_step_deg},
                {"phi_min_deg", phi_min_deg},     {"phi_max_deg", phi_max_deg},     {"phi_step_deg", phi_step_deg}};
    }
};

struct RunOptions
{
    GridSpec grid;
    double resolve_tol_deg = 1.0;
    std::optional<UserSet> users; // replaces the shipped set
    std::optional<double> power_budget; // default: element count
    unsigned threads = 0;
};

struct MethodOutcome
{
    DesignResult design;
    std::optional<MetricsReport> metrics;
};

struct Bundle
{
    std::string name;
    ArrayGeometry geometry;
    UserSet users;
    std::vector<MethodOutcome> outcomes;
    std::optional<double> lambda1; // dominant eigenvalue of Z, computed independently of the design
    std::vector<std::string> files;

    const MethodOutcome *find(DesignMethod m) const
    {
        for (const auto &o : outcomes)
            if (o.design.spec.method == m)
                return &o;
        return nullptr;
    }
};

namespace detail
{

inline std::string surface_plot(const std::string &scenario, const std::string &method)
{
    std::ostringstream gp;
    gp << "# " << scenario << ": beampattern of the " << method << " design\n"
       << "# usage: gnuplot -p plot_" << method << ".gp\n"
       << "set datafile separator ','\n"
       << "set xlabel 'phi (deg)'\nset ylabel 'theta (deg)'\nset zlabel 'power (dB)'\n"
       << "set palette rgb 33,13,10\nset cbrange [-40:0]\nset zrange [-40:0]\n"
       << "set multiplot layout 1,2 title '" << scenario << " / " << method << "'\n"
       << "set title '3D view'\nset view 60,30\n"
       << "splot 'pattern_" << method << ".csv' skip 1 using 2:1:4 with points pt 5 ps 0.2 palette notitle\n"
       << "set title 'top view'\nset view map\n"
       << "splot 'pattern_" << method << ".csv' skip 1 using 2:1:4 with points pt 5 ps 0.2 palette notitle\n"
       << "unset multiplot\n";
    return gp.str();
}

inline std::string cut_plot(const std::string &scenario, const std::vector<std::string> &methods, bool db)
{
    std::ostringstream gp;
    gp << "# " << scenario << ": theta cut\n"
       << "set datafile separator ','\n"
       << "set xlabel 'theta (deg)'\nset ylabel '" << (db ? "power (dB)" : "power (W/sr per unit Pt)") << "'\n"
       << "set xrange [-90:90]\nset grid\n"
       << "plot ";
    for (std::size_t k = 0; k < methods.size(); ++k)
        gp << (k ? ", \\\n     " : "") << "'pattern_" << methods[k] << ".csv' skip 1 using 1:" << (db ? 4 : 3)
           << " with lines title '" << methods[k] << "'";
    gp << "\n";
    return gp.str();
}

inline std::vector<double> cut_phi() { return {0.0}; }

// Users moved onto the phi = 0 cut. Exact for z-axis arrays, whose patterns do not depend on phi.
inline UserSet project_to_cut(const UserSet &u)
{
    UserSet out = u;
    for (auto &d : out.users)
        d.phi = 0.0;
    return out;
}

class BundleWriter
{
public:
    explicit BundleWriter(std::filesystem::path dir) : dir_(std::move(dir))
    {
        if (!dir_.empty())
            std::filesystem::create_directories(dir_);
    }

    bool enabled() const { return !dir_.empty(); }

    void text(const std::string &name, const std::string &content)
    {
        if (!enabled())
            return;
        io::write_text((dir_ / name).string(), content);
        files_.push_back(name);
    }

    void json_file(const std::string &name, const json &j) { text(name, io::dump(j)); }

    void csv(const std::string &name, const PatternGrid &g)
    {
        if (!enabled())
            return;
        io::write_pattern_csv((dir_ / name).string(), g);
        files_.push_back(name);
    }

    std::vector<std::string> finish(const std::string &scenario, const json &defaults)
    {
        std::sort(files_.begin(), files_.end());
        if (enabled())
        {
            json m = {{"scenario", scenario}, {"files", files_}, {"defaults", defaults}};
            io::write_json((dir_ / "manifest.json").string(), m);
        }
        return files_;
    }

private:
    std::filesystem::path dir_;
    std::vector<std::string> files_;
};

inline json users_file(const UserSet &u, bool shipped)
{
    json j = io::to_json(u);
    if (shipped)
    {
        j["range_km"] = kUserRangeKm;
        json pos = json::array();
        for (const auto &p : kShippedUserOffsetsKm)
            pos.push_back({kUserRangeKm, p[0], p[1]});
        j["positions_km"] = std::move(pos);
        j["note"] = "artifact-chosen example users; directions are the far-field limit of the positions";
    }
    return j;
}

inline json defaults_json(const RunOptions &opt, double power_budget, bool cut)
{
    json d = {{"element_spacing_wavelengths", kElementSpacing},
              {"arc_spacing_wavelengths", kArcSpacing},
              {"spiral_unit_wavelengths", kSpiralUnit},
              {"power_budget", power_budget},
              {"resolve_tol_deg", opt.resolve_tol_deg},
              {"grid", opt.grid.to_json()}};
    if (cut)
        d["grid"]["phi_cut_deg"] = 0.0;
    return d;
}

// Designs + patterns + metrics for one geometry against one user set.
inline Bundle run_comparison(const std::string &name, ArrayGeometry geom, const std::filesystem::path &out_dir,
                             const RunOptions &opt, bool theta_cut)
{
    const bool shipped = !opt.users.has_value();
    UserSet users = shipped ? shipped_users() : *opt.users;
    const double pt = opt.power_budget.value_or(static_cast<double>(geom.size()));

    Bundle b{name, std::move(geom), users, {}, std::nullopt, {}};
    const HermitianMatrix z = build_user_gram(b.geometry, users);
    b.lambda1 = dominant_eigenpair(z).value;

    b.outcomes.push_back({design_eig(z, {pt, DesignMethod::eig, 0.8}), std::nullopt});
    b.outcomes.push_back({design_ideal(b.geometry, users, {pt, DesignMethod::ideal, 0.8}), std::nullopt});

    const std::vector<double> thetas = opt.grid.thetas();
    const std::vector<double> phis = theta_cut ? cut_phi() : opt.grid.phis();
    const UserSet metric_users = theta_cut ? project_to_cut(users) : users;

    std::vector<Covariance> covs;
    for (const auto &o : b.outcomes)
        covs.push_back(o.design.covariance());
    std::vector<const Covariance *> ptrs;
    for (const auto &c : covs)
        ptrs.push_back(&c);
    const std::vector<PatternGrid> grids = evaluate_grids(b.geometry, ptrs, thetas, phis, opt.threads);

    BundleWriter w(out_dir);
    w.json_file("geometry.json", io::to_json(b.geometry));
    w.json_file("users.json", users_file(users, shipped));
    std::vector<std::string> methods;
    for (std::size_t k = 0; k < b.outcomes.size(); ++k)
    {
        auto &o = b.outcomes[k];
        const std::string m = to_string(o.design.spec.method);
        methods.push_back(m);
        o.metrics = pattern_metrics(grids[k], metric_users, opt.resolve_tol_deg);
        w.json_file("design_" + m + ".json", io::to_json(o.design));
        w.csv("pattern_" + m + ".csv", grids[k]);
        w.json_file("metrics_" + m + ".json", io::to_json(*o.metrics));
        w.text("plot_" + m + ".gp", theta_cut ? cut_plot(name, {m}, true) : surface_plot(name, m));
    }
    if (theta_cut)
        w.text("plot_combined.gp", cut_plot(name, methods, true));
    b.files = w.finish(name, defaults_json(opt, pt, theta_cut));
    return b;
}

} // namespace detail

// 10-element half-wave ULA with the fully correlated, Toeplitz(0.8) and identity covariances,
// evaluated along theta in [-90, 90] deg.
inline Bundle run_fig1(const std::filesystem::path &out_dir, const RunOptions &opt = {})
{
    ArrayGeometry geom = make_ula(10, kElementSpacing);
    const auto n = static_cast<Eigen::Index>(geom.size());
    const double pt = opt.power_budget.value_or(static_cast<double>(n));

    Bundle b{"fig1", geom, UserSet{{}, "none"}, {}, std::nullopt, {}};
    for (DesignMethod m : {DesignMethod::full_ones, DesignMethod::toeplitz, DesignMethod::identity})
        b.outcomes.push_back({design_canonical({pt, m, 0.8}, n), std::nullopt});

    std::vector<Covariance> covs;
    for (const auto &o : b.outcomes)
        covs.push_back(o.design.covariance());
    std::vector<const Covariance *> ptrs;
    for (const auto &c : covs)
        ptrs.push_back(&c);
    const auto grids = evaluate_grids(b.geometry, ptrs, opt.grid.thetas(), detail::cut_phi(), opt.threads);

    detail::BundleWriter w(out_dir);
    w.json_file("geometry.json", io::to_json(b.geometry));
    w.json_file("users.json", io::to_json(b.users));
    std::vector<std::string> methods;
    for (std::size_t k = 0; k < b.outcomes.size(); ++k)
    {
        const std::string m = to_string(b.outcomes[k].design.spec.method);
        methods.push_back(m);
        w.json_file("design_" + m + ".json", io::to_json(b.outcomes[k].design));
        w.csv("pattern_" + m + ".csv", grids[k]);
        w.text("plot_" + m + ".gp", detail::cut_plot("fig1", {m}, false));
    }
    w.text("plot_combined.gp", detail::cut_plot("fig1", methods, false));
    b.files = w.finish("fig1", detail::defaults_json(opt, pt, true));
    return b;
}

// 50-element half-wave ULA on the z-axis: eigen vs ideal design, theta cut at phi = 0.
inline Bundle run_linear(const std::filesystem::path &out_dir, const RunOptions &opt = {})
{
    return detail::run_comparison("ula50", make_ula(50, kElementSpacing), out_dir, opt, true);
}

// One 400-element planar constellation: eigen vs ideal design over the full grid.
inline Bundle run_planar(const std::string &constellation, const std::filesystem::path &out_dir,
                         const RunOptions &opt = {})
{
    return detail::run_comparison(constellation, make_constellation(constellation), out_dir, opt, false);
}

struct SummaryRow
{
    std::string name;
    std::size_t elements = 0;
    double objective = 0.0; // eigen design tr(R Z)
    double lambda1 = 0.0;
    bool degenerate = false;
    int resolved_eig = 0, resolved_ideal = 0;
    double fairness_eig = 0.0, fairness_ideal = 0.0;
    double psl_db_eig = 0.0, psl_db_ideal = 0.0;
    double hpbw_deg_eig = 0.0, hpbw_deg_ideal = 0.0;
};

// One row per comparison bundle, in input order. Bundles without both designs are skipped.
inline std::vector<SummaryRow> summarize(const std::vector<Bundle> &bundles)
{
    std::vector<SummaryRow> rows;
    for (const auto &b : bundles)
    {
        const MethodOutcome *e = b.find(DesignMethod::eig);
        const MethodOutcome *i = b.find(DesignMethod::ideal);
        if (!e || !i || !e->metrics || !i->metrics)
            continue;
        rows.push_back({b.name, b.geometry.size(), e->design.achieved_objective.value_or(0.0), b.lambda1.value_or(0.0),
                        e->design.degenerate, e->metrics->resolved_count, i->metrics->resolved_count,
                        e->metrics->fairness, i->metrics->fairness, e->metrics->psl_db, i->metrics->psl_db,
                        e->metrics->hpbw_deg, i->metrics->hpbw_deg});
    }
    return rows;
}

inline std::string summary_csv(const std::vector<SummaryRow> &rows)
{
    std::ostringstream os;
    os << "constellation,elements,objective,lambda1,degenerate,resolved_eig,resolved_ideal,fairness_eig,"
          "fairness_ideal,psl_db_eig,psl_db_ideal,hpbw_deg_eig,hpbw_deg_ideal\n";
    char buf[512];
    for (const auto &r : rows)
    {
        std::snprintf(buf, sizeof buf, "%s,%zu,%.9g,%.9g,%d,%d,%d,%.6g,%.6g,%.4f,%.4f,%.4f,%.4f\n", r.name.c_str(),
                      r.elements, r.objective, r.lambda1, r.degenerate ? 1 : 0, r.resolved_eig, r.resolved_ideal,
                      r.fairness_eig, r.fairness_ideal, r.psl_db_eig, r.psl_db_ideal, r.hpbw_deg_eig, r.hpbw_deg_ideal);
        os << buf;
    }
    return os.str();
}

// Runs a registered scenario. "all-planar" writes one sub-directory per constellation plus
// summary.csv at the top.
inline std::vector<Bundle> run_scenario(const std::string &name, const std::filesystem::path &out_dir,
                                        const RunOptions &opt = {})
{
    if (name == "fig1")
        return {run_fig1(out_dir, opt)};
    if (name == "ula50")
        return {run_linear(out_dir, opt)};
    if (name == "all-planar")
    {
        std::vector<Bundle> out;
        for (const auto &c : planar_names())
            out.push_back(run_planar(c, out_dir.empty() ? out_dir : out_dir / c, opt));
        if (!out_dir.empty())
            io::write_text((out_dir / "summary.csv").string(), summary_csv(summarize(out)));
        return out;
    }
    for (const auto &c : planar_names())
        if (c == name)
            return {run_planar(c, out_dir, opt)};

    std::string known;
    for (const auto &s : scenario_names())
        known += (known.empty() ? "" : ", ") + s;
    throw std::invalid_argument("unknown scenario '" + name + "'; available: " + known);
}

} // namespace beamforge::scenarios
