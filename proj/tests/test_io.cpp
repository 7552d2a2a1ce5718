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

#include <beamforge/io.hpp>
#include <beamforge/scenarios.hpp>

#include <fstream>
#include <sstream>

using namespace beamforge;
using Catch::Approx;
using io::json;

namespace
{

std::string slurp(const std::filesystem::path &p)
{
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("HermitianMatrix JSON")
{
    const HermitianMatrix r = random_feasible_covariance(5, 5.0, 17);
    const json j = io::to_json(r);
    CHECK(j.at("dim") == 5);
    CHECK(j.at("re").size() == 5);
    const HermitianMatrix back = io::hermitian_from_json(j);
    CHECK(back == r);
    CHECK(io::dump(io::to_json(back)) == io::dump(j));

    SECTION("asymmetric input is rejected")
    {
        json bad = j;
        bad["re"][0][1] = bad["re"][0][1].get<double>() + 1e-6;
        CHECK_THROWS_AS(io::hermitian_from_json(bad), std::invalid_argument);
    }

    SECTION("shape errors")
    {
        json bad = j;
        bad["dim"] = 4;
        CHECK_THROWS_AS(io::hermitian_from_json(bad), std::invalid_argument);
        json ragged = j;
        ragged["im"][2].erase(0);
        CHECK_THROWS_AS(io::hermitian_from_json(ragged), std::invalid_argument);
        json zero = j;
        zero["dim"] = 0;
        CHECK_THROWS_AS(io::hermitian_from_json(zero), std::invalid_argument);
        CHECK_THROWS(io::hermitian_from_json(json{{"dim", 2}}));
    }
}

TEST_CASE("geometry JSON")
{
    for (const auto &name : scenarios::planar_names())
    {
        CAPTURE(name);
        const ArrayGeometry g = scenarios::make_constellation(name);
        const std::string text = io::dump(io::to_json(g));
        const ArrayGeometry back = io::geometry_from_json(json::parse(text));
        CHECK(back == g);
        CHECK(back.label() == g.label());
        CHECK(io::dump(io::to_json(back)) == text);
    }

    const json j = json::parse(R"({"label": "pair", "elements": [[0, 0, -0.25], [0, 0, 0.25]]})");
    const ArrayGeometry g = io::geometry_from_json(j);
    CHECK(g.size() == 2);
    CHECK(g[1].z() == 0.25);
    CHECK(g.label() == "pair");

    CHECK_THROWS_AS(io::geometry_from_json(json::parse(R"({"elements": [[0, 0]]})")), std::invalid_argument);
    CHECK_THROWS_AS(io::geometry_from_json(json::parse(R"({"elements": []})")), std::invalid_argument);
    CHECK_THROWS(io::geometry_from_json(json::parse(R"({"label": "x"})")));
}

TEST_CASE("users JSON")
{
    const UserSet u = scenarios::shipped_users();
    const std::string text = io::dump(io::to_json(u));
    const UserSet back = io::users_from_json(json::parse(text));
    REQUIRE(back.size() == u.size());
    for (std::size_t k = 0; k < u.size(); ++k)
    {
        CHECK(back.users[k].theta == u.users[k].theta);
        CHECK(back.users[k].phi == u.users[k].phi);
    }
    CHECK(io::dump(io::to_json(back)) == text);

    const UserSet wrapped = io::users_from_json(json::parse(R"({"users": [{"theta": 0.1, "phi": -0.5}], "range_km": 100})"));
    CHECK(wrapped.users[0].phi == Approx(kTwoPi - 0.5).epsilon(1e-15));
    CHECK_THROWS_AS(io::users_from_json(json::parse(R"({"users": [{"theta": 2.0, "phi": 0}]})")), std::invalid_argument);
}

TEST_CASE("design JSON")
{
    const ArrayGeometry g = make_square_grid(4, 0.5);
    const UserSet users = scenarios::shipped_users();

    for (DesignMethod m : {DesignMethod::eig, DesignMethod::ideal, DesignMethod::identity, DesignMethod::full_ones,
                           DesignMethod::toeplitz})
    {
        CAPTURE(to_string(m));
        const DesignResult d = design(g, &users, {16.0, m, 0.7});
        const json j = io::to_json(d);
        CHECK(j.at("method") == to_string(m));
        CHECK(j.at("power_budget") == 16.0);
        CHECK(j.at("objective").get<double>() == *d.achieved_objective);
        CHECK(j.at("degenerate") == d.degenerate);
        CHECK(j.contains("rho") == (m == DesignMethod::toeplitz));

        const std::string text = io::dump(j);
        const DesignResult back = io::design_from_json(json::parse(text));
        CHECK(back.R == d.R);
        CHECK(back.spec.method == m);
        CHECK(io::dump(io::to_json(back)) == text);
    }

    SECTION("no users: objective is null")
    {
        const DesignResult d = design(g, nullptr, {16.0, DesignMethod::identity});
        const json j = io::to_json(d);
        CHECK(j.at("objective").is_null());
        CHECK_FALSE(io::design_from_json(j).achieved_objective);
    }

    SECTION("inconsistent rank-one factor is rejected")
    {
        json j = io::to_json(design(g, &users, {16.0, DesignMethod::eig}));
        j["rank1_factor"]["re"][0] = 5.0;
        CHECK_THROWS_AS(io::design_from_json(j), std::invalid_argument);
    }

    SECTION("bad method or budget")
    {
        json j = io::to_json(design(g, nullptr, {16.0, DesignMethod::identity}));
        j["method"] = "nope";
        CHECK_THROWS_AS(io::design_from_json(j), std::invalid_argument);
        j["method"] = "identity";
        j["power_budget"] = -1.0;
        CHECK_THROWS_AS(io::design_from_json(j), std::invalid_argument);
    }
}

TEST_CASE("metrics JSON")
{
    MetricsReport m;
    m.user_powers = {1.0, 0.5};
    m.fairness = 0.5;
    m.resolved_count = 1;
    m.psl_db = -7.0;
    m.hpbw_deg = 4.5;
    const json j = io::to_json(m);
    for (const char *key : {"user_powers", "fairness", "resolved_count", "psl_db", "hpbw_deg"})
        CHECK(j.contains(key));
    CHECK(j.at("user_powers").size() == 2);
    CHECK(j.at("resolved_count") == 1);
}

TEST_CASE("file round trips are byte identical")
{
    const auto dir = oracle::scratch_dir("io_roundtrip");
    const ArrayGeometry g = scenarios::make_constellation("log_spiral");
    const DesignResult d = design(g, nullptr, {400.0, DesignMethod::toeplitz, 0.8});

    const auto gp = (dir / "geom.json").string(), gp2 = (dir / "geom2.json").string();
    io::write_json(gp, io::to_json(g));
    io::write_json(gp2, io::to_json(io::geometry_from_json(io::read_json(gp))));
    CHECK(slurp(gp) == slurp(gp2));

    const auto dp = (dir / "design.json").string(), dp2 = (dir / "design2.json").string();
    io::write_json(dp, io::to_json(d));
    io::write_json(dp2, io::to_json(io::design_from_json(io::read_json(dp))));
    CHECK(slurp(dp) == slurp(dp2));

    CHECK_THROWS_AS(io::read_json((dir / "missing.json").string()), std::runtime_error);
    io::write_text((dir / "broken.json").string(), "{ not json");
    CHECK_THROWS_AS(io::read_json((dir / "broken.json").string()), std::runtime_error);
    CHECK_THROWS_AS(io::write_text((dir / "no" / "such" / "dir.json").string(), "x"), std::runtime_error);
}

TEST_CASE("pattern CSV")
{
    const ArrayGeometry ula = make_ula(4, 0.5);
    const auto theta = angle_samples_deg(-90, 90, 45);
    const auto phi = angle_samples_deg(0, 90, 45);
    const PatternGrid g = evaluate_grid(ula, canonical_matrix(DesignMethod::full_ones, 4, 4.0), theta, phi);

    std::ostringstream os;
    io::write_pattern_csv(os, g);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "theta_deg,phi_deg,power,power_db");

    std::vector<std::string> rows;
    while (std::getline(in, line))
        rows.push_back(line);
    REQUIRE(rows.size() == theta.size() * phi.size());
    CHECK(rows[0].rfind("-90,0,", 0) == 0);
    CHECK(rows[1].rfind("-90,45,", 0) == 0);
    CHECK(rows[3].rfind("-45,0,", 0) == 0);

    // Broadside row holds the peak: 16 / (4 pi) and 0 dB.
    CHECK(rows[6] == "0,0,1.27323954,0");
    double p = 0.0, db = 0.0;
    std::sscanf(rows[0].c_str(), "%*g,%*g,%lg,%lg", &p, &db);
    CHECK(db == Approx(to_db(p, 16.0 / kFourPi)).margin(1e-7));
}
