// SPDX-License-Identifier: Apache-2.0
//
// mmsage - massive MIMO channel sounding and SAGE path extraction toolkit
// Copyright (C) 2026 The mmsage authors
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

#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <random>
#include <sstream>

#include "mmsage/evaluation.hpp"
#include "mmsage/serialization.hpp"
#include "test_support.hpp"

using namespace mmsage;
using doctest::Approx;

namespace
{
    PathParams el_path(double delay_ns, double el_deg, PathLabel label = PathLabel::other)
    {
        return test::make_path(delay_ns * 1e-9, 0.0, deg_to_rad(el_deg), 1.0, label);
    }

    /// Reflector on the ray (azimuth, elevation) placed so the bounce delay equals `delay`.
    Eigen::Vector3d reflector_for(const Eigen::Vector3d &tx, double azimuth, double elevation, double delay)
    {
        const Eigen::Vector3d u = direction_vector(azimuth, elevation);
        const double L = speed_of_light * delay;
        const double d = (L * L - tx.squaredNorm()) / (2.0 * (L - tx.dot(u)));
        return d * u;
    }

    /// Cheap noiseless scenario whose reflections sit exactly on the coarse test grid.
    ScenarioSpec on_grid_scenario(const SageConfig &cfg)
    {
        ScenarioSpec s;
        s.id = "ongrid";
        s.tx_position = {4.0, 0.0, 0.0};
        s.snr_db = std::nullopt;
        const auto dg = cfg.delay_grid();
        const auto ag = cfg.azimuth_grid();
        const auto eg = cfg.elevation_grid();
        s.reflectors.push_back(
            {PathLabel::screen, reflector_for(s.tx_position, ag.value(11), eg.value(9), dg.value(50)), 3.0});
        s.reflectors.push_back(
            {PathLabel::pole, reflector_for(s.tx_position, ag.value(11), eg.value(34), dg.value(34)), 6.0});
        return s;
    }
}

TEST_CASE("match_paths examples")
{
    SUBCASE("closest elevation wins inside the gate")
    {
        const auto r = match_paths({el_path(10.5, 80.0), el_path(10.2, 71.0)}, {el_path(10.0, 72.0)});
        REQUIRE(r.entries.size() == 1);
        CHECK(r.entries[0].estimate_index == 1);
        CHECK(r.entries[0].elevation_error_deg == Approx(-1.0));
        CHECK(r.entries[0].delay_error_ns == Approx(0.2));
        CHECK(r.unmatched_truth_count == 0);
        CHECK(r.spurious_estimate_count == 1);
    }

    SUBCASE("estimates outside the gate are never matched")
    {
        const auto r = match_paths({el_path(12.0, 72.0)}, {el_path(10.0, 72.0)});
        CHECK(r.unmatched_truth_count == 1);
        CHECK(r.spurious_estimate_count == 1);
        CHECK_FALSE(r.entries[0].matched.has_value());
        CHECK(r.matched_count() == 0);
    }

    SUBCASE("greedy by ascending truth delay")
    {
        // The earlier truth path takes the shared estimate even though it fits the later one better.
        const auto r = match_paths({el_path(11.0, 100.0)}, {el_path(12.0, 100.0), el_path(10.0, 90.0)});
        REQUIRE(r.entries.size() == 2);
        CHECK(r.entries[0].truth.delay == Approx(10e-9));
        CHECK(r.entries[0].estimate_index == 0);
        CHECK_FALSE(r.entries[1].matched.has_value());
    }

    SUBCASE("elevation ties go to the smaller delay difference, then the lower index")
    {
        const auto r = match_paths({el_path(11.0, 74.0), el_path(10.5, 70.0)}, {el_path(10.0, 72.0)});
        CHECK(r.entries[0].estimate_index == 1);
        const auto r2 = match_paths({el_path(10.5, 74.0), el_path(10.5, 74.0)}, {el_path(10.0, 72.0)});
        CHECK(r2.entries[0].estimate_index == 0);
    }

    SUBCASE("empty inputs")
    {
        const auto r = match_paths({}, {el_path(10.0, 72.0)});
        CHECK(r.unmatched_truth_count == 1);
        const auto r2 = match_paths({el_path(10.0, 72.0)}, {});
        CHECK(r2.entries.empty());
        CHECK(r2.spurious_estimate_count == 1);
    }

    CHECK_THROWS_AS(match_paths({}, {}, 0.0), std::invalid_argument);
}

TEST_CASE("match_paths properties")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ud(5.0, 30.0), ue(50.0, 130.0);
    std::uniform_int_distribution<int> un(0, 5);
    for (int trial = 0; trial < 200; ++trial)
    {
        std::vector<PathParams> est, truth;
        for (int i = un(rng); i > 0; --i)
            est.push_back(el_path(ud(rng), ue(rng)));
        for (int i = un(rng); i > 0; --i)
            truth.push_back(el_path(ud(rng), ue(rng)));
        const auto r = match_paths(est, truth);

        // Each estimate used at most once, every match within the gate, counts consistent.
        std::vector<int> used(est.size(), 0);
        for (const auto &e : r.entries)
            if (e.matched)
            {
                ++used[static_cast<size_t>(e.estimate_index)];
                CHECK(std::abs(e.matched->delay - e.truth.delay) < default_delay_gate);
            }
        for (int u : used)
            CHECK(u <= 1);
        CHECK(r.entries.size() == truth.size());
        CHECK(r.matched_count() + r.unmatched_truth_count == static_cast<int>(truth.size()));
        CHECK(r.matched_count() + r.spurious_estimate_count == static_cast<int>(est.size()));
        CHECK(r.matched_count() <= static_cast<int>(std::min(est.size(), truth.size())));
        for (size_t i = 1; i < r.entries.size(); ++i)
            CHECK(r.entries[i - 1].truth.delay <= r.entries[i].truth.delay);

        // Exact estimates of every truth path all match with zero error.
        const auto self = match_paths(truth, truth);
        CHECK(self.unmatched_truth_count == 0);
        for (const auto &e : self.entries)
            CHECK(e.elevation_error_deg == 0.0);
    }
}

TEST_CASE("antenna scheme labels and parsing")
{
    CHECK(AntennaScheme::columns(16).label() == "columns16");
    CHECK(AntennaScheme::rows(1).label() == "rows1");
    CHECK(AntennaScheme::rows(1, 2).label() == "rows1@2");
    CHECK(AntennaScheme::parse("columns8") == AntennaScheme::columns(8));
    CHECK(AntennaScheme::parse("4") == AntennaScheme::columns(4));
    CHECK(AntennaScheme::parse("row") == AntennaScheme::rows(1));
    CHECK(AntennaScheme::parse("rows1@3") == AntennaScheme::rows(1, 3));
    CHECK_THROWS_AS(AntennaScheme::parse("cols"), std::invalid_argument);
    CHECK_THROWS_AS(AntennaScheme::parse("rows@"), std::invalid_argument);

    const auto geom = default_array();
    CHECK(AntennaScheme::columns(4).selections(geom).size() == 4);
    CHECK(AntennaScheme::columns(16).selections(geom).size() == 1);
    CHECK(AntennaScheme::rows(1).selections(geom).size() == 1);
    CHECK(AntennaScheme::rows(1).selections(geom)[0].size() == 16);
}

TEST_CASE("run_cell on a noiseless on-grid scenario")
{
    const auto geom = default_array();
    const auto cfg = test::coarse_config(2);
    const auto scen = on_grid_scenario(cfg);
    CellOptions opts;
    opts.grid = test::small_grid(41);

    const auto paths = ground_truth_from_scenario(scen, geom.carrier_frequency());
    REQUIRE(paths.size() == 2);
    for (const auto &p : paths)
    {
        const auto dg = cfg.delay_grid();
        const auto eg = cfg.elevation_grid();
        CHECK(std::abs(dg.value(dg.nearest(p.delay)) - p.delay) < 1e-6 * dg.step);
        CHECK(std::abs(eg.value(eg.nearest(p.elevation)) - p.elevation) < 1e-9);
    }

    for (const auto &scheme : {AntennaScheme::columns(16), AntennaScheme::columns(4), AntennaScheme::rows(1)})
    {
        CAPTURE(scheme.label());
        const auto stats = run_cell(scen, geom, scheme, cfg, {1, 2}, opts);
        CHECK_FALSE(stats.failed);
        CHECK(stats.n_runs == 2 * static_cast<int>(scheme.selections(geom).size()));
        CHECK(stats.n_antennas == scheme.selections(geom).front().size());
        CHECK(stats.match_rate == 1.0);
        CHECK(stats.truth_paths == 2 * stats.n_runs);
        CHECK(stats.non_monotone_runs == 0);
        if (scheme.kind == AntennaScheme::Kind::columns)
        {
            CHECK(stats.mean_elevation_error_deg < 1e-6);
            CHECK(stats.mean_azimuth_error_deg < 1e-6);
            CHECK(stats.mean_delay_error_ns < 1e-3);
        }
    }
}

TEST_CASE("run_cell excludes the LOS path from the statistics")
{
    const auto geom = default_array();
    const auto cfg = test::coarse_config(3);
    auto scen = on_grid_scenario(cfg);
    scen.los_blocked = false;
    CellOptions opts;
    opts.grid = test::small_grid(41);
    const auto stats = run_cell(scen, geom, AntennaScheme::columns(16), cfg, {5}, opts);
    CHECK(stats.n_runs == 1);
    CHECK(stats.truth_paths == 2);
}

TEST_CASE("run_cell errors")
{
    const auto geom = default_array();
    const auto cfg = test::coarse_config(1);
    const auto scen = on_grid_scenario(cfg);
    CHECK_THROWS_AS(run_cell(scen, geom, AntennaScheme::columns(4), cfg, {}), std::invalid_argument);
    CHECK_THROWS_AS(run_cell(scen, geom, AntennaScheme::columns(3), cfg, {1}), std::invalid_argument);
}

TEST_CASE("experiment sweep, partial failure and CSV export")
{
    const auto cfg = test::coarse_config(2);
    ExperimentConfig ec;
    ec.grid = test::small_grid(21);
    ec.sage = cfg;
    auto s1 = on_grid_scenario(cfg);
    s1.id = "a";
    auto s2 = s1;
    s2.id = "b";
    s2.snr_db = 30.0;
    ec.scenarios = {s1, s2};
    ec.schemes = {AntennaScheme::columns(16), AntennaScheme::columns(3)};
    ec.seeds = {1};

    const auto report = run_experiment(ec);
    REQUIRE(report.cells.size() == 4);
    CHECK(report.any_failed());
    CHECK(report.cells[0].scenario_id == "a");
    CHECK(report.cells[0].scheme == AntennaScheme::columns(16));
    CHECK_FALSE(report.cells[0].failed);
    CHECK(report.cells[1].failed);
    CHECK_FALSE(report.cells[1].error.empty());
    CHECK(report.cells[3].failed);
    REQUIRE(report.find("b", AntennaScheme::columns(16)));
    CHECK(report.find("b", AntennaScheme::columns(16))->match_rate == 1.0);
    CHECK(report.find("c", AntennaScheme::columns(16)) == nullptr);

    const std::string csv = report_to_csv(report);
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    CHECK(line == csv_header);
    int rows = 0;
    while (std::getline(is, line))
    {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 7);
    }
    CHECK(rows == 4);

    // Rerunning the same configuration reproduces every statistic exactly.
    const auto again = run_experiment(ec, Exec::serial);
    for (size_t i = 0; i < report.cells.size(); ++i)
        CHECK(report.cells[i].same_statistics(again.cells[i]));
}

TEST_CASE("empty report exports only the header")
{
    ExperimentReport r;
    CHECK(report_to_csv(r) == std::string(csv_header) + "\n");
}

TEST_CASE("experiment configuration validation")
{
    ExperimentConfig ec;
    ec.seeds = {1};
    CHECK_THROWS_AS(ec.validate(), std::invalid_argument);
    ec.scenarios.push_back(on_grid_scenario(test::coarse_config()));
    ec.validate();
    ec.schemes.clear();
    CHECK_THROWS_AS(ec.validate(), std::invalid_argument);
    CHECK(default_seeds().size() == 20);
    CHECK(default_seeds().front() == 1);
}
