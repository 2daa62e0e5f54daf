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
#include <random>

#include "mmsage/channel_synth.hpp"
#include "mmsage/errors.hpp"
#include "mmsage/serialization.hpp"
#include "oracle.hpp"
#include "test_support.hpp"

using namespace mmsage;
using doctest::Approx;

TEST_CASE("default frequency grid")
{
    const FrequencyGrid g;
    CHECK(g.n_points == 401);
    CHECK(g.start == 3.3e9);
    CHECK(g.stop == 3.7e9);
    CHECK(g.spacing() == Approx(1e6).epsilon(1e-12));
    CHECK(g.at(400) == Approx(3.7e9).epsilon(1e-15));
    CHECK_THROWS_AS((FrequencyGrid{3.7e9, 3.3e9, 401}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((FrequencyGrid{3.3e9, 3.7e9, 1}.validate()), std::invalid_argument);
}

TEST_CASE("canonical scenarios reproduce the reference reflector angles")
{
    const double carrier = 3.5e9;
    for (const char *name : {"scenario3.json", "scenario4.json"})
    {
        const auto spec = load_scenario(test::scenario_path(name));
        const auto paths = ground_truth_from_scenario(spec, carrier);
        for (const auto &p : paths)
        {
            CHECK(std::abs(p.azimuth) < 1e-12);
            switch (p.label)
            {
            case PathLabel::screen:
                CHECK(rad_to_deg(p.elevation) == Approx(72.0).epsilon(1e-10));
                break;
            case PathLabel::pole:
                CHECK(rad_to_deg(p.elevation) == Approx(113.0).epsilon(1e-10));
                break;
            case PathLabel::ball:
                CHECK(rad_to_deg(p.elevation) == Approx(122.0).epsilon(1e-10));
                break;
            case PathLabel::los:
                CHECK(rad_to_deg(p.elevation) == Approx(90.0).epsilon(1e-12));
                break;
            default:
                FAIL("unexpected label");
            }
        }
        for (size_t i = 1; i < paths.size(); ++i)
            CHECK(paths[i - 1].delay <= paths[i].delay);
    }
}

TEST_CASE("scenario contents")
{
    const auto s1 = load_scenario(test::scenario_path("scenario1.json"));
    const auto s2 = load_scenario(test::scenario_path("scenario2.json"));
    const auto s3 = load_scenario(test::scenario_path("scenario3.json"));
    const auto s4 = load_scenario(test::scenario_path("scenario4.json"));
    CHECK(s1.reflectors.size() == 1);
    CHECK(s2.reflectors.size() == 2);
    CHECK(s3.reflectors.size() == 3);
    CHECK(s4.reflectors.size() == 3);
    CHECK(s1.los_blocked);
    CHECK(s2.los_blocked);
    CHECK(s3.los_blocked);
    CHECK_FALSE(s4.los_blocked);
    CHECK(s4.default_path_count() == 4);
    CHECK(s3.default_path_count() == 3);
}

TEST_CASE("LOS path from a transmitter on +x")
{
    ScenarioSpec spec;
    spec.id = "los";
    spec.tx_position = {4.0, 0.0, 0.0};
    spec.los_blocked = false;
    const auto paths = ground_truth_from_scenario(spec, 3.5e9);
    REQUIRE(paths.size() == 1);
    CHECK(paths[0].label == PathLabel::los);
    CHECK(paths[0].azimuth == 0.0);
    CHECK(rad_to_deg(paths[0].elevation) == Approx(90.0));
    CHECK(paths[0].delay == Approx(4.0 / speed_of_light));
    // Free-space amplitude lambda / (4 pi d).
    CHECK(std::abs(paths[0].gain) == Approx(speed_of_light / 3.5e9 / (4 * std::numbers::pi * 4.0)));
}

TEST_CASE("collinear reflector behind the transmitter arrives after the LOS")
{
    ScenarioSpec spec;
    spec.id = "collinear";
    spec.tx_position = {4.0, 0.0, 0.0};
    spec.los_blocked = false;
    spec.reflectors.push_back({PathLabel::screen, {6.0, 0.0, 0.0}, 3.0});
    const auto paths = ground_truth_from_scenario(spec, 3.5e9);
    REQUIRE(paths.size() == 2);
    CHECK(paths[0].label == PathLabel::los);
    CHECK(paths[1].delay > paths[0].delay);
    CHECK(paths[1].delay == Approx(8.0 / speed_of_light));
}

TEST_CASE("scenario validation")
{
    ScenarioSpec spec;
    spec.id = "bad";
    spec.reflectors.push_back({PathLabel::screen, {0.0, 0.0, 0.0}, 3.0});
    CHECK_THROWS_AS(ground_truth_from_scenario(spec, 3.5e9), std::invalid_argument);

    spec.reflectors = {{PathLabel::screen, {4.0, 0.0, 0.0}, 3.0}};
    CHECK_THROWS_AS(ground_truth_from_scenario(spec, 3.5e9), std::invalid_argument);

    spec.reflectors = {{PathLabel::pole, {1.0, 0.0, 1.0}, 3.0}, {PathLabel::pole, {1.0, 0.0, -1.0}, 3.0}};
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

    spec.reflectors.clear();
    spec.los_blocked = true;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("ground truth agrees with the trigonometric oracle")
{
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-6.0, 6.0);
    for (int trial = 0; trial < 200; ++trial)
    {
        ScenarioSpec spec;
        spec.id = "random";
        spec.tx_position = {u(rng), u(rng), u(rng)};
        const Eigen::Vector3d refl(u(rng), u(rng), u(rng));
        spec.reflectors.push_back({PathLabel::other, refl, 1.0});
        const auto paths = ground_truth_from_scenario(spec, 3.5e9);
        REQUIRE(paths.size() == 1);
        const auto t = oracle::trig_ground_truth(spec.tx_position, refl, Eigen::Vector3d::Zero());
        CHECK(std::abs(paths[0].delay - t.delay) < 1e-15);
        CHECK(std::abs(paths[0].elevation - t.elevation) < 1e-9);
        CHECK(std::abs(wrap_azimuth(paths[0].azimuth - t.azimuth)) < 1e-9);
    }
}

TEST_CASE("noise-free synthesis examples")
{
    const auto geom = test::single_element_at_origin();
    const auto sel = test::all_elements(geom);
    const FrequencyGrid grid;

    SUBCASE("zero delay, unit gain")
    {
        const auto data =
            synthesize_channel(geom, sel, {test::make_path(0.0, 0.0, 1.0, 1.0)}, grid, std::nullopt, 1);
        CHECK(data.matrix.rows() == 1);
        CHECK(data.matrix.cols() == 401);
        CHECK((data.matrix.array() - std::complex<double>(1.0, 0.0)).abs().maxCoeff() < 1e-15);
    }

    SUBCASE("delayed path peaks at its delay after an inverse transform")
    {
        const double tau = 17.3e-9;
        const auto data =
            synthesize_channel(geom, sel, {test::make_path(tau, 0.0, 1.0, 1.0)}, grid, std::nullopt, 1);
        for (int k = 0; k < grid.n_points; k += 50)
            CHECK(std::abs(data.matrix(0, k) - std::polar(1.0, -2.0 * std::numbers::pi * grid.at(k) * tau)) < 1e-12);

        // Brute-force inverse DFT onto a 0.25 ns lag grid.
        double best_lag = 0.0, best_val = -1.0;
        for (int i = 0; i <= 400; ++i)
        {
            const double lag = i * 0.25e-9;
            std::complex<double> acc{0.0, 0.0};
            for (int k = 0; k < grid.n_points; ++k)
                acc += data.matrix(0, k) * std::exp(std::complex<double>(0.0, 2.0 * std::numbers::pi * grid.at(k) * lag));
            if (std::abs(acc) > best_val)
            {
                best_val = std::abs(acc);
                best_lag = lag;
            }
        }
        CHECK(std::abs(best_lag - tau) < 1.0 / 400e6);
    }

    CHECK_THROWS_AS(synthesize_channel(geom, sel, {}, grid, 50.0, 1), std::invalid_argument);
}

TEST_CASE("aggregate SNR of synthesized data")
{
    const auto geom = default_array();
    const auto sel = test::all_elements(geom);
    const auto spec = load_scenario(test::scenario_path("scenario3.json"));
    const auto paths = ground_truth_from_scenario(spec, geom.carrier_frequency());
    const ChannelMatrix clean = synthesize_noiseless(geom, sel, paths, FrequencyGrid{});
    for (std::uint64_t seed = 1; seed <= 10; ++seed)
    {
        const auto noisy = synthesize_channel(geom, sel, paths, FrequencyGrid{}, 50.0, seed);
        CHECK(std::abs(empirical_snr_db(clean, noisy.matrix) - 50.0) < 0.5);
        CHECK(noisy.matrix.allFinite());
    }
}

TEST_CASE("synthesis properties")
{
    const auto geom = default_array();
    const auto sel = select_subarray(geom, ColumnScheme{4, 1});
    const auto grid = test::small_grid(61);
    const std::vector<PathParams> a{test::make_path(12e-9, 0.2, 1.3, {0.3, -0.1}),
                                    test::make_path(20e-9, -0.4, 1.9, {0.05, 0.2})};
    const std::vector<PathParams> b{test::make_path(15.5e-9, 0.05, 1.0, {-0.2, 0.1})};
    std::vector<PathParams> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());

    SUBCASE("linearity")
    {
        const ChannelMatrix hab = synthesize_noiseless(geom, sel, ab, grid);
        const ChannelMatrix sum = synthesize_noiseless(geom, sel, a, grid) + synthesize_noiseless(geom, sel, b, grid);
        CHECK((hab - sum).norm() <= 1e-12 * hab.norm());
    }

    SUBCASE("determinism")
    {
        const auto d1 = synthesize_channel(geom, sel, ab, grid, 30.0, 42);
        const auto d2 = synthesize_channel(geom, sel, ab, grid, 30.0, 42);
        CHECK(d1.matrix == d2.matrix);
        const auto d3 = synthesize_channel(geom, sel, ab, grid, 30.0, 43);
        CHECK_FALSE(d1.matrix == d3.matrix);
        REQUIRE(d1.truth);
        CHECK(d1.truth->size() == 3);
    }

    SUBCASE("single-path row power")
    {
        const auto &p = a[0];
        const ChannelMatrix h = synthesize_noiseless(geom, sel, {p}, grid);
        for (int m = 0; m < sel.size(); ++m)
        {
            const double g = element_amplitude(geom.element(sel.indices[static_cast<size_t>(m)]), p.azimuth, p.elevation);
            CHECK(h.row(m).squaredNorm() == Approx(grid.n_points * std::norm(p.gain * g)).epsilon(1e-12));
        }
    }

    SUBCASE("delay shift multiplies each column by a phase ramp")
    {
        const double shift = 3.7e-9;
        auto shifted = ab;
        for (auto &p : shifted)
            p.delay += shift;
        const ChannelMatrix h0 = synthesize_noiseless(geom, sel, ab, grid);
        const ChannelMatrix h1 = synthesize_noiseless(geom, sel, shifted, grid);
        for (int k = 0; k < grid.n_points; ++k)
        {
            const auto ramp = std::polar(1.0, -2.0 * std::numbers::pi * grid.at(k) * shift);
            CHECK((h1.col(k) - h0.col(k) * ramp).norm() <= 1e-12 * (1.0 + h0.col(k).norm()));
        }
    }
}

TEST_CASE("LOS dominance")
{
    std::vector<PathParams> paths{test::make_path(13e-9, 0.0, 1.57, {0.5, 0.0}, PathLabel::los),
                                  test::make_path(15e-9, 0.0, 1.9, {0.0, 0.5}, PathLabel::pole),
                                  test::make_path(18e-9, 0.0, 2.1, {0.1, 0.0}, PathLabel::ball)};

    const auto boosted = apply_los_dominance(paths, 10.0);
    CHECK(std::abs(boosted[0].gain) == Approx(0.5 * std::pow(10.0, 0.5)));
    CHECK(std::arg(boosted[0].gain) == Approx(0.0));
    CHECK(boosted[1].gain == paths[1].gain);
    CHECK(boosted[2].gain == paths[2].gain);
    CHECK(boosted[1].label == PathLabel::pole);

    const auto same = apply_los_dominance(paths, 0.0);
    CHECK(std::abs(same[0].gain) == Approx(0.5));

    paths.erase(paths.begin());
    CHECK_THROWS_AS(apply_los_dominance(paths, 10.0), not_found);
}

TEST_CASE("restricting a snapshot to a subarray")
{
    const auto geom = default_array();
    const auto full = test::all_elements(geom);
    const auto data =
        synthesize_channel(geom, full, {test::make_path(10e-9, 0.1, 1.4, 1.0)}, test::small_grid(), 40.0, 3);
    const auto sub = select_subarray(geom, ColumnScheme{2, 3});
    const auto part = data.restrict_to(sub);
    CHECK(part.matrix.rows() == 8);
    for (int r = 0; r < sub.size(); ++r)
        CHECK(part.matrix.row(r) == data.matrix.row(sub.indices[static_cast<size_t>(r)]));
    CHECK(part.truth.has_value());

    const auto quarter = part.restrict_to(select_subarray(geom, ExplicitScheme{{sub.indices[2]}}));
    CHECK(quarter.matrix.row(0) == part.matrix.row(2));
    CHECK_THROWS_AS(part.restrict_to(select_subarray(geom, ExplicitScheme{{0}})), std::invalid_argument);
}
