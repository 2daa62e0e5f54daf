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

#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mmsage/array_geometry.hpp"

namespace mmsage
{
    /// Elements x frequency points, row-major so each element's frequency response is contiguous.
    using ChannelMatrix = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    /// Uniform frequency grid, both endpoints included.
    struct FrequencyGrid
    {
        double start = 3.3e9;
        double stop = 3.7e9;
        int n_points = 401;

        void validate() const;
        double spacing() const { return (stop - start) / (n_points - 1); }
        double bandwidth() const { return stop - start; }
        double at(int k) const { return start + k * spacing(); }
        std::vector<double> values() const;

        bool operator==(const FrequencyGrid &) const = default;
    };

    enum class PathLabel
    {
        los,
        screen,
        pole,
        ball,
        other
    };

    std::string to_string(PathLabel label);
    PathLabel parse_path_label(const std::string &s);

    struct PathParams
    {
        double delay = 0.0;     // [s]
        double azimuth = 0.0;   // [rad]
        double elevation = 0.0; // [rad]
        std::complex<double> gain{0.0, 0.0};
        PathLabel label = PathLabel::other;

        void validate() const;
    };

    struct Reflector
    {
        PathLabel label = PathLabel::other;
        Eigen::Vector3d position = Eigen::Vector3d::Zero(); // [m]
        double reflection_loss_db = 0.0;
    };

    /// Chamber layout. The receive array sits at the coordinate origin.
    struct ScenarioSpec
    {
        std::string id;
        Eigen::Vector3d tx_position = Eigen::Vector3d(4.0, 0.0, 0.0);
        std::vector<Reflector> reflectors;
        bool los_blocked = true;
        std::optional<double> snr_db = 50.0; // nullopt: noiseless
        std::uint64_t seed = 1;
        std::optional<double> los_excess_db;    // LOS boost above the strongest reflector
        std::optional<ArrayConfig> array;       // per-scenario array override

        void validate() const;

        /// Reflector count plus one when the LOS is present.
        int default_path_count() const { return static_cast<int>(reflectors.size()) + (los_blocked ? 0 : 1); }
    };

    /// One recorded snapshot: |selection| x n_points complex transfer-function samples.
    struct ChannelData
    {
        ChannelMatrix matrix;
        FrequencyGrid grid;
        SubarraySelection selection;
        std::optional<std::vector<PathParams>> truth;

        void validate() const;

        /// Rows of `sub` extracted from this snapshot; every index of `sub` must be present here.
        ChannelData restrict_to(const SubarraySelection &sub) const;
    };

    /// Geometric ground truth: one specular path per reflector plus the LOS when not blocked,
    /// sorted by ascending delay. Path phases are drawn uniformly from spec.seed.
    std::vector<PathParams> ground_truth_from_scenario(const ScenarioSpec &spec, double carrier_frequency);

    /// Superposition of plane waves across the grid, plus white complex Gaussian noise scaled so
    /// that the aggregate signal-to-noise ratio over the whole matrix equals snr_db.
    ChannelData synthesize_channel(const ArrayGeometry &geom, const SubarraySelection &sel,
                                   const std::vector<PathParams> &paths, const FrequencyGrid &grid,
                                   std::optional<double> snr_db, std::uint64_t seed);

    /// Noise-free model matrix; the kernel behind synthesize_channel.
    ChannelMatrix synthesize_noiseless(const ArrayGeometry &geom, const SubarraySelection &sel,
                                       const std::vector<PathParams> &paths, const FrequencyGrid &grid);

    /// Rescales the LOS gain to los_excess_db above the strongest non-LOS path.
    std::vector<PathParams> apply_los_dominance(std::vector<PathParams> paths, double los_excess_db);

    /// Aggregate power ratio of two matrices of equal shape, in dB.
    double empirical_snr_db(const ChannelMatrix &clean, const ChannelMatrix &noisy);
}
