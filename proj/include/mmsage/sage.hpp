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

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "mmsage/array_geometry.hpp"
#include "mmsage/channel_synth.hpp"
#include "mmsage/kernels.hpp"

namespace mmsage
{
    enum class Coordinate
    {
        delay,
        azimuth,
        elevation
    };

    enum class Convergence
    {
        parameter_stall,
        max_cycles_only
    };

    std::string to_string(Coordinate c);
    std::string to_string(Convergence c);
    Coordinate parse_coordinate(const std::string &s);
    Convergence parse_convergence(const std::string &s);

    /// SAGE search configuration. Angular windows are half-widths centred on the LOS direction
    /// (azimuth 0, elevation pi/2).
    struct SageConfig
    {
        int n_paths = 3;
        double delay_step = 1.0 / (50.0 * 400e6); // 0.05 ns
        double azimuth_step = deg_to_rad(1.0);
        double elevation_step = deg_to_rad(0.5);
        double delay_min = 0.0;
        double delay_max = 50e-9;
        double azimuth_window = deg_to_rad(45.0);
        double elevation_window = deg_to_rad(45.0);
        int max_cycles = 10;
        Convergence convergence = Convergence::parameter_stall;
        bool refine = false;
        int init_coarsening = 4;
        std::array<Coordinate, 3> update_order{Coordinate::delay, Coordinate::azimuth, Coordinate::elevation};

        void validate() const;

        UniformGrid delay_grid() const;
        UniformGrid azimuth_grid() const;
        UniformGrid elevation_grid() const;
        UniformGrid grid(Coordinate c) const;
    };

    struct EstimationResult
    {
        std::vector<PathParams> paths;
        int cycles_run = 0;
        double residual_power = 0.0;
        /// Residual power after initialization (entry 0) and after every completed cycle; the last entry
        /// includes the closing joint gain solve.
        std::vector<double> objective_trace;
        SubarraySelection subset;

        /// True when no trace step increases by more than rel_tol relative to the previous value.
        bool trace_monotone(double rel_tol = 1e-9) const;
    };

    /// SAGE estimator bound to one array selection and frequency grid.
    ///
    /// Each path is refined in turn against the data with every other path's current estimate
    /// cancelled (expectation step), by 1-D grid searches over delay, azimuth and elevation with
    /// the gain re-estimated in closed form after each search (maximization step).
    class SageEstimator
    {
    public:
        SageEstimator(const ArrayGeometry &geom, const SubarraySelection &sel, const FrequencyGrid &grid,
                      SageConfig cfg, Exec exec = Exec::parallel);

        const SageConfig &config() const { return cfg_; }
        const Manifold &manifold() const { return manifold_; }

        /// Correlation of the unit-gain signature at (delay, azimuth, elevation) with x.
        Correlation correlate(const ChannelMatrix &x, const PathParams &at) const;

        /// |<s, x>|^2 / ||s||^2.
        double objective(const ChannelMatrix &x, double delay, double azimuth, double elevation) const;

        /// Contribution gain * s(delay, azimuth, elevation) of one path.
        ChannelMatrix reconstruct(const PathParams &p) const;

        /// Successive cancellation on a coarse grid; paths sorted by descending |gain|.
        std::vector<PathParams> initialize(const ChannelMatrix &x) const;

        /// x minus every path except `l`.
        ChannelMatrix expectation_step(const ChannelMatrix &x, const std::vector<PathParams> &paths, int l) const;

        /// 1-D search of `coord` on its configured grid, then closed-form gain.
        PathParams maximize_coordinate(const ChannelMatrix &xhat, const PathParams &current, Coordinate coord) const;

        EstimationResult run(const ChannelData &data) const;

    private:
        double residual_power(const ChannelMatrix &x, const std::vector<ChannelMatrix> &parts) const;

        SageConfig cfg_;
        Exec exec_;
        SubarraySelection selection_;
        Manifold manifold_;
        UniformGrid delay_grid_;
        UniformGrid azimuth_grid_;
        UniformGrid elevation_grid_;
        DelayTable delay_table_;
    };

    // Free-function forms.

    double objective(const ChannelData &data, const ArrayGeometry &geom, double delay, double azimuth,
                     double elevation);

    std::vector<PathParams> initialize_paths(const ChannelData &data, const ArrayGeometry &geom,
                                             const SageConfig &cfg);

    ChannelMatrix expectation_step(const ChannelData &data, const std::vector<PathParams> &paths, int l,
                                   const ArrayGeometry &geom);

    PathParams maximize_coordinate(const ChannelData &context, const ChannelMatrix &xhat, const ArrayGeometry &geom,
                                   const PathParams &current, Coordinate coord, const SageConfig &cfg);

    EstimationResult run_sage(const ChannelData &data, const ArrayGeometry &geom, const SageConfig &cfg,
                              Exec exec = Exec::parallel);
}
