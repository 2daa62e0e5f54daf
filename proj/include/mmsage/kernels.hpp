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
#include <span>
#include <vector>

#include "mmsage/array_geometry.hpp"
#include "mmsage/channel_synth.hpp"

// Inner loops of the estimator. Every scan comes in a serial reference form and an OpenMP form;
// both evaluate each grid point with the same per-point routine, so their outputs are
// bit-identical and only the distribution of points over threads differs.

namespace mmsage
{
    enum class Exec
    {
        serial,
        parallel
    };

    /// Uniform 1-D grid: value(i) = min + i * step, i in [0, count).
    struct UniformGrid
    {
        double min = 0.0;
        double step = 1.0;
        int count = 1;

        static UniformGrid from_range(double min, double max, double step);

        double value(int i) const { return min + i * step; }
        double max() const { return value(count - 1); }
        /// Nearest grid index, clamped to the grid.
        int nearest(double v) const;
        /// Every `factor`-th point starting at index 0.
        UniformGrid coarsened(int factor) const;
        bool contains(double v, double tol = 1e-12) const;
    };

    struct Direction
    {
        double azimuth = 0.0;
        double elevation = 0.0;
    };

    /// Selected elements and frequency grid, flattened for the scans.
    class Manifold
    {
    public:
        Manifold(const ArrayGeometry &geom, const SubarraySelection &sel, const FrequencyGrid &grid);

        int n_elements() const { return static_cast<int>(elements_.size()); }
        int n_freq() const { return n_freq_; }
        double f0() const { return f0_; }
        double df() const { return df_; }
        const FrequencyGrid &grid() const { return grid_; }

        /// Per-element amplitude gains and phase rates 2 pi <k, p_m> / c (radians per Hz).
        void response(Direction dir, std::span<double> amplitude, std::span<double> phase_rate) const;

        /// K * sum_m g_m^2: squared norm of the unit-gain space-frequency signature.
        double signature_energy(Direction dir) const;

    private:
        std::vector<ElementGeometry> elements_;
        FrequencyGrid grid_;
        double f0_ = 0.0;
        double df_ = 0.0;
        int n_freq_ = 0;
    };

    /// Inner product <s, x> of a unit-gain signature with data, and the signature energy.
    struct Correlation
    {
        std::complex<double> value{0.0, 0.0};
        double energy = 0.0;

        double objective() const { return energy > 0.0 ? std::norm(value) / energy : 0.0; }
        std::complex<double> gain() const { return energy > 0.0 ? value / energy : std::complex<double>{}; }
    };

    /// Delay phasors exp(+j 2 pi f_k tau_i) for every delay of a grid, one row per delay.
    class DelayTable
    {
    public:
        DelayTable(const UniformGrid &delays, const FrequencyGrid &grid);

        const UniformGrid &delays() const { return delays_; }
        std::span<const std::complex<double>> row(int i) const;

    private:
        UniformGrid delays_;
        int n_freq_ = 0;
        std::vector<std::complex<double>> phasors_;
    };

    /// z_mk = x_mk * exp(+j 2 pi f_k delay): removes a common delay from every row.
    ChannelMatrix compensate_delay(const ChannelMatrix &x, const FrequencyGrid &grid, double delay);

    /// y_k = sum_m g_m exp(-j f_k u_m) x_mk: spatial matched filter towards `dir`, per frequency.
    std::vector<std::complex<double>> beamform(const Manifold &mf, const ChannelMatrix &x, Direction dir);

    /// Correlation of delay-compensated data z with the steering signature of each direction.
    void angle_scan(const Manifold &mf, const ChannelMatrix &z, std::span<const Direction> dirs,
                    std::span<Correlation> out, Exec exec);

    /// sum_k y_k exp(+j 2 pi f_k tau_i) for delay indices i = 0, stride, 2*stride, ... of the table.
    void delay_scan(std::span<const std::complex<double>> y, const DelayTable &table, int stride,
                    std::span<std::complex<double>> out, Exec exec);

    /// Best (direction, delay) pair of a joint grid: for each direction the data is beamformed and
    /// scanned over the strided delay table. Ties resolve to the smallest delay index, then the
    /// lowest direction index.
    struct JointPeak
    {
        int direction_index = 0;
        int delay_index = 0; // index into the table's full grid
        Correlation correlation;
    };

    JointPeak joint_scan(const Manifold &mf, const ChannelMatrix &x, std::span<const Direction> dirs,
                         const DelayTable &table, int delay_stride, Exec exec);

    /// Index of the first maximum of `values` (smallest index on ties).
    int first_argmax(std::span<const double> values);
}
