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

#include "mmsage/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace mmsage
{
    UniformGrid UniformGrid::from_range(double min, double max, double step)
    {
        if (!(step > 0.0) || !(max >= min))
            throw std::invalid_argument("UniformGrid: need step > 0 and max >= min");
        const int count = static_cast<int>(std::floor((max - min) / step + 1e-9)) + 1;
        return {min, step, count};
    }

    int UniformGrid::nearest(double v) const
    {
        const long i = std::lround((v - min) / step);
        if (i < 0)
            return 0;
        if (i >= count)
            return count - 1;
        return static_cast<int>(i);
    }

    UniformGrid UniformGrid::coarsened(int factor) const
    {
        if (factor < 1)
            throw std::invalid_argument("UniformGrid::coarsened: factor must be >= 1");
        return {min, step * factor, (count - 1) / factor + 1};
    }

    bool UniformGrid::contains(double v, double tol) const
    {
        return v >= min - tol * step && v <= max() + tol * step;
    }

    Manifold::Manifold(const ArrayGeometry &geom, const SubarraySelection &sel, const FrequencyGrid &grid)
        : grid_(grid), f0_(grid.start), df_(grid.spacing()), n_freq_(grid.n_points)
    {
        grid.validate();
        elements_.reserve(static_cast<size_t>(sel.size()));
        for (int idx : sel.indices)
            elements_.push_back(geom.element(idx));
    }

    void Manifold::response(Direction dir, std::span<double> amplitude, std::span<double> phase_rate) const
    {
        const Eigen::Vector3d k = direction_vector(dir.azimuth, dir.elevation);
        constexpr double scale = 2.0 * std::numbers::pi / speed_of_light;
        for (size_t m = 0; m < elements_.size(); ++m)
        {
            amplitude[m] = element_amplitude(elements_[m], dir.azimuth, dir.elevation);
            phase_rate[m] = scale * k.dot(elements_[m].position);
        }
    }

    double Manifold::signature_energy(Direction dir) const
    {
        double sum = 0.0;
        for (const auto &e : elements_)
        {
            const double g = element_amplitude(e, dir.azimuth, dir.elevation);
            sum += g * g;
        }
        return n_freq_ * sum;
    }

    DelayTable::DelayTable(const UniformGrid &delays, const FrequencyGrid &grid)
        : delays_(delays), n_freq_(grid.n_points),
          phasors_(static_cast<size_t>(delays.count) * static_cast<size_t>(grid.n_points))
    {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < delays.count; ++i)
        {
            const double rate = 2.0 * std::numbers::pi * delays.value(i);
            auto *row = &phasors_[static_cast<size_t>(i) * static_cast<size_t>(n_freq_)];
            for (int k = 0; k < n_freq_; ++k)
                row[k] = std::polar(1.0, rate * grid.at(k));
        }
    }

    std::span<const std::complex<double>> DelayTable::row(int i) const
    {
        return {&phasors_[static_cast<size_t>(i) * static_cast<size_t>(n_freq_)], static_cast<size_t>(n_freq_)};
    }

    ChannelMatrix compensate_delay(const ChannelMatrix &x, const FrequencyGrid &grid, double delay)
    {
        ChannelMatrix z(x.rows(), x.cols());
        const double rate = 2.0 * std::numbers::pi * delay;
        for (Eigen::Index k = 0; k < x.cols(); ++k)
            z.col(k) = x.col(k) * std::polar(1.0, rate * grid.at(static_cast<int>(k)));
        return z;
    }

    namespace
    {
        // Correlation of one direction with delay-compensated data. The per-element frequency
        // phasor advances by a fixed rotation per bin.
        Correlation correlate_direction(const Manifold &mf, const ChannelMatrix &z, Direction dir,
                                        std::vector<double> &amp, std::vector<double> &rate)
        {
            const int n_elem = mf.n_elements();
            const int n_freq = mf.n_freq();
            mf.response(dir, amp, rate);

            std::complex<double> total{0.0, 0.0};
            double energy = 0.0;
            for (int m = 0; m < n_elem; ++m)
            {
                const double g = amp[static_cast<size_t>(m)];
                energy += g * g;
                if (g == 0.0)
                    continue;
                const double u = rate[static_cast<size_t>(m)];
                std::complex<double> ph = std::polar(1.0, -u * mf.f0());
                const std::complex<double> step = std::polar(1.0, -u * mf.df());
                const std::complex<double> *row = z.row(m).data();
                std::complex<double> acc{0.0, 0.0};
                for (int k = 0; k < n_freq; ++k)
                {
                    acc += ph * row[k];
                    ph *= step;
                }
                total += g * acc;
            }
            return {total, n_freq * energy};
        }

        std::complex<double> dot_delay(std::span<const std::complex<double>> y,
                                       std::span<const std::complex<double>> phasors)
        {
            std::complex<double> acc{0.0, 0.0};
            for (size_t k = 0; k < y.size(); ++k)
                acc += y[k] * phasors[k];
            return acc;
        }
    }

    std::vector<std::complex<double>> beamform(const Manifold &mf, const ChannelMatrix &x, Direction dir)
    {
        const int n_elem = mf.n_elements();
        const int n_freq = mf.n_freq();
        std::vector<double> amp(static_cast<size_t>(n_elem)), rate(static_cast<size_t>(n_elem));
        mf.response(dir, amp, rate);

        std::vector<std::complex<double>> y(static_cast<size_t>(n_freq), {0.0, 0.0});
        for (int m = 0; m < n_elem; ++m)
        {
            const double g = amp[static_cast<size_t>(m)];
            if (g == 0.0)
                continue;
            const double u = rate[static_cast<size_t>(m)];
            std::complex<double> ph = g * std::polar(1.0, -u * mf.f0());
            const std::complex<double> step = std::polar(1.0, -u * mf.df());
            const std::complex<double> *row = x.row(m).data();
            for (int k = 0; k < n_freq; ++k)
            {
                y[static_cast<size_t>(k)] += ph * row[k];
                ph *= step;
            }
        }
        return y;
    }

    void angle_scan(const Manifold &mf, const ChannelMatrix &z, std::span<const Direction> dirs,
                    std::span<Correlation> out, Exec exec)
    {
        if (out.size() != dirs.size())
            throw std::invalid_argument("angle_scan: output size mismatch");
        const int n = static_cast<int>(dirs.size());
        const size_t n_elem = static_cast<size_t>(mf.n_elements());

        if (exec == Exec::serial)
        {
            std::vector<double> amp(n_elem), rate(n_elem);
            for (int i = 0; i < n; ++i)
                out[static_cast<size_t>(i)] = correlate_direction(mf, z, dirs[static_cast<size_t>(i)], amp, rate);
            return;
        }

#pragma omp parallel
        {
            std::vector<double> amp(n_elem), rate(n_elem);
#pragma omp for schedule(static)
            for (int i = 0; i < n; ++i)
                out[static_cast<size_t>(i)] = correlate_direction(mf, z, dirs[static_cast<size_t>(i)], amp, rate);
        }
    }

    void delay_scan(std::span<const std::complex<double>> y, const DelayTable &table, int stride,
                    std::span<std::complex<double>> out, Exec exec)
    {
        if (stride < 1)
            throw std::invalid_argument("delay_scan: stride must be >= 1");
        const int n = (table.delays().count - 1) / stride + 1;
        if (out.size() != static_cast<size_t>(n))
            throw std::invalid_argument("delay_scan: output size mismatch");

        if (exec == Exec::serial)
        {
            for (int i = 0; i < n; ++i)
                out[static_cast<size_t>(i)] = dot_delay(y, table.row(i * stride));
            return;
        }
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i)
            out[static_cast<size_t>(i)] = dot_delay(y, table.row(i * stride));
    }

    JointPeak joint_scan(const Manifold &mf, const ChannelMatrix &x, std::span<const Direction> dirs,
                         const DelayTable &table, int delay_stride, Exec exec)
    {
        if (dirs.empty())
            throw std::invalid_argument("joint_scan: no directions");
        const int n_dir = static_cast<int>(dirs.size());
        const int n_delay = (table.delays().count - 1) / delay_stride + 1;
        std::vector<JointPeak> per_dir(static_cast<size_t>(n_dir));

        auto evaluate = [&](int d, std::vector<std::complex<double>> &scan) {
            const Direction dir = dirs[static_cast<size_t>(d)];
            const auto y = beamform(mf, x, dir);
            delay_scan(y, table, delay_stride, scan, Exec::serial);
            const double energy = mf.signature_energy(dir);
            int best = 0;
            double best_val = -1.0;
            for (int i = 0; i < n_delay; ++i)
            {
                const double v = std::norm(scan[static_cast<size_t>(i)]);
                if (v > best_val)
                {
                    best_val = v;
                    best = i;
                }
            }
            per_dir[static_cast<size_t>(d)] = {d, best * delay_stride, {scan[static_cast<size_t>(best)], energy}};
        };

        if (exec == Exec::serial)
        {
            std::vector<std::complex<double>> scan(static_cast<size_t>(n_delay));
            for (int d = 0; d < n_dir; ++d)
                evaluate(d, scan);
        }
        else
        {
#pragma omp parallel
            {
                std::vector<std::complex<double>> scan(static_cast<size_t>(n_delay));
#pragma omp for schedule(dynamic, 4)
                for (int d = 0; d < n_dir; ++d)
                    evaluate(d, scan);
            }
        }

        JointPeak best = per_dir.front();
        for (const auto &p : per_dir)
        {
            const double v = p.correlation.objective();
            const double b = best.correlation.objective();
            if (v > b || (v == b && p.delay_index < best.delay_index))
                best = p;
        }
        return best;
    }

    int first_argmax(std::span<const double> values)
    {
        int best = 0;
        for (size_t i = 1; i < values.size(); ++i)
            if (values[i] > values[static_cast<size_t>(best)])
                best = static_cast<int>(i);
        return best;
    }
}
