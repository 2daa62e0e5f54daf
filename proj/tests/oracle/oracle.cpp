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

#include "oracle.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "mmsage/errors.hpp"

namespace mmsage::oracle
{
    namespace
    {
        constexpr double c0 = 299792458.0;
        constexpr std::complex<double> j1{0.0, 1.0};

        // Amplitude pattern written out in scalar form: cos(off-boresight) = sin(el) * cos(az - az_b).
        double pattern_amplitude(const ElementGeometry &e, double azimuth, double elevation)
        {
            if (e.pattern.model == PatternModel::isotropic)
                return 1.0;
            const double bx = e.boresight.x();
            const double by = e.boresight.y();
            const double c = std::sin(elevation) * (std::cos(azimuth) * bx + std::sin(azimuth) * by) +
                             std::cos(elevation) * e.boresight.z();
            if (c <= 0.0)
                return e.pattern.back_lobe_floor;
            const double a = std::exp(0.5 * e.pattern.exponent * std::log(std::min(c, 1.0)));
            return a < e.pattern.back_lobe_floor ? e.pattern.back_lobe_floor : a;
        }

        double path_difference(const ElementGeometry &e, double azimuth, double elevation)
        {
            return e.position.x() * std::sin(elevation) * std::cos(azimuth) +
                   e.position.y() * std::sin(elevation) * std::sin(azimuth) + e.position.z() * std::cos(elevation);
        }

        std::vector<double> frequencies(const FrequencyGrid &g)
        {
            std::vector<double> f(static_cast<size_t>(g.n_points));
            const double df = (g.stop - g.start) / (g.n_points - 1);
            for (int k = 0; k < g.n_points; ++k)
                f[static_cast<size_t>(k)] = g.start + k * df;
            return f;
        }
    }

    int Axis::count() const
    {
        return static_cast<int>(std::floor((max - min) / step + 1e-9)) + 1;
    }

    std::uint64_t GridSpec::total_points() const
    {
        return static_cast<std::uint64_t>(delay.count()) * static_cast<std::uint64_t>(azimuth.count()) *
               static_cast<std::uint64_t>(elevation.count());
    }

    double direct_objective(const ChannelData &data, const ArrayGeometry &geom, double delay, double azimuth,
                            double elevation)
    {
        const auto f = frequencies(data.grid);
        std::complex<double> inner{0.0, 0.0};
        double energy = 0.0;
        for (int m = 0; m < data.selection.size(); ++m)
        {
            const auto &e = geom.element(data.selection.indices[static_cast<size_t>(m)]);
            const double g = pattern_amplitude(e, azimuth, elevation);
            const double d = path_difference(e, azimuth, elevation);
            for (size_t k = 0; k < f.size(); ++k)
            {
                const std::complex<double> s = g * std::exp(j1 * (2.0 * std::numbers::pi * f[k] * (d / c0 - delay)));
                inner += std::conj(s) * data.matrix(m, static_cast<Eigen::Index>(k));
                energy += std::norm(s);
            }
        }
        return energy > 0.0 ? std::norm(inner) / energy : 0.0;
    }

    SearchResult exhaustive_search(const ChannelData &data, const ArrayGeometry &geom, const GridSpec &grid)
    {
        if (grid.total_points() > grid.point_cap)
            throw cap_exceeded("exhaustive_search: " + std::to_string(grid.total_points()) +
                               " grid points exceed the cap of " + std::to_string(grid.point_cap));

        const int nd = grid.delay.count();
        const int na = grid.azimuth.count();
        const int ne = grid.elevation.count();
        const auto f = frequencies(data.grid);
        const size_t nf = f.size();
        const int n_elem = data.selection.size();

        // exp(+j 2 pi f tau) for every delay.
        std::vector<std::complex<double>> delay_phasor(static_cast<size_t>(nd) * nf);
        for (int i = 0; i < nd; ++i)
            for (size_t k = 0; k < nf; ++k)
                delay_phasor[static_cast<size_t>(i) * nf + k] =
                    std::exp(j1 * (2.0 * std::numbers::pi * f[k] * grid.delay.value(i)));

        std::vector<double> values(static_cast<size_t>(nd) * static_cast<size_t>(na) * static_cast<size_t>(ne));
        const int n_pairs = na * ne;

#pragma omp parallel for schedule(dynamic, 4)
        for (int pair = 0; pair < n_pairs; ++pair)
        {
            const int ia = pair / ne;
            const int ie = pair % ne;
            const double az = grid.azimuth.value(ia);
            const double el = grid.elevation.value(ie);

            std::vector<std::complex<double>> beam(nf, {0.0, 0.0});
            double gain_sq = 0.0;
            for (int m = 0; m < n_elem; ++m)
            {
                const auto &e = geom.element(data.selection.indices[static_cast<size_t>(m)]);
                const double g = pattern_amplitude(e, az, el);
                const double d = path_difference(e, az, el);
                gain_sq += g * g;
                for (size_t k = 0; k < nf; ++k)
                    beam[k] += g * std::exp(-j1 * (2.0 * std::numbers::pi * f[k] * d / c0)) *
                               data.matrix(m, static_cast<Eigen::Index>(k));
            }
            const double energy = gain_sq * static_cast<double>(nf);
            for (int id = 0; id < nd; ++id)
            {
                std::complex<double> acc{0.0, 0.0};
                const auto *ph = &delay_phasor[static_cast<size_t>(id) * nf];
                for (size_t k = 0; k < nf; ++k)
                    acc += beam[k] * ph[k];
                values[(static_cast<size_t>(id) * static_cast<size_t>(na) + static_cast<size_t>(ia)) *
                           static_cast<size_t>(ne) +
                       static_cast<size_t>(ie)] = energy > 0.0 ? std::norm(acc) / energy : 0.0;
            }
        }

        SearchResult best;
        best.objective = -1.0;
        for (int id = 0; id < nd; ++id)
            for (int ia = 0; ia < na; ++ia)
                for (int ie = 0; ie < ne; ++ie)
                {
                    const double v = values[(static_cast<size_t>(id) * static_cast<size_t>(na) +
                                              static_cast<size_t>(ia)) *
                                                 static_cast<size_t>(ne) +
                                             static_cast<size_t>(ie)];
                    if (v > best.objective)
                    {
                        best.objective = v;
                        best.delay_index = id;
                        best.azimuth_index = ia;
                        best.elevation_index = ie;
                    }
                }
        best.path.delay = grid.delay.value(best.delay_index);
        best.path.azimuth = grid.azimuth.value(best.azimuth_index);
        best.path.elevation = grid.elevation.value(best.elevation_index);
        return best;
    }

    TrigTruth trig_ground_truth(const Eigen::Vector3d &tx, const Eigen::Vector3d &reflector,
                                const Eigen::Vector3d &rx_origin)
    {
        const double ax = tx.x() - reflector.x(), ay = tx.y() - reflector.y(), az = tx.z() - reflector.z();
        const double bx = reflector.x() - rx_origin.x(), by = reflector.y() - rx_origin.y(),
                     bz = reflector.z() - rx_origin.z();
        const double d1 = std::sqrt(ax * ax + ay * ay + az * az);
        const double horizontal = std::hypot(bx, by);
        const double d2 = std::hypot(horizontal, bz);
        if (d1 == 0.0 || d2 == 0.0)
            throw std::invalid_argument("trig_ground_truth: coincident points");

        TrigTruth t;
        t.delay = (d1 + d2) / c0;
        // Polar angle from +z: atan2 of horizontal range over height.
        t.elevation = std::atan2(horizontal, bz);
        double azim = horizontal > 0.0 ? std::atan2(by, bx) : 0.0;
        if (azim >= std::numbers::pi)
            azim -= 2.0 * std::numbers::pi;
        t.azimuth = azim;
        return t;
    }
}
