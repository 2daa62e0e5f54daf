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

#include "mmsage/sage.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/QR>

#include "mmsage/errors.hpp"

namespace mmsage
{
    std::string to_string(Coordinate c)
    {
        switch (c)
        {
        case Coordinate::delay:
            return "delay";
        case Coordinate::azimuth:
            return "azimuth";
        case Coordinate::elevation:
            return "elevation";
        }
        return "delay";
    }

    std::string to_string(Convergence c)
    {
        return c == Convergence::parameter_stall ? "parameter_stall" : "max_cycles_only";
    }

    Coordinate parse_coordinate(const std::string &s)
    {
        if (s == "delay")
            return Coordinate::delay;
        if (s == "azimuth")
            return Coordinate::azimuth;
        if (s == "elevation")
            return Coordinate::elevation;
        throw std::invalid_argument("unknown coordinate '" + s + "'");
    }

    Convergence parse_convergence(const std::string &s)
    {
        if (s == "parameter_stall")
            return Convergence::parameter_stall;
        if (s == "max_cycles_only")
            return Convergence::max_cycles_only;
        throw std::invalid_argument("unknown convergence rule '" + s + "'");
    }

    void SageConfig::validate() const
    {
        if (n_paths < 1)
            throw std::invalid_argument("SageConfig: n_paths must be >= 1");
        if (!(delay_step > 0.0) || !(azimuth_step > 0.0) || !(elevation_step > 0.0))
            throw std::invalid_argument("SageConfig: grid steps must be > 0");
        if (!(azimuth_window > 0.0) || !(elevation_window > 0.0))
            throw std::invalid_argument("SageConfig: search windows must be > 0");
        if (!(delay_min >= 0.0) || !(delay_max >= delay_min))
            throw std::invalid_argument("SageConfig: need 0 <= delay_min <= delay_max");
        if (max_cycles < 1)
            throw std::invalid_argument("SageConfig: max_cycles must be >= 1");
        if (init_coarsening < 1)
            throw std::invalid_argument("SageConfig: init_coarsening must be >= 1");
        auto order = update_order;
        std::sort(order.begin(), order.end());
        if (order != std::array<Coordinate, 3>{Coordinate::delay, Coordinate::azimuth, Coordinate::elevation})
            throw std::invalid_argument("SageConfig: update_order must be a permutation of the three coordinates");
    }

    UniformGrid SageConfig::delay_grid() const
    {
        return UniformGrid::from_range(delay_min, delay_max, delay_step);
    }

    UniformGrid SageConfig::azimuth_grid() const
    {
        const double lo = std::max(-azimuth_window, -std::numbers::pi);
        double hi = std::min(azimuth_window, std::numbers::pi);
        auto g = UniformGrid::from_range(lo, hi, azimuth_step);
        // Azimuth is half-open at +pi.
        while (g.count > 1 && g.max() >= std::numbers::pi)
            --g.count;
        return g;
    }

    UniformGrid SageConfig::elevation_grid() const
    {
        const double lo = std::max(0.5 * std::numbers::pi - elevation_window, 0.0);
        const double hi = std::min(0.5 * std::numbers::pi + elevation_window, std::numbers::pi);
        return UniformGrid::from_range(lo, hi, elevation_step);
    }

    UniformGrid SageConfig::grid(Coordinate c) const
    {
        switch (c)
        {
        case Coordinate::delay:
            return delay_grid();
        case Coordinate::azimuth:
            return azimuth_grid();
        case Coordinate::elevation:
            return elevation_grid();
        }
        return delay_grid();
    }

    bool EstimationResult::trace_monotone(double rel_tol) const
    {
        for (size_t i = 1; i < objective_trace.size(); ++i)
            if (objective_trace[i] > objective_trace[i - 1] * (1.0 + rel_tol))
                return false;
        return true;
    }

    namespace
    {
        Correlation correlate_point(const Manifold &mf, const ChannelMatrix &x, const PathParams &p)
        {
            const ChannelMatrix z = compensate_delay(x, mf.grid(), p.delay);
            const Direction dir{p.azimuth, p.elevation};
            Correlation c;
            angle_scan(mf, z, std::span<const Direction>(&dir, 1), std::span<Correlation>(&c, 1), Exec::serial);
            return c;
        }

        ChannelMatrix reconstruct_path(const Manifold &mf, const PathParams &p)
        {
            const int n_elem = mf.n_elements();
            const int n_freq = mf.n_freq();
            std::vector<double> amp(static_cast<size_t>(n_elem)), rate(static_cast<size_t>(n_elem));
            mf.response({p.azimuth, p.elevation}, amp, rate);
            ChannelMatrix out(n_elem, n_freq);
            for (int m = 0; m < n_elem; ++m)
            {
                const std::complex<double> g = p.gain * amp[static_cast<size_t>(m)];
                const double r = rate[static_cast<size_t>(m)] - 2.0 * std::numbers::pi * p.delay;
                for (int k = 0; k < n_freq; ++k)
                    out(m, k) = g * std::polar(1.0, r * mf.grid().at(k));
            }
            return out;
        }

        void check_data(const ChannelData &data, const SubarraySelection &sel, const FrequencyGrid &grid)
        {
            data.validate();
            if (data.selection.indices != sel.indices)
                throw std::invalid_argument("SAGE: channel rows do not match the estimator's selection");
            if (!(data.grid == grid))
                throw std::invalid_argument("SAGE: channel frequency grid does not match the estimator's grid");
        }
    }

    SageEstimator::SageEstimator(const ArrayGeometry &geom, const SubarraySelection &sel, const FrequencyGrid &grid,
                                 SageConfig cfg, Exec exec)
        : cfg_((cfg.validate(), cfg)), exec_(exec), selection_(sel), manifold_(geom, sel, grid),
          delay_grid_(cfg_.delay_grid()), azimuth_grid_(cfg_.azimuth_grid()),
          elevation_grid_(cfg_.elevation_grid()), delay_table_(delay_grid_, grid)
    {
    }

    Correlation SageEstimator::correlate(const ChannelMatrix &x, const PathParams &at) const
    {
        return correlate_point(manifold_, x, at);
    }

    double SageEstimator::objective(const ChannelMatrix &x, double delay, double azimuth, double elevation) const
    {
        PathParams p;
        p.delay = delay;
        p.azimuth = azimuth;
        p.elevation = elevation;
        return correlate(x, p).objective();
    }

    ChannelMatrix SageEstimator::reconstruct(const PathParams &p) const
    {
        return reconstruct_path(manifold_, p);
    }

    std::vector<PathParams> SageEstimator::initialize(const ChannelMatrix &x) const
    {
        if (x.squaredNorm() == 0.0)
            throw degenerate_input("SAGE initialization: data has zero power");

        const int f = cfg_.init_coarsening;
        std::vector<Direction> dirs;
        for (int ia = 0; ia < azimuth_grid_.count; ia += f)
            for (int ie = 0; ie < elevation_grid_.count; ie += f)
                dirs.push_back({azimuth_grid_.value(ia), elevation_grid_.value(ie)});

        ChannelMatrix residual = x;
        std::vector<PathParams> paths;
        for (int l = 0; l < cfg_.n_paths; ++l)
        {
            const JointPeak peak = joint_scan(manifold_, residual, dirs, delay_table_, f, exec_);
            PathParams p;
            p.delay = delay_grid_.value(peak.delay_index);
            p.azimuth = dirs[static_cast<size_t>(peak.direction_index)].azimuth;
            p.elevation = dirs[static_cast<size_t>(peak.direction_index)].elevation;
            p.gain = correlate(residual, p).gain();
            residual -= reconstruct(p);
            paths.push_back(p);
        }
        std::stable_sort(paths.begin(), paths.end(),
                         [](const PathParams &a, const PathParams &b) { return std::abs(a.gain) > std::abs(b.gain); });
        return paths;
    }

    ChannelMatrix SageEstimator::expectation_step(const ChannelMatrix &x, const std::vector<PathParams> &paths,
                                                  int l) const
    {
        if (l < 0 || l >= static_cast<int>(paths.size()))
            throw std::invalid_argument("expectation_step: path index out of range");
        ChannelMatrix xhat = x;
        for (int i = 0; i < static_cast<int>(paths.size()); ++i)
            if (i != l && paths[static_cast<size_t>(i)].gain != std::complex<double>{})
                xhat -= reconstruct(paths[static_cast<size_t>(i)]);
        return xhat;
    }

    PathParams SageEstimator::maximize_coordinate(const ChannelMatrix &xhat, const PathParams &current,
                                                  Coordinate coord) const
    {
        const UniformGrid &g = coord == Coordinate::delay     ? delay_grid_
                               : coord == Coordinate::azimuth ? azimuth_grid_
                                                              : elevation_grid_;
        std::vector<double> values(static_cast<size_t>(g.count));

        auto with_value = [&](double v) {
            PathParams p = current;
            (coord == Coordinate::delay ? p.delay : coord == Coordinate::azimuth ? p.azimuth : p.elevation) = v;
            return p;
        };

        if (coord == Coordinate::delay)
        {
            const auto y = beamform(manifold_, xhat, {current.azimuth, current.elevation});
            std::vector<std::complex<double>> scan(static_cast<size_t>(g.count));
            delay_scan(y, delay_table_, 1, scan, exec_);
            const double energy = manifold_.signature_energy({current.azimuth, current.elevation});
            for (int i = 0; i < g.count; ++i)
                values[static_cast<size_t>(i)] = Correlation{scan[static_cast<size_t>(i)], energy}.objective();
        }
        else
        {
            std::vector<Direction> dirs(static_cast<size_t>(g.count));
            for (int i = 0; i < g.count; ++i)
                dirs[static_cast<size_t>(i)] = coord == Coordinate::azimuth
                                                   ? Direction{g.value(i), current.elevation}
                                                   : Direction{current.azimuth, g.value(i)};
            const ChannelMatrix z = compensate_delay(xhat, manifold_.grid(), current.delay);
            std::vector<Correlation> corr(static_cast<size_t>(g.count));
            angle_scan(manifold_, z, dirs, corr, exec_);
            for (int i = 0; i < g.count; ++i)
                values[static_cast<size_t>(i)] = corr[static_cast<size_t>(i)].objective();
        }

        const int best = first_argmax(values);
        double best_value = values[static_cast<size_t>(best)];
        PathParams out = with_value(g.value(best));

        if (cfg_.refine && best > 0 && best < g.count - 1)
        {
            const double fm = values[static_cast<size_t>(best - 1)];
            const double f0 = values[static_cast<size_t>(best)];
            const double fp = values[static_cast<size_t>(best + 1)];
            const double denom = fm - 2.0 * f0 + fp;
            if (denom < 0.0)
            {
                const double delta = std::clamp(0.5 * (fm - fp) / denom, -0.5, 0.5);
                const PathParams cand = with_value(g.value(best) + delta * g.step);
                const double v = correlate(xhat, cand).objective();
                if (v >= best_value)
                {
                    out = cand;
                    best_value = v;
                }
            }
        }

        // Never move to a worse point than the current one; keeps the residual monotone when the
        // current value lies off the grid.
        if (correlate(xhat, current).objective() > best_value)
            out = current;

        out.gain = correlate(xhat, out).gain();
        return out;
    }

    double SageEstimator::residual_power(const ChannelMatrix &x, const std::vector<ChannelMatrix> &parts) const
    {
        ChannelMatrix r = x;
        for (const auto &p : parts)
            r -= p;
        return r.squaredNorm();
    }

    EstimationResult SageEstimator::run(const ChannelData &data) const
    {
        check_data(data, selection_, manifold_.grid());
        const ChannelMatrix &x = data.matrix;

        EstimationResult result;
        result.subset = selection_;
        std::vector<PathParams> paths = initialize(x);
        std::vector<ChannelMatrix> parts;
        for (const auto &p : paths)
            parts.push_back(reconstruct(p));
        result.objective_trace.push_back(residual_power(x, parts));

        const std::array<double, 3> steps{cfg_.delay_step, cfg_.azimuth_step, cfg_.elevation_step};
        for (int cycle = 1; cycle <= cfg_.max_cycles; ++cycle)
        {
            std::vector<size_t> order(paths.size());
            std::iota(order.begin(), order.end(), size_t{0});
            std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
                return std::abs(paths[a].gain) > std::abs(paths[b].gain);
            });

            bool changed = false;
            for (size_t l : order)
            {
                ChannelMatrix xhat = x;
                for (size_t i = 0; i < parts.size(); ++i)
                    if (i != l)
                        xhat -= parts[i];

                const PathParams before = paths[l];
                PathParams p = before;
                for (Coordinate c : cfg_.update_order)
                    p = maximize_coordinate(xhat, p, c);

                const std::array<double, 3> delta{std::abs(p.delay - before.delay),
                                                  std::abs(p.azimuth - before.azimuth),
                                                  std::abs(p.elevation - before.elevation)};
                for (int i = 0; i < 3; ++i)
                    if (delta[static_cast<size_t>(i)] >= steps[static_cast<size_t>(i)] * (1.0 - 1e-6))
                        changed = true;

                paths[l] = p;
                parts[l] = reconstruct(p);
            }
            result.objective_trace.push_back(residual_power(x, parts));
            result.cycles_run = cycle;
            if (cfg_.convergence == Convergence::parameter_stall && !changed)
                break;
        }

        // Closing joint least-squares solve of the gains at the final delays and angles. Afterwards
        // every gain equals its closed-form estimate on its own E-step residual, and the residual
        // can only decrease; the last trace entry is updated accordingly.
        {
            const int n = static_cast<int>(paths.size());
            std::vector<ChannelMatrix> unit;
            for (auto p : paths)
            {
                p.gain = 1.0;
                unit.push_back(reconstruct(p));
            }
            Eigen::MatrixXcd gram(n, n);
            Eigen::VectorXcd rhs(n);
            for (int i = 0; i < n; ++i)
            {
                const auto &si = unit[static_cast<size_t>(i)];
                rhs(i) = (si.conjugate().cwiseProduct(x)).sum();
                for (int j = 0; j < n; ++j)
                    gram(i, j) = (si.conjugate().cwiseProduct(unit[static_cast<size_t>(j)])).sum();
            }
            const Eigen::VectorXcd gains = gram.colPivHouseholderQr().solve(rhs);
            if (gains.allFinite())
            {
                std::vector<ChannelMatrix> solved;
                for (int i = 0; i < n; ++i)
                    solved.push_back(unit[static_cast<size_t>(i)] * gains(i));
                const double r = residual_power(x, solved);
                if (r <= result.objective_trace.back())
                {
                    for (int i = 0; i < n; ++i)
                        paths[static_cast<size_t>(i)].gain = gains(i);
                    result.objective_trace.back() = r;
                }
            }
        }

        std::stable_sort(paths.begin(), paths.end(),
                         [](const PathParams &a, const PathParams &b) { return std::abs(a.gain) > std::abs(b.gain); });
        for (auto &p : paths)
            p.label = PathLabel::other;
        result.paths = std::move(paths);
        result.residual_power = result.objective_trace.back();
        return result;
    }

    // ---- Free functions -----------------------------------------------------------------------

    double objective(const ChannelData &data, const ArrayGeometry &geom, double delay, double azimuth,
                     double elevation)
    {
        data.validate();
        const Manifold mf(geom, data.selection, data.grid);
        PathParams p;
        p.delay = delay;
        p.azimuth = azimuth;
        p.elevation = elevation;
        return correlate_point(mf, data.matrix, p).objective();
    }

    std::vector<PathParams> initialize_paths(const ChannelData &data, const ArrayGeometry &geom,
                                             const SageConfig &cfg)
    {
        check_data(data, data.selection, data.grid);
        return SageEstimator(geom, data.selection, data.grid, cfg).initialize(data.matrix);
    }

    ChannelMatrix expectation_step(const ChannelData &data, const std::vector<PathParams> &paths, int l,
                                   const ArrayGeometry &geom)
    {
        data.validate();
        if (l < 0 || l >= static_cast<int>(paths.size()))
            throw std::invalid_argument("expectation_step: path index out of range");
        const Manifold mf(geom, data.selection, data.grid);
        ChannelMatrix xhat = data.matrix;
        for (int i = 0; i < static_cast<int>(paths.size()); ++i)
            if (i != l && paths[static_cast<size_t>(i)].gain != std::complex<double>{})
                xhat -= reconstruct_path(mf, paths[static_cast<size_t>(i)]);
        return xhat;
    }

    PathParams maximize_coordinate(const ChannelData &context, const ChannelMatrix &xhat, const ArrayGeometry &geom,
                                   const PathParams &current, Coordinate coord, const SageConfig &cfg)
    {
        return SageEstimator(geom, context.selection, context.grid, cfg).maximize_coordinate(xhat, current, coord);
    }

    EstimationResult run_sage(const ChannelData &data, const ArrayGeometry &geom, const SageConfig &cfg, Exec exec)
    {
        return SageEstimator(geom, data.selection, data.grid, cfg, exec).run(data);
    }
}
