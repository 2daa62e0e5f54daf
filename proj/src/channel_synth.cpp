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

#include "mmsage/channel_synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "mmsage/errors.hpp"

namespace mmsage
{
    namespace
    {
        // Separate RNG streams for path phases and receiver noise drawn from the same seed.
        constexpr std::uint64_t phase_stream = 0x70686173ULL;
        constexpr std::uint64_t noise_stream = 0x6e6f6973ULL;

        std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream)
        {
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(stream)};
            return std::mt19937_64(seq);
        }

        double two_segment_amplitude(double total_length, double wavelength, double loss_db)
        {
            return wavelength / (4.0 * std::numbers::pi * total_length) * std::pow(10.0, -loss_db / 20.0);
        }
    }

    void FrequencyGrid::validate() const
    {
        if (!(stop > start) || !(start > 0.0))
            throw std::invalid_argument("FrequencyGrid: need 0 < start < stop");
        if (n_points < 2)
            throw std::invalid_argument("FrequencyGrid: n_points must be >= 2");
    }

    std::vector<double> FrequencyGrid::values() const
    {
        std::vector<double> f(static_cast<size_t>(n_points));
        for (int k = 0; k < n_points; ++k)
            f[static_cast<size_t>(k)] = at(k);
        return f;
    }

    std::string to_string(PathLabel label)
    {
        switch (label)
        {
        case PathLabel::los:
            return "LOS";
        case PathLabel::screen:
            return "screen";
        case PathLabel::pole:
            return "pole";
        case PathLabel::ball:
            return "ball";
        case PathLabel::other:
            break;
        }
        return "other";
    }

    PathLabel parse_path_label(const std::string &s)
    {
        static const std::unordered_map<std::string, PathLabel> table = {
            {"LOS", PathLabel::los},       {"los", PathLabel::los},   {"screen", PathLabel::screen},
            {"board", PathLabel::screen},  {"pole", PathLabel::pole}, {"ball", PathLabel::ball},
            {"other", PathLabel::other}};
        auto it = table.find(s);
        if (it == table.end())
            throw std::invalid_argument("unknown path label '" + s + "'");
        return it->second;
    }

    void PathParams::validate() const
    {
        if (!(delay >= 0.0))
            throw std::invalid_argument("PathParams: delay must be >= 0");
        if (!(elevation >= 0.0 && elevation <= std::numbers::pi))
            throw std::invalid_argument("PathParams: elevation must lie in [0, pi]");
        if (!(azimuth >= -std::numbers::pi && azimuth < std::numbers::pi))
            throw std::invalid_argument("PathParams: azimuth must lie in [-pi, pi)");
    }

    void ScenarioSpec::validate() const
    {
        std::set<PathLabel> labels;
        for (const auto &r : reflectors)
        {
            if (!labels.insert(r.label).second)
                throw std::invalid_argument("scenario '" + id + "': duplicate reflector label " + to_string(r.label));
            if (r.label == PathLabel::los)
                throw std::invalid_argument("scenario '" + id + "': reflector may not be labelled LOS");
            if ((r.position - tx_position).norm() == 0.0 || r.position.norm() == 0.0)
                throw std::invalid_argument("scenario '" + id + "': reflector coincides with tx or array origin");
            if (!(r.reflection_loss_db >= 0.0))
                throw std::invalid_argument("scenario '" + id + "': reflection_loss_db must be >= 0");
        }
        if (tx_position.norm() == 0.0)
            throw std::invalid_argument("scenario '" + id + "': tx coincides with array origin");
        if (reflectors.empty() && los_blocked)
            throw std::invalid_argument("scenario '" + id + "': no propagation paths");
        if (los_excess_db && los_blocked)
            throw std::invalid_argument("scenario '" + id + "': los_excess_db requires an unblocked LOS");
        if (array)
            array->pattern.validate();
    }

    void ChannelData::validate() const
    {
        grid.validate();
        if (matrix.rows() != selection.size())
            throw std::invalid_argument("ChannelData: row count does not match selection size");
        if (matrix.cols() != grid.n_points)
            throw std::invalid_argument("ChannelData: column count does not match frequency grid");
        if (!matrix.allFinite())
            throw std::invalid_argument("ChannelData: non-finite entries");
    }

    ChannelData ChannelData::restrict_to(const SubarraySelection &sub) const
    {
        std::unordered_map<int, int> row_of;
        for (int r = 0; r < selection.size(); ++r)
            row_of.emplace(selection.indices[static_cast<size_t>(r)], r);

        ChannelData out;
        out.grid = grid;
        out.selection = sub;
        out.truth = truth;
        out.matrix.resize(sub.size(), matrix.cols());
        for (int r = 0; r < sub.size(); ++r)
        {
            auto it = row_of.find(sub.indices[static_cast<size_t>(r)]);
            if (it == row_of.end())
                throw std::invalid_argument("ChannelData::restrict_to: element " +
                                            std::to_string(sub.indices[static_cast<size_t>(r)]) +
                                            " not present in snapshot");
            out.matrix.row(r) = matrix.row(it->second);
        }
        return out;
    }

    std::vector<PathParams> ground_truth_from_scenario(const ScenarioSpec &spec, double carrier_frequency)
    {
        spec.validate();
        if (!(carrier_frequency > 0.0))
            throw std::invalid_argument("ground_truth_from_scenario: carrier must be > 0");
        const double wavelength = speed_of_light / carrier_frequency;

        auto rng = make_rng(spec.seed, phase_stream);
        std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);

        std::vector<PathParams> paths;
        for (const auto &r : spec.reflectors)
        {
            const double d1 = (spec.tx_position - r.position).norm();
            const double d2 = r.position.norm();
            if (!(d1 > 0.0) || !(d2 > 0.0))
                throw std::invalid_argument("ground_truth_from_scenario: zero path length");
            const auto [az, el] = direction_angles(r.position);
            PathParams p;
            p.delay = (d1 + d2) / speed_of_light;
            p.azimuth = az;
            p.elevation = el;
            p.gain = std::polar(two_segment_amplitude(d1 + d2, wavelength, r.reflection_loss_db), phase(rng));
            p.label = r.label;
            paths.push_back(p);
        }
        if (!spec.los_blocked)
        {
            const double d = spec.tx_position.norm();
            const auto [az, el] = direction_angles(spec.tx_position);
            PathParams p;
            p.delay = d / speed_of_light;
            p.azimuth = az;
            p.elevation = el;
            p.gain = std::polar(two_segment_amplitude(d, wavelength, 0.0), phase(rng));
            p.label = PathLabel::los;
            paths.push_back(p);
        }
        std::stable_sort(paths.begin(), paths.end(),
                         [](const PathParams &a, const PathParams &b) { return a.delay < b.delay; });
        if (spec.los_excess_db)
            paths = apply_los_dominance(std::move(paths), *spec.los_excess_db);
        return paths;
    }

    ChannelMatrix synthesize_noiseless(const ArrayGeometry &geom, const SubarraySelection &sel,
                                       const std::vector<PathParams> &paths, const FrequencyGrid &grid)
    {
        grid.validate();
        const int n_elem = sel.size();
        const int n_freq = grid.n_points;
        const double f0 = grid.start;
        const double df = grid.spacing();
        ChannelMatrix h = ChannelMatrix::Zero(n_elem, n_freq);

        for (const auto &p : paths)
        {
            const Eigen::Vector3d k = direction_vector(p.azimuth, p.elevation);
#pragma omp parallel for schedule(static)
            for (int m = 0; m < n_elem; ++m)
            {
                const auto &e = geom.element(sel.indices[static_cast<size_t>(m)]);
                const double amp = element_amplitude(e, p.azimuth, p.elevation);
                // Phase per Hz: array term minus propagation delay.
                const double rate = 2.0 * std::numbers::pi * (k.dot(e.position) / speed_of_light - p.delay);
                const std::complex<double> g = p.gain * amp;
                auto row = h.row(m);
                for (int kf = 0; kf < n_freq; ++kf)
                    row[kf] += g * std::polar(1.0, rate * (f0 + kf * df));
            }
        }
        return h;
    }

    ChannelData synthesize_channel(const ArrayGeometry &geom, const SubarraySelection &sel,
                                   const std::vector<PathParams> &paths, const FrequencyGrid &grid,
                                   std::optional<double> snr_db, std::uint64_t seed)
    {
        if (paths.empty())
            throw std::invalid_argument("synthesize_channel: no paths");
        for (const auto &p : paths)
            p.validate();

        ChannelData out;
        out.grid = grid;
        out.selection = sel;
        out.truth = paths;
        out.matrix = synthesize_noiseless(geom, sel, paths, grid);

        if (snr_db)
        {
            const double n_samples = static_cast<double>(out.matrix.size());
            const double signal_power = out.matrix.squaredNorm() / n_samples;
            const double noise_var = signal_power / std::pow(10.0, *snr_db / 10.0);
            const double sigma = std::sqrt(0.5 * noise_var);
            auto rng = make_rng(seed, noise_stream);
            std::normal_distribution<double> normal(0.0, 1.0);
            // Row-major fill order keeps the noise realization independent of threading.
            for (Eigen::Index m = 0; m < out.matrix.rows(); ++m)
                for (Eigen::Index k = 0; k < out.matrix.cols(); ++k)
                {
                    const double re = normal(rng);
                    const double im = normal(rng);
                    out.matrix(m, k) += std::complex<double>(sigma * re, sigma * im);
                }
        }
        return out;
    }

    std::vector<PathParams> apply_los_dominance(std::vector<PathParams> paths, double los_excess_db)
    {
        auto los = std::find_if(paths.begin(), paths.end(), [](const auto &p) { return p.label == PathLabel::los; });
        if (los == paths.end())
            throw not_found("apply_los_dominance: no LOS path");
        double strongest = 0.0;
        for (const auto &p : paths)
            if (p.label != PathLabel::los)
                strongest = std::max(strongest, std::abs(p.gain));
        if (strongest == 0.0)
            return paths;
        const double target = strongest * std::pow(10.0, los_excess_db / 20.0);
        const double current = std::abs(los->gain);
        los->gain = current > 0.0 ? los->gain * (target / current) : std::complex<double>(target, 0.0);
        return paths;
    }

    double empirical_snr_db(const ChannelMatrix &clean, const ChannelMatrix &noisy)
    {
        const double ps = clean.squaredNorm();
        const double pn = (noisy - clean).squaredNorm();
        return 10.0 * std::log10(ps / pn);
    }
}
