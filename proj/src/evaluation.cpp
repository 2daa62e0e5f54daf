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

#include "mmsage/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mmsage/errors.hpp"
#include "mmsage/serialization.hpp"

namespace mmsage
{
    MatchReport match_paths(const std::vector<PathParams> &estimates, const std::vector<PathParams> &truth,
                            double delay_gate)
    {
        if (!(delay_gate > 0.0))
            throw std::invalid_argument("match_paths: delay_gate must be > 0");

        std::vector<size_t> truth_order(truth.size());
        for (size_t i = 0; i < truth.size(); ++i)
            truth_order[i] = i;
        std::stable_sort(truth_order.begin(), truth_order.end(),
                         [&](size_t a, size_t b) { return truth[a].delay < truth[b].delay; });

        MatchReport report;
        std::vector<bool> taken(estimates.size(), false);
        for (size_t ti : truth_order)
        {
            const PathParams &t = truth[ti];
            MatchEntry entry;
            entry.truth = t;

            int best = -1;
            double best_el = 0.0;
            double best_dt = 0.0;
            for (size_t ei = 0; ei < estimates.size(); ++ei)
            {
                if (taken[ei])
                    continue;
                const double dt = std::abs(estimates[ei].delay - t.delay);
                if (!(dt < delay_gate))
                    continue;
                const double del = std::abs(estimates[ei].elevation - t.elevation);
                if (best < 0 || del < best_el || (del == best_el && dt < best_dt))
                {
                    best = static_cast<int>(ei);
                    best_el = del;
                    best_dt = dt;
                }
            }

            if (best >= 0)
            {
                const PathParams &e = estimates[static_cast<size_t>(best)];
                taken[static_cast<size_t>(best)] = true;
                entry.matched = e;
                entry.estimate_index = best;
                entry.elevation_error_deg = rad_to_deg(e.elevation - t.elevation);
                entry.azimuth_error_deg = rad_to_deg(wrap_azimuth(e.azimuth - t.azimuth));
                entry.delay_error_ns = (e.delay - t.delay) * 1e9;
            }
            else
            {
                ++report.unmatched_truth_count;
            }
            report.entries.push_back(entry);
        }
        report.spurious_estimate_count =
            static_cast<int>(std::count(taken.begin(), taken.end(), false));
        return report;
    }

    // ---- Antenna schemes ------------------------------------------------------------------------

    std::string AntennaScheme::label() const
    {
        if (kind == Kind::columns)
            return "columns" + std::to_string(count);
        return offset == 0 ? "rows" + std::to_string(count) : "rows" + std::to_string(count) + "@" + std::to_string(offset);
    }

    AntennaScheme AntennaScheme::parse(const std::string &s)
    {
        auto number = [&](const std::string &digits) {
            if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
                throw std::invalid_argument("bad antenna scheme '" + s + "'");
            return std::stoi(digits);
        };
        if (s.rfind("columns", 0) == 0)
            return columns(number(s.substr(7)));
        if (s == "row")
            return rows(1, 0);
        if (s.rfind("rows", 0) == 0)
        {
            const std::string rest = s.substr(4);
            const auto at = rest.find('@');
            if (at == std::string::npos)
                return rows(number(rest), 0);
            return rows(number(rest.substr(0, at)), number(rest.substr(at + 1)));
        }
        // Bare number: column count.
        return columns(number(s));
    }

    std::vector<SubarraySelection> AntennaScheme::selections(const ArrayGeometry &geom) const
    {
        if (kind == Kind::columns)
            return enumerate_rotations(geom, count);
        return {select_subarray(geom, RowScheme{count, offset})};
    }

    bool CellStats::same_statistics(const CellStats &o) const
    {
        return scenario_id == o.scenario_id && scheme == o.scheme && n_antennas == o.n_antennas &&
               mean_azimuth_error_deg == o.mean_azimuth_error_deg &&
               mean_elevation_error_deg == o.mean_elevation_error_deg &&
               mean_delay_error_ns == o.mean_delay_error_ns && match_rate == o.match_rate && n_runs == o.n_runs &&
               matched_paths == o.matched_paths && truth_paths == o.truth_paths && failed == o.failed;
    }

    // ---- Cells --------------------------------------------------------------------------------

    namespace
    {
        struct RunOutcome
        {
            MatchReport match;
            bool monotone = true;
            std::string error;
        };
    }

    CellStats run_cell(const ScenarioSpec &scenario, const ArrayGeometry &geom, const AntennaScheme &scheme,
                       const SageConfig &cfg, const std::vector<std::uint64_t> &seeds, const CellOptions &opts)
    {
        if (seeds.empty())
            throw std::invalid_argument("run_cell: no seeds");
        if (scheme.kind == AntennaScheme::Kind::columns && (scheme.count < 1 || geom.n_columns() % scheme.count != 0))
            throw std::invalid_argument("run_cell: " + scheme.label() + " does not divide the column count");

        const auto selections = scheme.selections(geom);
        const SubarraySelection full = select_subarray(geom, ColumnScheme{geom.n_columns(), 0});

        SageConfig run_cfg = cfg;
        run_cfg.n_paths = opts.n_paths.value_or(scenario.default_path_count());
        run_cfg.validate();

        // One snapshot per seed on the full array; rotations reuse it.
        std::vector<ChannelData> snapshots;
        snapshots.reserve(seeds.size());
        for (std::uint64_t seed : seeds)
        {
            try
            {
                ScenarioSpec s = scenario;
                s.seed = seed;
                const auto truth = ground_truth_from_scenario(s, geom.carrier_frequency());
                snapshots.push_back(
                    synthesize_channel(geom, full, truth, opts.grid, opts.snr_db ? opts.snr_db : s.snr_db, seed));
            }
            catch (const std::exception &e)
            {
                throw std::runtime_error("scenario '" + scenario.id + "' seed " + std::to_string(seed) +
                                         ": synthesis failed: " + e.what());
            }
        }

        const int n_sel = static_cast<int>(selections.size());
        const int n_runs = static_cast<int>(seeds.size()) * n_sel;
        std::vector<RunOutcome> outcomes(static_cast<size_t>(n_runs));

        // Runs are independent; nested kernel parallelism collapses to one thread inside.
#pragma omp parallel for schedule(dynamic, 1)
        for (int r = 0; r < n_runs; ++r)
        {
            const size_t si = static_cast<size_t>(r / n_sel);
            const auto &sel = selections[static_cast<size_t>(r % n_sel)];
            auto &out = outcomes[static_cast<size_t>(r)];
            try
            {
                const ChannelData data = snapshots[si].restrict_to(sel);
                const EstimationResult est = run_sage(data, geom, run_cfg, opts.exec);
                out.monotone = est.trace_monotone(1e-9);
                out.match = match_paths(est.paths, *snapshots[si].truth, opts.delay_gate);
            }
            catch (const std::exception &e)
            {
                out.error = "scenario '" + scenario.id + "' seed " + std::to_string(seeds[si]) + " " + sel.label() +
                            ": " + e.what();
            }
        }

        CellStats stats;
        stats.scenario_id = scenario.id;
        stats.scheme = scheme;
        stats.n_antennas = selections.front().size();
        stats.n_runs = n_runs;

        // Fixed run order keeps the sums reproducible.
        double sum_az = 0.0, sum_el = 0.0, sum_dt = 0.0;
        for (const auto &o : outcomes)
        {
            if (!o.error.empty())
                throw std::runtime_error(o.error);
            if (!o.monotone)
                ++stats.non_monotone_runs;
            for (const auto &e : o.match.entries)
            {
                if (e.truth.label == PathLabel::los)
                    continue;
                ++stats.truth_paths;
                if (!e.matched)
                    continue;
                ++stats.matched_paths;
                sum_az += std::abs(e.azimuth_error_deg);
                sum_el += std::abs(e.elevation_error_deg);
                sum_dt += std::abs(e.delay_error_ns);
            }
        }
        if (stats.matched_paths > 0)
        {
            stats.mean_azimuth_error_deg = sum_az / stats.matched_paths;
            stats.mean_elevation_error_deg = sum_el / stats.matched_paths;
            stats.mean_delay_error_ns = sum_dt / stats.matched_paths;
        }
        else
        {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            stats.mean_azimuth_error_deg = stats.mean_elevation_error_deg = stats.mean_delay_error_ns = nan;
        }
        stats.match_rate =
            stats.truth_paths > 0 ? static_cast<double>(stats.matched_paths) / stats.truth_paths : 0.0;
        return stats;
    }

    // ---- Experiments --------------------------------------------------------------------------

    std::vector<std::uint64_t> default_seeds(int n)
    {
        std::vector<std::uint64_t> s;
        for (int i = 1; i <= n; ++i)
            s.push_back(static_cast<std::uint64_t>(i));
        return s;
    }

    void ExperimentConfig::validate() const
    {
        grid.validate();
        sage.validate();
        array.pattern.validate();
        if (scenarios.empty())
            throw std::invalid_argument("experiment: no scenarios");
        if (schemes.empty())
            throw std::invalid_argument("experiment: no antenna schemes");
        if (seeds.empty())
            throw std::invalid_argument("experiment: no seeds");
        if (!(delay_gate > 0.0))
            throw std::invalid_argument("experiment: delay_gate must be > 0");
        for (const auto &s : scenarios)
            s.validate();
    }

    bool ExperimentReport::any_failed() const
    {
        return std::any_of(cells.begin(), cells.end(), [](const CellStats &c) { return c.failed; });
    }

    const CellStats *ExperimentReport::find(const std::string &scenario_id, const AntennaScheme &scheme) const
    {
        for (const auto &c : cells)
            if (c.scenario_id == scenario_id && c.scheme == scheme)
                return &c;
        return nullptr;
    }

    ExperimentReport run_experiment(const ExperimentConfig &config, Exec exec)
    {
        config.validate();
        ExperimentReport report;
        report.config = config;

        CellOptions opts;
        opts.grid = config.grid;
        opts.delay_gate = config.delay_gate;
        opts.n_paths = config.n_paths;
        opts.snr_db = config.snr_db;
        opts.exec = exec;

        for (const auto &scenario : config.scenarios)
        {
            const ArrayGeometry geom = scenario.array ? scenario.array->build() : config.array.build();
            for (const auto &scheme : config.schemes)
            {
                try
                {
                    report.cells.push_back(run_cell(scenario, geom, scheme, config.sage, config.seeds, opts));
                }
                catch (const std::exception &e)
                {
                    CellStats failed;
                    failed.scenario_id = scenario.id;
                    failed.scheme = scheme;
                    failed.failed = true;
                    failed.error = e.what();
                    report.cells.push_back(failed);
                }
            }
        }
        return report;
    }

    std::string report_to_csv(const ExperimentReport &report)
    {
        std::ostringstream os;
        os << csv_header << '\n';
        os << std::setprecision(17);
        for (const auto &c : report.cells)
        {
            if (c.failed)
            {
                os << c.scenario_id << ',' << c.n_antennas << ',' << c.scheme.label() << ",nan,nan,nan,nan,0\n";
                continue;
            }
            os << c.scenario_id << ',' << c.n_antennas << ',' << c.scheme.label() << ',' << c.mean_azimuth_error_deg
               << ',' << c.mean_elevation_error_deg << ',' << c.mean_delay_error_ns << ',' << c.match_rate << ','
               << c.n_runs << '\n';
        }
        return os.str();
    }

    void export_report(const ExperimentReport &report, ReportFormat format, const std::string &path)
    {
        if (format == ReportFormat::structured_text)
        {
            save_report(report, path);
            return;
        }
        std::ofstream f(path);
        if (!f)
            throw io_error("cannot open '" + path + "' for writing");
        f << report_to_csv(report);
        if (!f)
            throw io_error("write failed for '" + path + "'");
    }
}
