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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mmsage/array_geometry.hpp"
#include "mmsage/channel_synth.hpp"
#include "mmsage/sage.hpp"

namespace mmsage
{
    inline constexpr double default_delay_gate = 1.5e-9;

    struct MatchEntry
    {
        PathParams truth;
        std::optional<PathParams> matched;
        int estimate_index = -1;
        // Signed estimate - truth; zero when unmatched.
        double elevation_error_deg = 0.0;
        double azimuth_error_deg = 0.0;
        double delay_error_ns = 0.0;
    };

    struct MatchReport
    {
        std::vector<MatchEntry> entries; // ascending truth delay
        int unmatched_truth_count = 0;
        int spurious_estimate_count = 0;

        int matched_count() const { return static_cast<int>(entries.size()) - unmatched_truth_count; }
    };

    /// Greedy closest-elevation matching. Truth paths are visited by ascending delay; each takes the
    /// still-unassigned estimate within the delay gate that is closest in elevation (ties: smaller
    /// delay difference, then lower estimate index).
    MatchReport match_paths(const std::vector<PathParams> &estimates, const std::vector<PathParams> &truth,
                            double delay_gate = default_delay_gate);

    /// Column-rotation sweep (n_cols columns, every rotation offset) or a single row block.
    struct AntennaScheme
    {
        enum class Kind
        {
            columns,
            rows
        };
        Kind kind = Kind::columns;
        int count = 16;  // columns, or rows per block
        int offset = 0;  // rows only

        static AntennaScheme columns(int n_cols) { return {Kind::columns, n_cols, 0}; }
        static AntennaScheme rows(int n_rows, int offset = 0) { return {Kind::rows, n_rows, offset}; }

        std::string label() const;
        static AntennaScheme parse(const std::string &s);
        std::vector<SubarraySelection> selections(const ArrayGeometry &geom) const;

        bool operator==(const AntennaScheme &) const = default;
    };

    /// Mean absolute errors over matched reflector paths of every (seed, rotation) run of a cell.
    /// The LOS path takes part in matching but is excluded from the statistics.
    struct CellStats
    {
        std::string scenario_id;
        AntennaScheme scheme;
        int n_antennas = 0;
        double mean_azimuth_error_deg = 0.0;
        double mean_elevation_error_deg = 0.0;
        double mean_delay_error_ns = 0.0;
        double match_rate = 0.0;
        int n_runs = 0;
        int matched_paths = 0;
        int truth_paths = 0;
        int non_monotone_runs = 0;
        bool failed = false;
        std::string error;

        bool same_statistics(const CellStats &o) const;
    };

    struct CellOptions
    {
        FrequencyGrid grid;
        double delay_gate = default_delay_gate;
        std::optional<int> n_paths; // default: the scenario's path count
        std::optional<double> snr_db; // overrides the scenario SNR
        Exec exec = Exec::parallel;
    };

    /// For each seed: synthesize once on the full array, then estimate and match on every
    /// selection of the scheme.
    CellStats run_cell(const ScenarioSpec &scenario, const ArrayGeometry &geom, const AntennaScheme &scheme,
                       const SageConfig &cfg, const std::vector<std::uint64_t> &seeds, const CellOptions &opts = {});

    /// Everything needed to rerun a sweep bit-for-bit.
    struct ExperimentConfig
    {
        ArrayConfig array;
        FrequencyGrid grid;
        SageConfig sage;
        std::vector<ScenarioSpec> scenarios;
        std::vector<AntennaScheme> schemes{AntennaScheme::columns(16), AntennaScheme::columns(8),
                                           AntennaScheme::columns(4), AntennaScheme::columns(2)};
        std::vector<std::uint64_t> seeds;
        double delay_gate = default_delay_gate;
        std::optional<int> n_paths;
        std::optional<double> snr_db;

        void validate() const;
    };

    std::vector<std::uint64_t> default_seeds(int n = 20);

    struct ExperimentReport
    {
        ExperimentConfig config;
        std::vector<CellStats> cells; // scenario-major, scheme-minor

        bool any_failed() const;
        const CellStats *find(const std::string &scenario_id, const AntennaScheme &scheme) const;
    };

    /// Scenarios x schemes. A failing cell is recorded and the sweep continues.
    ExperimentReport run_experiment(const ExperimentConfig &config, Exec exec = Exec::parallel);

    enum class ReportFormat
    {
        csv,
        structured_text
    };

    inline constexpr const char *csv_header =
        "scenario_id,n_antennas,scheme,mean_az_err_deg,mean_el_err_deg,mean_delay_err_ns,match_rate,n_runs";

    std::string report_to_csv(const ExperimentReport &report);
    void export_report(const ExperimentReport &report, ReportFormat format, const std::string &path);
}
