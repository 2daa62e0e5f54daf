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

#include <string>
#include <vector>

#include <json.hpp>

#include "mmsage/array_geometry.hpp"
#include "mmsage/channel_synth.hpp"
#include "mmsage/evaluation.hpp"
#include "mmsage/sage.hpp"

// JSON mapping of configuration files, estimation results and experiment reports.
//
// Writers emit SI units (s, rad, Hz, m) so that a written file reads back bit-identically.
// Readers additionally accept human-friendly aliases with a unit suffix, e.g. "azimuth_step_deg"
// or "delay_max_ns", in place of the SI key. See docs/file_formats.md.

namespace mmsage
{
    using json = nlohmann::json;

    json to_json(const PatternSpec &p);
    PatternSpec pattern_from_json(const json &j);

    json to_json(const ArrayConfig &a);
    ArrayConfig array_config_from_json(const json &j);

    json to_json(const FrequencyGrid &g);
    FrequencyGrid frequency_grid_from_json(const json &j);

    json to_json(const SageConfig &c);
    SageConfig sage_config_from_json(const json &j);

    json to_json(const PathParams &p);
    PathParams path_from_json(const json &j);

    json to_json(const ScenarioSpec &s);
    ScenarioSpec scenario_from_json(const json &j);

    json to_json(const SelectionScheme &s);
    SelectionScheme selection_scheme_from_json(const json &j);

    json to_json(const EstimationResult &r);
    EstimationResult estimation_result_from_json(const json &j);

    json to_json(const ExperimentConfig &c);
    ExperimentConfig experiment_config_from_json(const json &j);

    json to_json(const CellStats &c);
    CellStats cell_stats_from_json(const json &j);

    json to_json(const ExperimentReport &r);
    ExperimentReport report_from_json(const json &j);

    json read_json_file(const std::string &path);
    void write_json_file(const json &j, const std::string &path);

    ScenarioSpec load_scenario(const std::string &path);
    /// All *.json scenario files of a directory, ordered by file name.
    std::vector<ScenarioSpec> load_scenario_dir(const std::string &dir);
    SageConfig load_sage_config(const std::string &path);

    void save_report(const ExperimentReport &report, const std::string &path);
    ExperimentReport load_report(const std::string &path);
    void save_estimation_result(const EstimationResult &result, const std::string &path);
}
