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

#include "mmsage/serialization.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>

#include "mmsage/errors.hpp"

namespace mmsage
{
    namespace
    {
        // Reads `key` in SI units, or `key` + suffix scaled to SI when only the alias is present.
        double read_scaled(const json &j, const std::string &key, double fallback,
                           std::initializer_list<std::pair<const char *, double>> aliases)
        {
            if (j.contains(key))
                return j.at(key).get<double>();
            for (const auto &[suffix, scale] : aliases)
            {
                const std::string k = key + suffix;
                if (j.contains(k))
                    return j.at(k).get<double>() * scale;
            }
            return fallback;
        }

        double read_angle(const json &j, const std::string &key, double fallback)
        {
            return read_scaled(j, key, fallback, {{"_rad", 1.0}, {"_deg", deg_to_rad(1.0)}});
        }

        double read_time(const json &j, const std::string &key, double fallback)
        {
            return read_scaled(j, key, fallback, {{"_s", 1.0}, {"_ns", 1e-9}});
        }

        double read_frequency(const json &j, const std::string &key, double fallback)
        {
            return read_scaled(j, key, fallback, {{"_hz", 1.0}, {"_mhz", 1e6}, {"_ghz", 1e9}});
        }

        json vec3(const Eigen::Vector3d &v) { return json::array({v.x(), v.y(), v.z()}); }

        Eigen::Vector3d vec3_from(const json &j)
        {
            if (!j.is_array() || j.size() != 3)
                throw std::invalid_argument("expected a 3-element position array");
            return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
        }

        json nullable(double v)
        {
            return std::isnan(v) ? json(nullptr) : json(v);
        }

        double nan_if_null(const json &j)
        {
            return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
        }
    }

    json to_json(const PatternSpec &p)
    {
        return {{"model", p.model == PatternModel::isotropic ? "isotropic" : "cosine_power"},
                {"exponent", p.exponent},
                {"back_lobe_floor", p.back_lobe_floor}};
    }

    PatternSpec pattern_from_json(const json &j)
    {
        PatternSpec p;
        const std::string model = j.value("model", std::string("cosine_power"));
        if (model == "isotropic")
            p = isotropic_pattern();
        else if (model != "cosine_power")
            throw std::invalid_argument("unknown pattern model '" + model + "'");
        p.exponent = j.value("exponent", p.exponent);
        if (j.contains("back_lobe_floor_db"))
            p.back_lobe_floor = std::pow(10.0, j.at("back_lobe_floor_db").get<double>() / 20.0);
        p.back_lobe_floor = j.value("back_lobe_floor", p.back_lobe_floor);
        p.validate();
        return p;
    }

    json to_json(const ArrayConfig &a)
    {
        return {{"n_columns", a.n_columns},
                {"n_rows", a.n_rows},
                {"carrier_frequency", a.carrier_frequency},
                {"radius", a.radius},
                {"vertical_spacing", a.vertical_spacing},
                {"pattern", to_json(a.pattern)}};
    }

    ArrayConfig array_config_from_json(const json &j)
    {
        ArrayConfig a;
        a.n_columns = j.value("n_columns", a.n_columns);
        a.n_rows = j.value("n_rows", a.n_rows);
        a.carrier_frequency = read_frequency(j, "carrier_frequency", a.carrier_frequency);
        a.radius = j.value("radius", a.radius);
        a.vertical_spacing = j.value("vertical_spacing", a.vertical_spacing);
        if (j.contains("pattern"))
            a.pattern = pattern_from_json(j.at("pattern"));
        return a;
    }

    json to_json(const FrequencyGrid &g)
    {
        return {{"start", g.start}, {"stop", g.stop}, {"n_points", g.n_points}};
    }

    FrequencyGrid frequency_grid_from_json(const json &j)
    {
        FrequencyGrid g;
        g.start = read_frequency(j, "start", g.start);
        g.stop = read_frequency(j, "stop", g.stop);
        g.n_points = j.value("n_points", g.n_points);
        g.validate();
        return g;
    }

    json to_json(const SageConfig &c)
    {
        json order = json::array();
        for (auto co : c.update_order)
            order.push_back(to_string(co));
        return {{"n_paths", c.n_paths},
                {"delay_step", c.delay_step},
                {"azimuth_step", c.azimuth_step},
                {"elevation_step", c.elevation_step},
                {"delay_min", c.delay_min},
                {"delay_max", c.delay_max},
                {"azimuth_window", c.azimuth_window},
                {"elevation_window", c.elevation_window},
                {"max_cycles", c.max_cycles},
                {"convergence", to_string(c.convergence)},
                {"refine", c.refine},
                {"init_coarsening", c.init_coarsening},
                {"update_order", order}};
    }

    SageConfig sage_config_from_json(const json &j)
    {
        SageConfig c;
        c.n_paths = j.value("n_paths", c.n_paths);
        c.delay_step = read_time(j, "delay_step", c.delay_step);
        c.azimuth_step = read_angle(j, "azimuth_step", c.azimuth_step);
        c.elevation_step = read_angle(j, "elevation_step", c.elevation_step);
        c.delay_min = read_time(j, "delay_min", c.delay_min);
        c.delay_max = read_time(j, "delay_max", c.delay_max);
        c.azimuth_window = read_angle(j, "azimuth_window", c.azimuth_window);
        c.elevation_window = read_angle(j, "elevation_window", c.elevation_window);
        c.max_cycles = j.value("max_cycles", c.max_cycles);
        if (j.contains("convergence"))
            c.convergence = parse_convergence(j.at("convergence").get<std::string>());
        c.refine = j.value("refine", c.refine);
        c.init_coarsening = j.value("init_coarsening", c.init_coarsening);
        if (j.contains("update_order"))
        {
            const auto &o = j.at("update_order");
            if (!o.is_array() || o.size() != 3)
                throw std::invalid_argument("update_order must list three coordinates");
            for (size_t i = 0; i < 3; ++i)
                c.update_order[i] = parse_coordinate(o[i].get<std::string>());
        }
        c.validate();
        return c;
    }

    json to_json(const PathParams &p)
    {
        return {{"label", to_string(p.label)},
                {"delay", p.delay},
                {"azimuth", p.azimuth},
                {"elevation", p.elevation},
                {"gain", json::array({p.gain.real(), p.gain.imag()})},
                {"delay_ns", p.delay * 1e9},
                {"azimuth_deg", rad_to_deg(p.azimuth)},
                {"elevation_deg", rad_to_deg(p.elevation)},
                {"power_db", 20.0 * std::log10(std::abs(p.gain))}};
    }

    PathParams path_from_json(const json &j)
    {
        PathParams p;
        p.label = parse_path_label(j.value("label", std::string("other")));
        p.delay = read_time(j, "delay", 0.0);
        p.azimuth = read_angle(j, "azimuth", 0.0);
        p.elevation = read_angle(j, "elevation", 0.0);
        const auto &g = j.at("gain");
        p.gain = {g.at(0).get<double>(), g.at(1).get<double>()};
        return p;
    }

    json to_json(const ScenarioSpec &s)
    {
        json refl = json::array();
        for (const auto &r : s.reflectors)
            refl.push_back({{"label", to_string(r.label)},
                            {"position", vec3(r.position)},
                            {"reflection_loss_db", r.reflection_loss_db}});
        json j = {{"id", s.id},
                  {"tx_position", vec3(s.tx_position)},
                  {"los_blocked", s.los_blocked},
                  {"snr_db", s.snr_db ? json(*s.snr_db) : json(nullptr)},
                  {"seed", s.seed},
                  {"reflectors", refl}};
        if (s.los_excess_db)
            j["los_excess_db"] = *s.los_excess_db;
        if (s.array)
            j["array"] = to_json(*s.array);
        return j;
    }

    ScenarioSpec scenario_from_json(const json &j)
    {
        ScenarioSpec s;
        s.id = j.at("id").get<std::string>();
        if (j.contains("tx_position"))
            s.tx_position = vec3_from(j.at("tx_position"));
        s.los_blocked = j.value("los_blocked", s.los_blocked);
        if (j.contains("snr_db"))
            s.snr_db = j.at("snr_db").is_null() ? std::nullopt : std::optional<double>(j.at("snr_db").get<double>());
        s.seed = j.value("seed", s.seed);
        for (const auto &r : j.value("reflectors", json::array()))
        {
            Reflector refl;
            refl.label = parse_path_label(r.at("label").get<std::string>());
            refl.position = vec3_from(r.at("position"));
            refl.reflection_loss_db = r.value("reflection_loss_db", 0.0);
            s.reflectors.push_back(refl);
        }
        if (j.contains("los_excess_db") && !j.at("los_excess_db").is_null())
            s.los_excess_db = j.at("los_excess_db").get<double>();
        if (j.contains("array"))
            s.array = array_config_from_json(j.at("array"));
        s.validate();
        return s;
    }

    json to_json(const SelectionScheme &s)
    {
        if (const auto *c = std::get_if<ColumnScheme>(&s))
            return {{"kind", "columns"}, {"n_cols", c->n_cols}, {"rotation_offset", c->rotation_offset}};
        if (const auto *r = std::get_if<RowScheme>(&s))
            return {{"kind", "rows"}, {"n_rows_selected", r->n_rows_selected}, {"offset", r->offset}};
        return {{"kind", "explicit"}, {"indices", std::get<ExplicitScheme>(s).indices}};
    }

    SelectionScheme selection_scheme_from_json(const json &j)
    {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "columns")
            return ColumnScheme{j.at("n_cols").get<int>(), j.value("rotation_offset", 0)};
        if (kind == "rows")
            return RowScheme{j.at("n_rows_selected").get<int>(), j.value("offset", 0)};
        if (kind == "explicit")
            return ExplicitScheme{j.at("indices").get<std::vector<int>>()};
        throw std::invalid_argument("unknown selection kind '" + kind + "'");
    }

    json to_json(const EstimationResult &r)
    {
        json paths = json::array();
        for (const auto &p : r.paths)
            paths.push_back(to_json(p));
        return {{"subset", {{"scheme", to_json(r.subset.scheme)}, {"indices", r.subset.indices}}},
                {"cycles_run", r.cycles_run},
                {"residual_power", r.residual_power},
                {"objective_trace", r.objective_trace},
                {"paths", paths}};
    }

    EstimationResult estimation_result_from_json(const json &j)
    {
        EstimationResult r;
        r.subset.scheme = selection_scheme_from_json(j.at("subset").at("scheme"));
        r.subset.indices = j.at("subset").at("indices").get<std::vector<int>>();
        r.cycles_run = j.at("cycles_run").get<int>();
        r.residual_power = j.at("residual_power").get<double>();
        r.objective_trace = j.at("objective_trace").get<std::vector<double>>();
        for (const auto &p : j.at("paths"))
            r.paths.push_back(path_from_json(p));
        return r;
    }

    json to_json(const ExperimentConfig &c)
    {
        json scenarios = json::array();
        for (const auto &s : c.scenarios)
            scenarios.push_back(to_json(s));
        json schemes = json::array();
        for (const auto &s : c.schemes)
            schemes.push_back(s.label());
        return {{"array", to_json(c.array)},
                {"grid", to_json(c.grid)},
                {"sage", to_json(c.sage)},
                {"scenarios", scenarios},
                {"schemes", schemes},
                {"seeds", c.seeds},
                {"delay_gate", c.delay_gate},
                {"n_paths", c.n_paths ? json(*c.n_paths) : json(nullptr)},
                {"snr_db", c.snr_db ? json(*c.snr_db) : json(nullptr)}};
    }

    ExperimentConfig experiment_config_from_json(const json &j)
    {
        ExperimentConfig c;
        if (j.contains("array"))
            c.array = array_config_from_json(j.at("array"));
        if (j.contains("grid"))
            c.grid = frequency_grid_from_json(j.at("grid"));
        if (j.contains("sage"))
            c.sage = sage_config_from_json(j.at("sage"));
        for (const auto &s : j.value("scenarios", json::array()))
            c.scenarios.push_back(scenario_from_json(s));
        if (j.contains("schemes"))
        {
            c.schemes.clear();
            for (const auto &s : j.at("schemes"))
                c.schemes.push_back(AntennaScheme::parse(s.get<std::string>()));
        }
        if (j.contains("seeds"))
            c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        c.delay_gate = read_time(j, "delay_gate", c.delay_gate);
        if (j.contains("n_paths") && !j.at("n_paths").is_null())
            c.n_paths = j.at("n_paths").get<int>();
        if (j.contains("snr_db") && !j.at("snr_db").is_null())
            c.snr_db = j.at("snr_db").get<double>();
        return c;
    }

    json to_json(const CellStats &c)
    {
        json j = {{"scenario_id", c.scenario_id},
                  {"scheme", c.scheme.label()},
                  {"n_antennas", c.n_antennas},
                  {"mean_azimuth_error_deg", nullable(c.mean_azimuth_error_deg)},
                  {"mean_elevation_error_deg", nullable(c.mean_elevation_error_deg)},
                  {"mean_delay_error_ns", nullable(c.mean_delay_error_ns)},
                  {"match_rate", c.match_rate},
                  {"n_runs", c.n_runs},
                  {"matched_paths", c.matched_paths},
                  {"truth_paths", c.truth_paths},
                  {"non_monotone_runs", c.non_monotone_runs},
                  {"failed", c.failed}};
        if (c.failed)
            j["error"] = c.error;
        return j;
    }

    CellStats cell_stats_from_json(const json &j)
    {
        CellStats c;
        c.scenario_id = j.at("scenario_id").get<std::string>();
        c.scheme = AntennaScheme::parse(j.at("scheme").get<std::string>());
        c.n_antennas = j.at("n_antennas").get<int>();
        c.mean_azimuth_error_deg = nan_if_null(j.at("mean_azimuth_error_deg"));
        c.mean_elevation_error_deg = nan_if_null(j.at("mean_elevation_error_deg"));
        c.mean_delay_error_ns = nan_if_null(j.at("mean_delay_error_ns"));
        c.match_rate = j.at("match_rate").get<double>();
        c.n_runs = j.at("n_runs").get<int>();
        c.matched_paths = j.value("matched_paths", 0);
        c.truth_paths = j.value("truth_paths", 0);
        c.non_monotone_runs = j.value("non_monotone_runs", 0);
        c.failed = j.value("failed", false);
        c.error = j.value("error", std::string());
        return c;
    }

    json to_json(const ExperimentReport &r)
    {
        json cells = json::array();
        for (const auto &c : r.cells)
            cells.push_back(to_json(c));
        return {{"format", "mmsage-report/1"}, {"config", to_json(r.config)}, {"cells", cells}};
    }

    ExperimentReport report_from_json(const json &j)
    {
        ExperimentReport r;
        r.config = experiment_config_from_json(j.at("config"));
        for (const auto &c : j.value("cells", json::array()))
            r.cells.push_back(cell_stats_from_json(c));
        return r;
    }

    json read_json_file(const std::string &path)
    {
        std::ifstream f(path);
        if (!f)
            throw io_error("cannot open '" + path + "'");
        try
        {
            return json::parse(f);
        }
        catch (const json::exception &e)
        {
            throw io_error("'" + path + "': " + e.what());
        }
    }

    void write_json_file(const json &j, const std::string &path)
    {
        std::ofstream f(path);
        if (!f)
            throw io_error("cannot open '" + path + "' for writing");
        f << j.dump(2) << '\n';
        if (!f)
            throw io_error("write failed for '" + path + "'");
    }

    ScenarioSpec load_scenario(const std::string &path)
    {
        try
        {
            return scenario_from_json(read_json_file(path));
        }
        catch (const io_error &)
        {
            throw;
        }
        catch (const std::exception &e)
        {
            throw std::invalid_argument("'" + path + "': " + e.what());
        }
    }

    std::vector<ScenarioSpec> load_scenario_dir(const std::string &dir)
    {
        namespace fs = std::filesystem;
        std::error_code ec;
        if (!fs::is_directory(dir, ec))
            throw io_error("scenario directory '" + dir + "' not found");
        std::vector<fs::path> files;
        for (const auto &entry : fs::directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().extension() == ".json" &&
                entry.path().filename().string().rfind("scenario", 0) == 0)
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        std::vector<ScenarioSpec> out;
        for (const auto &p : files)
            out.push_back(load_scenario(p.string()));
        return out;
    }

    SageConfig load_sage_config(const std::string &path)
    {
        const json j = read_json_file(path);
        return sage_config_from_json(j.contains("sage") ? j.at("sage") : j);
    }

    void save_report(const ExperimentReport &report, const std::string &path)
    {
        write_json_file(to_json(report), path);
    }

    ExperimentReport load_report(const std::string &path)
    {
        return report_from_json(read_json_file(path));
    }

    void save_estimation_result(const EstimationResult &result, const std::string &path)
    {
        write_json_file(to_json(result), path);
    }
}
