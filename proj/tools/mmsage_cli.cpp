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

// mmsage command line: synthesize snapshots, run the estimator, sweep experiments, export reports.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmsage/channel_io.hpp"
#include "mmsage/errors.hpp"
#include "mmsage/evaluation.hpp"
#include "mmsage/sage.hpp"
#include "mmsage/serialization.hpp"

using namespace mmsage;

namespace
{
    constexpr int exit_partial_failure = 2;

    std::string default_scenario_dir()
    {
        if (const char *env = std::getenv("MMSAGE_SCENARIO_DIR"); env && *env)
            return env;
        return "scenarios";
    }

    SageConfig load_config_or_default(const std::string &path)
    {
        return path.empty() ? SageConfig{} : load_sage_config(path);
    }

    std::vector<std::uint64_t> parse_seeds(const std::vector<std::string> &items, int n_default)
    {
        if (items.empty())
            return default_seeds(n_default);
        std::vector<std::uint64_t> out;
        for (const auto &item : items)
        {
            const auto dash = item.find('-');
            if (dash != std::string::npos && dash > 0)
            {
                const auto lo = std::stoull(item.substr(0, dash));
                const auto hi = std::stoull(item.substr(dash + 1));
                if (hi < lo)
                    throw std::invalid_argument("bad seed range '" + item + "'");
                for (auto s = lo; s <= hi; ++s)
                    out.push_back(s);
            }
            else
            {
                out.push_back(std::stoull(item));
            }
        }
        return out;
    }

    // ---- synth --------------------------------------------------------------------------------

    struct SynthArgs
    {
        std::string scenario;
        std::string out;
        std::string scheme = "columns16";
        int rotation = 0;
        std::optional<double> snr_db;
        bool noiseless = false;
        std::optional<std::uint64_t> seed;
        int n_points = FrequencyGrid{}.n_points;
    };

    int cmd_synth(const SynthArgs &a)
    {
        ScenarioSpec s = load_scenario(a.scenario);
        if (a.seed)
            s.seed = *a.seed;
        const ArrayGeometry geom = s.array ? s.array->build() : default_array();
        auto paths = ground_truth_from_scenario(s, geom.carrier_frequency());

        const AntennaScheme scheme = AntennaScheme::parse(a.scheme);
        SelectionScheme sel_scheme;
        if (scheme.kind == AntennaScheme::Kind::columns)
            sel_scheme = ColumnScheme{scheme.count, a.rotation};
        else
            sel_scheme = RowScheme{scheme.count, scheme.offset};
        const auto sel = select_subarray(geom, sel_scheme);

        FrequencyGrid grid;
        grid.n_points = a.n_points;
        const std::optional<double> snr = a.noiseless ? std::nullopt : (a.snr_db ? a.snr_db : s.snr_db);
        const auto data = synthesize_channel(geom, sel, paths, grid, snr, s.seed);
        save_channel(data, a.out);
        std::cout << "wrote " << a.out << ": " << data.matrix.rows() << " elements x " << data.matrix.cols()
                  << " frequencies, " << paths.size() << " paths (" << sel.label() << ")\n";
        return 0;
    }

    // ---- estimate -----------------------------------------------------------------------------

    struct EstimateArgs
    {
        std::string channel;
        std::string config;
        std::string out;
        std::string array;
        std::optional<int> n_paths;
        bool refine = false;
    };

    int cmd_estimate(const EstimateArgs &a)
    {
        const ChannelData data = load_channel(a.channel);
        SageConfig cfg = load_config_or_default(a.config);
        if (a.n_paths)
            cfg.n_paths = *a.n_paths;
        if (a.refine)
            cfg.refine = true;
        const ArrayGeometry geom =
            a.array.empty() ? default_array() : array_config_from_json(read_json_file(a.array)).build();

        const auto result = run_sage(data, geom, cfg);
        json j = to_json(result);
        if (data.truth)
        {
            const auto m = match_paths(result.paths, *data.truth);
            json matches = json::array();
            for (const auto &e : m.entries)
                matches.push_back({{"truth", to_json(e.truth)},
                                   {"estimate_index", e.estimate_index},
                                   {"azimuth_error_deg", e.azimuth_error_deg},
                                   {"elevation_error_deg", e.elevation_error_deg},
                                   {"delay_error_ns", e.delay_error_ns}});
            j["matches"] = matches;
        }
        if (a.out.empty())
            std::cout << j.dump(2) << '\n';
        else
        {
            write_json_file(j, a.out);
            std::cout << "wrote " << a.out << '\n';
        }
        for (const auto &p : result.paths)
            std::cerr << "path: delay " << p.delay * 1e9 << " ns, azimuth " << rad_to_deg(p.azimuth)
                      << " deg, elevation " << rad_to_deg(p.elevation) << " deg, |gain| " << std::abs(p.gain) << '\n';
        return 0;
    }

    // ---- experiment ---------------------------------------------------------------------------

    struct ExperimentArgs
    {
        std::string scenario_dir;
        std::vector<std::string> scenario_files;
        std::string config;
        std::string from_report;
        std::string out;
        std::string csv;
        std::vector<std::string> seeds;
        int n_seeds = 20;
        std::vector<std::string> schemes;
        std::optional<int> n_paths;
        std::optional<double> snr_db;
        int n_points = FrequencyGrid{}.n_points;
    };

    int cmd_experiment(const ExperimentArgs &a)
    {
        ExperimentConfig ec;
        if (!a.from_report.empty())
        {
            ec = load_report(a.from_report).config;
        }
        else
        {
            ec.sage = load_config_or_default(a.config);
            if (!a.scenario_files.empty())
                for (const auto &f : a.scenario_files)
                    ec.scenarios.push_back(load_scenario(f));
            else
                ec.scenarios = load_scenario_dir(a.scenario_dir.empty() ? default_scenario_dir() : a.scenario_dir);
            ec.seeds = parse_seeds(a.seeds, a.n_seeds);
            ec.grid.n_points = a.n_points;
            if (!a.schemes.empty())
            {
                ec.schemes.clear();
                for (const auto &s : a.schemes)
                    ec.schemes.push_back(AntennaScheme::parse(s));
            }
            ec.n_paths = a.n_paths;
            ec.snr_db = a.snr_db;
        }

        const auto report = run_experiment(ec);
        if (!a.out.empty())
        {
            save_report(report, a.out);
            std::cout << "wrote " << a.out << '\n';
        }
        if (!a.csv.empty())
            export_report(report, ReportFormat::csv, a.csv);
        std::cout << report_to_csv(report);
        for (const auto &c : report.cells)
            if (c.failed)
                std::cerr << "cell " << c.scenario_id << " " << c.scheme.label() << " failed: " << c.error << '\n';
        return report.any_failed() ? exit_partial_failure : 0;
    }

    // ---- report -------------------------------------------------------------------------------

    struct Series
    {
        std::string scenario_id;
        std::vector<std::pair<int, double>> points; // (n_antennas, mean error)
    };

    std::vector<Series> column_series(const ExperimentReport &r, bool azimuth)
    {
        std::vector<Series> out;
        for (const auto &c : r.cells)
        {
            if (c.failed || c.scheme.kind != AntennaScheme::Kind::columns)
                continue;
            auto it = std::find_if(out.begin(), out.end(), [&](const Series &s) { return s.scenario_id == c.scenario_id; });
            if (it == out.end())
            {
                out.push_back({c.scenario_id, {}});
                it = out.end() - 1;
            }
            it->points.emplace_back(c.n_antennas, azimuth ? c.mean_azimuth_error_deg : c.mean_elevation_error_deg);
        }
        for (auto &s : out)
            std::sort(s.points.begin(), s.points.end());
        return out;
    }

    void write_series_csv(const std::vector<Series> &series, const std::string &path)
    {
        std::ofstream f(path);
        if (!f)
            throw io_error("cannot open '" + path + "' for writing");
        f << "scenario_id,n_antennas,mean_err_deg\n";
        f.precision(17);
        for (const auto &s : series)
            for (const auto &[n, v] : s.points)
                f << s.scenario_id << ',' << n << ',' << v << '\n';
    }

    // Two side-by-side panels: azimuth and elevation error against antenna count (log2 axis).
    void write_svg(const std::vector<Series> &az, const std::vector<Series> &el, const std::string &path)
    {
        const int panel_w = 360, panel_h = 260, margin = 50;
        std::set<int> counts;
        double ymax = 1.0;
        for (const auto *group : {&az, &el})
            for (const auto &s : *group)
                for (const auto &[n, v] : s.points)
                {
                    counts.insert(n);
                    if (std::isfinite(v))
                        ymax = std::max(ymax, v);
                }
        ymax = std::ceil(ymax * 1.1);
        if (counts.empty())
            counts.insert(1);
        const double lx0 = std::log2(*counts.begin()), lx1 = std::max(std::log2(*counts.rbegin()), lx0 + 1.0);
        const char *colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

        std::ofstream f(path);
        if (!f)
            throw io_error("cannot open '" + path + "' for writing");
        const int width = 2 * (panel_w + 2 * margin), height = panel_h + 2 * margin + 20;
        f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
          << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
        f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        int panel = 0;
        for (const auto &[group, title] :
             {std::pair{&az, "Azimuth error [deg]"}, std::pair{&el, "Elevation error [deg]"}})
        {
            const double ox = panel * (panel_w + 2 * margin) + margin, oy = margin;
            auto px = [&](int n) { return ox + (std::log2(n) - lx0) / (lx1 - lx0) * panel_w; };
            auto py = [&](double v) { return oy + panel_h - v / ymax * panel_h; };
            f << "<text x=\"" << ox + panel_w / 2 << "\" y=\"" << oy - 15 << "\" text-anchor=\"middle\">" << title
              << "</text>\n";
            f << "<rect x=\"" << ox << "\" y=\"" << oy << "\" width=\"" << panel_w << "\" height=\"" << panel_h
              << "\" fill=\"none\" stroke=\"black\"/>\n";
            for (int n : counts)
                f << "<text x=\"" << px(n) << "\" y=\"" << oy + panel_h + 15 << "\" text-anchor=\"middle\">" << n
                  << "</text>\n";
            f << "<text x=\"" << ox + panel_w / 2 << "\" y=\"" << oy + panel_h + 32
              << "\" text-anchor=\"middle\">antennas</text>\n";
            for (int t = 0; t <= 4; ++t)
            {
                const double v = ymax * t / 4.0;
                f << "<text x=\"" << ox - 5 << "\" y=\"" << py(v) + 4 << "\" text-anchor=\"end\">" << v << "</text>\n";
            }
            int si = 0;
            for (const auto &s : *group)
            {
                const char *col = colors[si % 6];
                std::ostringstream pts;
                for (const auto &[n, v] : s.points)
                    if (std::isfinite(v))
                        pts << px(n) << ',' << py(v) << ' ';
                f << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"2\" points=\"" << pts.str()
                  << "\"/>\n";
                for (const auto &[n, v] : s.points)
                    if (std::isfinite(v))
                        f << "<circle cx=\"" << px(n) << "\" cy=\"" << py(v) << "\" r=\"3\" fill=\"" << col << "\"/>\n";
                f << "<text x=\"" << ox + 8 << "\" y=\"" << oy + 15 + 14 * si << "\" fill=\"" << col << "\">"
                  << s.scenario_id << "</text>\n";
                ++si;
            }
            ++panel;
        }
        f << "</svg>\n";
    }

    struct ReportArgs
    {
        std::string report;
        std::string out_dir = ".";
        bool svg = false;
    };

    int cmd_report(const ReportArgs &a)
    {
        const auto report = load_report(a.report);
        std::filesystem::create_directories(a.out_dir);
        const std::filesystem::path dir(a.out_dir);
        export_report(report, ReportFormat::csv, (dir / "cells.csv").string());
        const auto az = column_series(report, true);
        const auto el = column_series(report, false);
        write_series_csv(az, (dir / "azimuth_vs_antennas.csv").string());
        write_series_csv(el, (dir / "elevation_vs_antennas.csv").string());
        std::cout << "wrote cells.csv, azimuth_vs_antennas.csv, elevation_vs_antennas.csv";
        if (a.svg)
        {
            write_svg(az, el, (dir / "error_vs_antennas.svg").string());
            std::cout << ", error_vs_antennas.svg";
        }
        std::cout << " to " << a.out_dir << '\n';
        return report.any_failed() ? exit_partial_failure : 0;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"mmsage - massive MIMO channel synthesis and SAGE path extraction"};
    app.require_subcommand(1);

    SynthArgs sa;
    auto *synth = app.add_subcommand("synth", "Synthesize a channel snapshot from a scenario file");
    synth->add_option("scenario", sa.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    synth->add_option("-o,--out", sa.out, "Output channel file")->required();
    synth->add_option("--scheme", sa.scheme, "Antenna scheme: columns16, columns8, ..., rows1, rows1@k");
    synth->add_option("--rotation", sa.rotation, "Rotation offset of a column scheme");
    synth->add_option("--snr", sa.snr_db, "Aggregate SNR in dB (overrides the scenario)");
    synth->add_flag("--noiseless", sa.noiseless, "Do not add noise");
    synth->add_option("--seed", sa.seed, "Noise and phase seed (overrides the scenario)");
    synth->add_option("--points", sa.n_points, "Number of frequency points over 3.3-3.7 GHz");

    EstimateArgs ea;
    auto *estimate = app.add_subcommand("estimate", "Run SAGE on a channel file");
    estimate->add_option("channel", ea.channel, "Channel file")->required()->check(CLI::ExistingFile);
    estimate->add_option("-c,--config", ea.config, "Estimator configuration JSON")->check(CLI::ExistingFile);
    estimate->add_option("--array", ea.array, "Array configuration JSON (default: 16x4 cylinder)")
        ->check(CLI::ExistingFile);
    estimate->add_option("-L,--paths", ea.n_paths, "Number of paths to extract");
    estimate->add_flag("--refine", ea.refine, "Enable 3-point quadratic refinement");
    estimate->add_option("-o,--out", ea.out, "Result JSON file (default: stdout)");

    ExperimentArgs xa;
    auto *experiment = app.add_subcommand("experiment", "Sweep scenarios x antenna schemes x seeds");
    experiment->add_option("--scenario-dir", xa.scenario_dir,
                           "Directory of scenario*.json files (default: $MMSAGE_SCENARIO_DIR or ./scenarios)");
    experiment->add_option("--scenario", xa.scenario_files, "Scenario file(s) instead of a directory");
    experiment->add_option("-c,--config", xa.config, "Estimator configuration JSON")->check(CLI::ExistingFile);
    experiment->add_option("--from-report", xa.from_report, "Rerun the configuration stored in a report")
        ->check(CLI::ExistingFile);
    experiment->add_option("--seeds", xa.seeds, "Seed list, e.g. 1 2 5-9")->delimiter(',');
    experiment->add_option("--n-seeds", xa.n_seeds, "Use seeds 1..N when --seeds is absent");
    experiment->add_option("--schemes", xa.schemes, "Antenna schemes, e.g. columns16,columns2,rows1")->delimiter(',');
    experiment->add_option("-L,--paths", xa.n_paths, "Override the number of extracted paths");
    experiment->add_option("--snr", xa.snr_db, "Override the scenario SNR in dB");
    experiment->add_option("--points", xa.n_points, "Number of frequency points over 3.3-3.7 GHz");
    experiment->add_option("-o,--out", xa.out, "Report JSON file");
    experiment->add_option("--csv", xa.csv, "Also write the cell table as CSV");

    ReportArgs ra;
    auto *report = app.add_subcommand("report", "Export per-figure CSV (and optional SVG) from a report");
    report->add_option("report", ra.report, "Report JSON file")->required()->check(CLI::ExistingFile);
    report->add_option("-o,--out-dir", ra.out_dir, "Output directory");
    report->add_flag("--svg", ra.svg, "Also render error-vs-antenna-count curves as SVG");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*synth)
            return cmd_synth(sa);
        if (*estimate)
            return cmd_estimate(ea);
        if (*experiment)
            return cmd_experiment(xa);
        if (*report)
            return cmd_report(ra);
    }
    catch (const std::exception &e)
    {
        std::cerr << "mmsage: error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
