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

// Serial reference vs OpenMP timing of the estimator scans and of one full estimation.
//
//   bench_kernels [repetitions]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include <omp.h>

#include "mmsage/channel_synth.hpp"
#include "mmsage/kernels.hpp"
#include "mmsage/sage.hpp"

using namespace mmsage;

namespace
{
    double time_best(int reps, const std::function<void()> &f)
    {
        double best = 1e300;
        for (int r = 0; r < reps; ++r)
        {
            const auto t0 = std::chrono::steady_clock::now();
            f();
            best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        }
        return best;
    }

    void row(const std::string &name, double serial, double parallel)
    {
        std::printf("%-28s %12.3f %12.3f %8.2fx\n", name.c_str(), serial * 1e3, parallel * 1e3, serial / parallel);
    }
}

int main(int argc, char **argv)
{
    const int reps = argc > 1 ? std::max(1, std::atoi(argv[1])) : 3;

    const auto geom = default_array();
    const auto sel = select_subarray(geom, ColumnScheme{16, 0});
    const FrequencyGrid grid;
    std::vector<PathParams> paths(3);
    paths[0] = {25e-9, 0.05, 1.26, {1e-3, 0.0}, PathLabel::screen};
    paths[1] = {15.7e-9, 0.0, 1.97, {0.0, 4e-4}, PathLabel::pole};
    paths[2] = {18.8e-9, -0.02, 2.13, {2e-4, 1e-4}, PathLabel::ball};
    const auto data = synthesize_channel(geom, sel, paths, grid, 50.0, 1);

    const SageConfig cfg;
    const Manifold mf(geom, sel, grid);
    const auto delays = cfg.delay_grid();
    const DelayTable table(delays, grid);
    const auto az = cfg.azimuth_grid();
    const auto el = cfg.elevation_grid();

    std::vector<Direction> el_line, coarse_dirs;
    for (int i = 0; i < el.count; ++i)
        el_line.push_back({0.0, el.value(i)});
    for (int ia = 0; ia < az.count; ia += 4)
        for (int ie = 0; ie < el.count; ie += 4)
            coarse_dirs.push_back({az.value(ia), el.value(ie)});

    const auto z = compensate_delay(data.matrix, grid, paths[0].delay);
    const auto y = beamform(mf, data.matrix, {paths[0].azimuth, paths[0].elevation});
    std::vector<Correlation> corr(el_line.size());
    std::vector<std::complex<double>> scan(static_cast<size_t>(delays.count));

    std::printf("threads: %d, repetitions: %d, %d elements x %d frequencies\n", omp_get_max_threads(), reps,
                sel.size(), grid.n_points);
    std::printf("%-28s %12s %12s %9s\n", "kernel", "serial [ms]", "omp [ms]", "speedup");

    row("angle scan (elevation line)",
        time_best(reps, [&] { angle_scan(mf, z, el_line, corr, Exec::serial); }),
        time_best(reps, [&] { angle_scan(mf, z, el_line, corr, Exec::parallel); }));
    row("delay scan (full grid)", time_best(reps, [&] { delay_scan(y, table, 1, scan, Exec::serial); }),
        time_best(reps, [&] { delay_scan(y, table, 1, scan, Exec::parallel); }));
    row("joint coarse scan",
        time_best(reps, [&] { (void)joint_scan(mf, data.matrix, coarse_dirs, table, 4, Exec::serial); }),
        time_best(reps, [&] { (void)joint_scan(mf, data.matrix, coarse_dirs, table, 4, Exec::parallel); }));
    row("run_sage (L=3)", time_best(1, [&] { (void)run_sage(data, geom, cfg, Exec::serial); }),
        time_best(1, [&] { (void)run_sage(data, geom, cfg, Exec::parallel); }));
    return 0;
}
