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

#include <iosfwd>
#include <string>

#include "mmsage/channel_synth.hpp"

namespace mmsage
{
    // Binary snapshot container (little-endian, 64-bit floats). Layout, in order:
    //
    //   char[8]   magic "MMSGCH01"
    //   u32       n_rows, u32 n_points
    //   f64       grid start [Hz], f64 grid stop [Hz]
    //   u32       scheme kind (0 columns, 1 rows, 2 explicit), i32 param0, i32 param1
    //   i32[n_rows]            element indices
    //   f64[2 * n_rows * n_points]  interleaved re/im, row-major (element-major)
    //   u32       truth path count (0xFFFFFFFF: no truth recorded)
    //   per path: f64 delay, f64 azimuth, f64 elevation, f64 gain re, f64 gain im, u32 label
    //
    // For explicit schemes param0/param1 are zero; the index list carries the selection.

    inline constexpr char channel_magic[8] = {'M', 'M', 'S', 'G', 'C', 'H', '0', '1'};

    void write_channel(std::ostream &os, const ChannelData &data);
    ChannelData read_channel(std::istream &is);

    void save_channel(const ChannelData &data, const std::string &path);
    ChannelData load_channel(const std::string &path);
}
