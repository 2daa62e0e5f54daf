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

#include "mmsage/channel_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "mmsage/errors.hpp"

static_assert(std::endian::native == std::endian::little, "channel files assume a little-endian host");

namespace mmsage
{
    namespace
    {
        constexpr std::uint32_t no_truth = 0xFFFFFFFFu;

        template <typename T>
        void put(std::ostream &os, T v)
        {
            os.write(reinterpret_cast<const char *>(&v), sizeof(T));
        }

        template <typename T>
        T get(std::istream &is)
        {
            T v{};
            if (!is.read(reinterpret_cast<char *>(&v), sizeof(T)))
                throw io_error("channel file truncated");
            return v;
        }
    }

    void write_channel(std::ostream &os, const ChannelData &data)
    {
        data.validate();
        os.write(channel_magic, sizeof(channel_magic));
        put<std::uint32_t>(os, static_cast<std::uint32_t>(data.matrix.rows()));
        put<std::uint32_t>(os, static_cast<std::uint32_t>(data.matrix.cols()));
        put<double>(os, data.grid.start);
        put<double>(os, data.grid.stop);

        std::uint32_t kind = 2;
        std::int32_t p0 = 0, p1 = 0;
        if (const auto *c = std::get_if<ColumnScheme>(&data.selection.scheme))
        {
            kind = 0;
            p0 = c->n_cols;
            p1 = c->rotation_offset;
        }
        else if (const auto *r = std::get_if<RowScheme>(&data.selection.scheme))
        {
            kind = 1;
            p0 = r->n_rows_selected;
            p1 = r->offset;
        }
        put(os, kind);
        put(os, p0);
        put(os, p1);
        for (int idx : data.selection.indices)
            put<std::int32_t>(os, idx);

        for (Eigen::Index m = 0; m < data.matrix.rows(); ++m)
            for (Eigen::Index k = 0; k < data.matrix.cols(); ++k)
            {
                put<double>(os, data.matrix(m, k).real());
                put<double>(os, data.matrix(m, k).imag());
            }

        if (!data.truth)
        {
            put(os, no_truth);
        }
        else
        {
            put<std::uint32_t>(os, static_cast<std::uint32_t>(data.truth->size()));
            for (const auto &p : *data.truth)
            {
                put(os, p.delay);
                put(os, p.azimuth);
                put(os, p.elevation);
                put(os, p.gain.real());
                put(os, p.gain.imag());
                put<std::uint32_t>(os, static_cast<std::uint32_t>(p.label));
            }
        }
        if (!os)
            throw io_error("channel write failed");
    }

    ChannelData read_channel(std::istream &is)
    {
        char magic[8];
        if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, channel_magic, sizeof(magic)) != 0)
            throw io_error("not an mmsage channel file (bad magic)");

        ChannelData data;
        const auto n_rows = get<std::uint32_t>(is);
        const auto n_points = get<std::uint32_t>(is);
        data.grid.start = get<double>(is);
        data.grid.stop = get<double>(is);
        data.grid.n_points = static_cast<int>(n_points);

        const auto kind = get<std::uint32_t>(is);
        const auto p0 = get<std::int32_t>(is);
        const auto p1 = get<std::int32_t>(is);
        std::vector<int> indices(n_rows);
        for (auto &i : indices)
            i = get<std::int32_t>(is);
        switch (kind)
        {
        case 0:
            data.selection.scheme = ColumnScheme{p0, p1};
            break;
        case 1:
            data.selection.scheme = RowScheme{p0, p1};
            break;
        case 2:
            data.selection.scheme = ExplicitScheme{indices};
            break;
        default:
            throw io_error("channel file: unknown selection kind");
        }
        data.selection.indices = std::move(indices);

        data.matrix.resize(n_rows, n_points);
        for (std::uint32_t m = 0; m < n_rows; ++m)
            for (std::uint32_t k = 0; k < n_points; ++k)
            {
                const double re = get<double>(is);
                const double im = get<double>(is);
                data.matrix(m, k) = {re, im};
            }

        const auto n_truth = get<std::uint32_t>(is);
        if (n_truth != no_truth)
        {
            std::vector<PathParams> truth(n_truth);
            for (auto &p : truth)
            {
                p.delay = get<double>(is);
                p.azimuth = get<double>(is);
                p.elevation = get<double>(is);
                const double re = get<double>(is);
                const double im = get<double>(is);
                p.gain = {re, im};
                const auto label = get<std::uint32_t>(is);
                if (label > static_cast<std::uint32_t>(PathLabel::other))
                    throw io_error("channel file: bad path label");
                p.label = static_cast<PathLabel>(label);
            }
            data.truth = std::move(truth);
        }

        try
        {
            data.validate();
        }
        catch (const std::invalid_argument &e)
        {
            throw io_error(std::string("channel file: ") + e.what());
        }
        return data;
    }

    void save_channel(const ChannelData &data, const std::string &path)
    {
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw io_error("cannot open '" + path + "' for writing");
        try
        {
            write_channel(f, data);
        }
        catch (const io_error &e)
        {
            throw io_error("'" + path + "': " + e.what());
        }
    }

    ChannelData load_channel(const std::string &path)
    {
        std::ifstream f(path, std::ios::binary);
        if (!f)
            throw io_error("cannot open '" + path + "'");
        try
        {
            return read_channel(f);
        }
        catch (const io_error &e)
        {
            throw io_error("'" + path + "': " + e.what());
        }
    }
}
