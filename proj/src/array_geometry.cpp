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

#include "mmsage/array_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Geometry>

namespace mmsage
{
    Eigen::Vector3d direction_vector(double azimuth, double elevation)
    {
        const double st = std::sin(elevation);
        return {st * std::cos(azimuth), st * std::sin(azimuth), std::cos(elevation)};
    }

    std::pair<double, double> direction_angles(const Eigen::Vector3d &v)
    {
        const double n = v.norm();
        if (!(n > 0.0))
            throw std::invalid_argument("direction_angles: zero-length vector");
        const double elevation = std::acos(std::clamp(v.z() / n, -1.0, 1.0));
        const double azimuth = wrap_azimuth(std::atan2(v.y(), v.x()));
        return {azimuth, elevation};
    }

    double wrap_azimuth(double azimuth)
    {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        double a = std::fmod(azimuth + std::numbers::pi, two_pi);
        if (a < 0.0)
            a += two_pi;
        a -= std::numbers::pi;
        return a >= std::numbers::pi ? -std::numbers::pi : a;
    }

    void PatternSpec::validate() const
    {
        if (!(exponent >= 0.0) || !std::isfinite(exponent))
            throw std::invalid_argument("PatternSpec: exponent must be finite and >= 0");
        if (!(back_lobe_floor >= 0.0 && back_lobe_floor <= 1.0))
            throw std::invalid_argument("PatternSpec: back_lobe_floor must lie in [0, 1]");
    }

    PatternSpec isotropic_pattern()
    {
        return {PatternModel::isotropic, 0.0, 1.0};
    }

    double element_amplitude(const ElementGeometry &elem, double azimuth, double elevation)
    {
        if (elem.pattern.model == PatternModel::isotropic)
            return 1.0;

        const double cos_off = direction_vector(azimuth, elevation).dot(elem.boresight);
        const double floor = elem.pattern.back_lobe_floor;
        if (cos_off <= 0.0)
            return floor;
        const double amp = std::pow(std::min(cos_off, 1.0), 0.5 * elem.pattern.exponent);
        return std::max(amp, floor);
    }

    std::complex<double> element_gain(const ElementGeometry &elem, double azimuth, double elevation)
    {
        return {element_amplitude(elem, azimuth, elevation), 0.0};
    }

    ArrayGeometry::ArrayGeometry(std::vector<ElementGeometry> elements, double carrier_frequency, int n_columns,
                                 int n_rows, double radius, double vertical_spacing, double first_column_azimuth)
        : elements_(std::move(elements)), carrier_(carrier_frequency), n_columns_(n_columns), n_rows_(n_rows),
          radius_(radius), vertical_spacing_(vertical_spacing), first_column_azimuth_(first_column_azimuth)
    {
        if (n_columns_ < 1 || n_rows_ < 1)
            throw std::invalid_argument("ArrayGeometry: n_columns and n_rows must be >= 1");
        if (elements_.size() != static_cast<size_t>(n_columns_) * static_cast<size_t>(n_rows_))
            throw std::invalid_argument("ArrayGeometry: element count must equal n_columns * n_rows");
    }

    double ArrayGeometry::column_azimuth(int column) const
    {
        return wrap_azimuth(first_column_azimuth_ + 2.0 * std::numbers::pi * column / n_columns_);
    }

    ArrayGeometry ArrayGeometry::rotated(double angle) const
    {
        const Eigen::Matrix3d rot = Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitZ()).toRotationMatrix();
        std::vector<ElementGeometry> out = elements_;
        for (auto &e : out)
        {
            e.position = rot * e.position;
            e.boresight = rot * e.boresight;
        }
        return ArrayGeometry(std::move(out), carrier_, n_columns_, n_rows_, radius_, vertical_spacing_,
                             first_column_azimuth_ + angle);
    }

    ArrayGeometry build_cylindrical_array(int n_columns, int n_rows, double radius, double vertical_spacing,
                                          double carrier, const PatternSpec &pattern, double first_column_azimuth)
    {
        if (n_columns < 1 || n_rows < 1)
            throw std::invalid_argument("build_cylindrical_array: n_columns and n_rows must be >= 1");
        if (!(radius > 0.0) || !(vertical_spacing > 0.0) || !(carrier > 0.0))
            throw std::invalid_argument("build_cylindrical_array: radius, vertical_spacing and carrier must be > 0");
        pattern.validate();

        std::vector<ElementGeometry> elements;
        elements.reserve(static_cast<size_t>(n_columns) * static_cast<size_t>(n_rows));
        const double z0 = -0.5 * (n_rows - 1) * vertical_spacing;
        for (int col = 0; col < n_columns; ++col)
        {
            const double az = first_column_azimuth + 2.0 * std::numbers::pi * col / n_columns;
            const Eigen::Vector3d outward(std::cos(az), std::sin(az), 0.0);
            for (int row = 0; row < n_rows; ++row)
            {
                ElementGeometry e;
                e.position = radius * outward + Eigen::Vector3d(0.0, 0.0, z0 + row * vertical_spacing);
                e.boresight = outward;
                e.pattern = pattern;
                elements.push_back(e);
            }
        }
        return ArrayGeometry(std::move(elements), carrier, n_columns, n_rows, radius, vertical_spacing,
                             first_column_azimuth);
    }

    double radius_for_chord(int n_columns, double chord)
    {
        if (n_columns < 2)
            throw std::invalid_argument("radius_for_chord: need at least two columns");
        return chord / (2.0 * std::sin(std::numbers::pi / n_columns));
    }

    double ArrayConfig::resolved_radius() const
    {
        if (radius > 0.0)
            return radius;
        const double half_lambda = 0.5 * speed_of_light / carrier_frequency;
        return n_columns >= 2 ? radius_for_chord(n_columns, half_lambda) : half_lambda;
    }

    double ArrayConfig::resolved_vertical_spacing() const
    {
        return vertical_spacing > 0.0 ? vertical_spacing : 0.5 * speed_of_light / carrier_frequency;
    }

    ArrayGeometry ArrayConfig::build() const
    {
        if (!(carrier_frequency > 0.0))
            throw std::invalid_argument("ArrayConfig: carrier_frequency must be > 0");
        return build_cylindrical_array(n_columns, n_rows, resolved_radius(), resolved_vertical_spacing(),
                                       carrier_frequency, pattern);
    }

    ArrayGeometry default_array()
    {
        return ArrayConfig{}.build();
    }

    // ---- Subarray selection --------------------------------------------------------------------

    namespace
    {
        struct SchemeLabel
        {
            std::string operator()(const ColumnScheme &s) const
            {
                return "columns(" + std::to_string(s.n_cols) + "," + std::to_string(s.rotation_offset) + ")";
            }
            std::string operator()(const RowScheme &s) const
            {
                return "rows(" + std::to_string(s.n_rows_selected) + "," + std::to_string(s.offset) + ")";
            }
            std::string operator()(const ExplicitScheme &s) const
            {
                return "explicit(" + std::to_string(s.indices.size()) + ")";
            }
        };
    }

    std::string scheme_label(const SelectionScheme &scheme)
    {
        return std::visit(SchemeLabel{}, scheme);
    }

    std::string SubarraySelection::label() const
    {
        return scheme_label(scheme);
    }

    SubarraySelection select_subarray(const ArrayGeometry &geom, const SelectionScheme &scheme)
    {
        SubarraySelection sel{scheme, {}};
        const int n_columns = geom.n_columns();
        const int n_rows = geom.n_rows();

        if (const auto *cs = std::get_if<ColumnScheme>(&scheme))
        {
            if (cs->n_cols < 1 || n_columns % cs->n_cols != 0)
                throw std::invalid_argument("select_subarray: n_cols must divide the column count");
            const int stride = n_columns / cs->n_cols;
            if (cs->rotation_offset < 0 || cs->rotation_offset >= stride)
                throw std::invalid_argument("select_subarray: rotation_offset out of range");
            for (int j = 0; j < cs->n_cols; ++j)
                for (int row = 0; row < n_rows; ++row)
                    sel.indices.push_back(geom.index(cs->rotation_offset + j * stride, row));
        }
        else if (const auto *rs = std::get_if<RowScheme>(&scheme))
        {
            if (rs->n_rows_selected < 1 || rs->offset < 0 || rs->offset + rs->n_rows_selected > n_rows)
                throw std::invalid_argument("select_subarray: row range out of bounds");
            for (int col = 0; col < n_columns; ++col)
                for (int row = rs->offset; row < rs->offset + rs->n_rows_selected; ++row)
                    sel.indices.push_back(geom.index(col, row));
        }
        else
        {
            const auto &idx = std::get<ExplicitScheme>(scheme).indices;
            std::vector<bool> seen(static_cast<size_t>(geom.size()), false);
            for (int i : idx)
            {
                if (i < 0 || i >= geom.size())
                    throw std::invalid_argument("select_subarray: element index out of range");
                if (seen[static_cast<size_t>(i)])
                    throw std::invalid_argument("select_subarray: duplicate element index");
                seen[static_cast<size_t>(i)] = true;
            }
            sel.indices = idx;
        }
        return sel;
    }

    std::vector<SubarraySelection> enumerate_rotations(const ArrayGeometry &geom, int n_cols)
    {
        if (n_cols < 1 || geom.n_columns() % n_cols != 0)
            throw std::invalid_argument("enumerate_rotations: n_cols must divide the column count");
        const int n_rot = geom.n_columns() / n_cols;
        std::vector<SubarraySelection> out;
        out.reserve(static_cast<size_t>(n_rot));
        for (int r = 0; r < n_rot; ++r)
            out.push_back(select_subarray(geom, ColumnScheme{n_cols, r}));
        return out;
    }

    Eigen::VectorXcd steering_vector(const ArrayGeometry &geom, const SubarraySelection &sel, double azimuth,
                                     double elevation, double frequency)
    {
        if (!(frequency > 0.0))
            throw std::invalid_argument("steering_vector: frequency must be > 0");
        const Eigen::Vector3d k = direction_vector(azimuth, elevation);
        const double wavenumber = 2.0 * std::numbers::pi * frequency / speed_of_light;
        Eigen::VectorXcd a(sel.size());
        for (int m = 0; m < sel.size(); ++m)
        {
            const auto &e = geom.element(sel.indices[static_cast<size_t>(m)]);
            a[m] = std::polar(element_amplitude(e, azimuth, elevation), wavenumber * k.dot(e.position));
        }
        return a;
    }
}
