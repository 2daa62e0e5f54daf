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

#include <complex>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace mmsage
{
    inline constexpr double speed_of_light = 299792458.0;

    inline constexpr double deg_to_rad(double deg) { return deg * (std::numbers::pi / 180.0); }
    inline constexpr double rad_to_deg(double rad) { return rad * (180.0 / std::numbers::pi); }

    // Spherical convention used throughout the library:
    //   azimuth   in [-pi, pi), measured in the x-y plane from +x (towards the transmitter)
    //   elevation in [0, pi], polar angle from +z, so pi/2 is the horizontal plane
    // The direction vector points from the array towards the source.
    Eigen::Vector3d direction_vector(double azimuth, double elevation);

    /// Inverse of direction_vector for a non-zero vector: returns {azimuth, elevation}.
    std::pair<double, double> direction_angles(const Eigen::Vector3d &v);

    /// Wraps an angle into [-pi, pi).
    double wrap_azimuth(double azimuth);

    enum class PatternModel
    {
        isotropic,
        cosine_power
    };

    /// Element amplitude pattern.
    ///
    /// For cosine_power the power pattern is cos(psi)^exponent, with psi the angle off boresight,
    /// i.e. amplitude cos(psi)^(exponent/2). The amplitude never drops below back_lobe_floor and
    /// equals the floor everywhere behind the element. exponent = 2 gives a 90 degree half-power
    /// beamwidth.
    struct PatternSpec
    {
        PatternModel model = PatternModel::cosine_power;
        double exponent = 2.0;
        double back_lobe_floor = 0.050118723362727228; // -26 dB

        void validate() const;
    };

    PatternSpec isotropic_pattern();

    struct ElementGeometry
    {
        Eigen::Vector3d position = Eigen::Vector3d::Zero();  // [m]
        Eigen::Vector3d boresight = Eigen::Vector3d::UnitX(); // unit, horizontal, radially outward
        PatternSpec pattern;
    };

    /// Real, non-negative amplitude gain of one element towards (azimuth, elevation).
    double element_amplitude(const ElementGeometry &elem, double azimuth, double elevation);

    /// Same as element_amplitude, as a complex number (the pattern carries no phase).
    std::complex<double> element_gain(const ElementGeometry &elem, double azimuth, double elevation);

    /// Cylindrical array of n_columns x n_rows elements.
    ///
    /// Elements are stored column-major: index = column * n_rows + row. Column k faces azimuth
    /// first_column_azimuth + k * 2pi / n_columns; rows are centred about z = 0.
    class ArrayGeometry
    {
    public:
        ArrayGeometry() = default;
        ArrayGeometry(std::vector<ElementGeometry> elements, double carrier_frequency, int n_columns, int n_rows,
                      double radius, double vertical_spacing, double first_column_azimuth);

        const std::vector<ElementGeometry> &elements() const { return elements_; }
        const ElementGeometry &element(int index) const { return elements_.at(static_cast<size_t>(index)); }
        int size() const { return static_cast<int>(elements_.size()); }

        double carrier_frequency() const { return carrier_; }
        int n_columns() const { return n_columns_; }
        int n_rows() const { return n_rows_; }
        double radius() const { return radius_; }
        double vertical_spacing() const { return vertical_spacing_; }
        double first_column_azimuth() const { return first_column_azimuth_; }

        int index(int column, int row) const { return column * n_rows_ + row; }
        int column_of(int index) const { return index / n_rows_; }
        int row_of(int index) const { return index % n_rows_; }
        double column_azimuth(int column) const;

        /// Copy of the array rotated by `angle` about the z axis.
        ArrayGeometry rotated(double angle) const;

    private:
        std::vector<ElementGeometry> elements_;
        double carrier_ = 0.0;
        int n_columns_ = 0;
        int n_rows_ = 0;
        double radius_ = 0.0;
        double vertical_spacing_ = 0.0;
        double first_column_azimuth_ = 0.0;
    };

    ArrayGeometry build_cylindrical_array(int n_columns, int n_rows, double radius, double vertical_spacing,
                                          double carrier, const PatternSpec &pattern,
                                          double first_column_azimuth = 0.0);

    /// Construction parameters of a cylindrical array, as stored in configuration files.
    struct ArrayConfig
    {
        int n_columns = 16;
        int n_rows = 4;
        double carrier_frequency = 3.5e9;
        double radius = 0.0;           // 0 selects the half-wavelength chord default
        double vertical_spacing = 0.0; // 0 selects lambda/2
        PatternSpec pattern;

        double resolved_radius() const;
        double resolved_vertical_spacing() const;
        ArrayGeometry build() const;
    };

    /// Radius for which adjacent columns of an n-gon are `chord` apart.
    double radius_for_chord(int n_columns, double chord);

    /// 16 x 4 half-wavelength array at 3.5 GHz with the default patch pattern.
    ArrayGeometry default_array();

    // ---- Subarray selection --------------------------------------------------------------------

    /// Uniformly spaced columns: column ids = rotation_offset + j * (n_columns / n_cols).
    struct ColumnScheme
    {
        int n_cols = 0;
        int rotation_offset = 0;
    };

    /// n_rows_selected consecutive rows starting at `offset`, all columns.
    struct RowScheme
    {
        int n_rows_selected = 0;
        int offset = 0;
    };

    struct ExplicitScheme
    {
        std::vector<int> indices;
    };

    using SelectionScheme = std::variant<ColumnScheme, RowScheme, ExplicitScheme>;

    struct SubarraySelection
    {
        SelectionScheme scheme;
        std::vector<int> indices; // ordered element indices into ArrayGeometry::elements()

        int size() const { return static_cast<int>(indices.size()); }
        std::string label() const;
    };

    std::string scheme_label(const SelectionScheme &scheme);

    SubarraySelection select_subarray(const ArrayGeometry &geom, const SelectionScheme &scheme);

    /// Every rotation offset of an n_cols column scheme; together they partition the columns.
    std::vector<SubarraySelection> enumerate_rotations(const ArrayGeometry &geom, int n_cols);

    /// Far-field steering vector of the selected elements at `frequency`, phase-referenced to
    /// the coordinate origin: a_m = g_m * exp(+j 2 pi f / c * <k, p_m>).
    Eigen::VectorXcd steering_vector(const ArrayGeometry &geom, const SubarraySelection &sel, double azimuth,
                                     double elevation, double frequency);
}
