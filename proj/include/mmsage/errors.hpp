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

#include <stdexcept>
#include <string>

namespace mmsage
{
    // Invalid arguments are reported with std::invalid_argument. The remaining
    // failure kinds get their own types so callers can tell them apart.

    /// Input carries no usable signal (e.g. an all-zero channel matrix).
    struct degenerate_input : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    /// A required item (e.g. a LOS path) is missing.
    struct not_found : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    /// A brute-force search grid exceeds its configured point budget.
    struct cap_exceeded : std::length_error
    {
        using std::length_error::length_error;
    };

    /// File read/write failure; the message carries the path.
    struct io_error : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };
}
