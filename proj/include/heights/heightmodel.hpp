// Copyright (c) 2026 The heights authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>

#include "heights/error.hpp"
#include "heights/grid.hpp"

namespace heights::heightmodel {

using grid::ElevationGrid;

struct NdsmResult {
    ElevationGrid surface;
    // Cells where object < ground. Clamped to 0 when clamping is on,
    // passed through otherwise; counted either way.
    std::size_t negative_cells = 0;
    bool clamped = true;
};

// Above-ground height: object surface minus filled ground, per cell. A cell
// is nodata when either input is nodata there.
inline NdsmResult ndsm(const ElevationGrid& object_surface, const ElevationGrid& ground_filled,
                       bool clamp_negative = true) {
    if (!(object_surface.spec() == ground_filled.spec()))
        throw Error(ErrorCode::SpecMismatch, "object and ground grids have different grid specs");

    NdsmResult result{ElevationGrid(object_surface.spec()), 0, clamp_negative};
    for (std::size_t i = 0; i < object_surface.size(); ++i) {
        if (!object_surface.valid(i) || !ground_filled.valid(i))
            continue;
        double h = object_surface.value(i) - ground_filled.value(i);
        if (h < 0.0) {
            ++result.negative_cells;
            if (clamp_negative)
                h = 0.0;
        }
        result.surface.set(i, h);
    }
    return result;
}

} // namespace heights::heightmodel
