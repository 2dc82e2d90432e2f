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

// Per-object height table: above-ground min/max/mean from the nDSM, ground
// elevation, footprint area, polygon perimeter and centroid.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "heights/detail/compensated_sum.hpp"
#include "heights/detail/parallel.hpp"
#include "heights/error.hpp"
#include "heights/geometry.hpp"
#include "heights/grid.hpp"
#include "heights/masks.hpp"

namespace heights::zonal {

using grid::ElevationGrid;
using masks::CellSet;
using masks::ObjectMask;

inline constexpr double kFeetPerMeter = 3.28084;
inline constexpr double kDefaultCoverageMin = 0.1;

enum class Units { Meters, Feet };

inline std::string_view to_string(Units u) { return u == Units::Feet ? "feet" : "meters"; }

inline Units parse_units(std::string_view s) {
    if (s == "feet" || s == "ft")
        return Units::Feet;
    if (s == "meters" || s == "m")
        return Units::Meters;
    throw Error(ErrorCode::InvalidArgument, "unknown unit '" + std::string(s) + "' (meters|feet)");
}

inline double convert(double meters, Units units) {
    return units == Units::Feet ? meters * kFeetPerMeter : meters;
}

struct ObjectHeightRecord {
    std::string id;
    std::string label;
    // Above ground, output units.
    double height_min = 0.0;
    double height_max = 0.0;
    double height_mean = 0.0;
    // Above the vertical datum, output units.
    double elev_ground_mean = 0.0;
    double area_m2 = 0.0;
    double perimeter_m = 0.0;
    geometry::Point centroid;
    std::size_t cell_count = 0;
    double coverage = 0.0;
    Units units = Units::Feet;

    friend bool operator==(const ObjectHeightRecord&, const ObjectHeightRecord&) = default;
};

// Statistics over the valid nDSM cells of the mask footprint. Throws
// EmptyObject when the footprint holds no valid cell.
inline ObjectHeightRecord object_stats(const ElevationGrid& surface, const ElevationGrid& ground,
                                       const ObjectMask& mask, const CellSet& cells, Units units = Units::Feet) {
    if (!(surface.spec() == ground.spec()) || !(surface.spec() == cells.spec))
        throw Error(ErrorCode::SpecMismatch, "surface, ground and footprint must share one grid");

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double ground_lo = lo, ground_hi = hi;
    detail::CompensatedSum height_sum, ground_sum;
    std::size_t valid = 0, ground_valid = 0;
    for (auto i : cells.cells) {
        if (!surface.valid(i))
            continue;
        const double h = surface.value(i);
        lo = std::min(lo, h);
        hi = std::max(hi, h);
        height_sum.add(h);
        ++valid;
        if (ground.valid(i)) {
            const double g = ground.value(i);
            ground_sum.add(g);
            ground_lo = std::min(ground_lo, g);
            ground_hi = std::max(ground_hi, g);
            ++ground_valid;
        }
    }
    if (valid == 0)
        throw Error(ErrorCode::EmptyObject, "mask '" + mask.id + "' covers no valid height cell");

    ObjectHeightRecord r;
    r.id = mask.id;
    r.label = mask.label;
    r.units = units;
    const double mean = std::clamp(height_sum.value() / static_cast<double>(valid), lo, hi);
    r.height_min = convert(lo, units);
    r.height_max = convert(hi, units);
    r.height_mean = convert(mean, units);
    r.elev_ground_mean =
        ground_valid == 0
            ? std::numeric_limits<double>::quiet_NaN()
            : convert(std::clamp(ground_sum.value() / static_cast<double>(ground_valid), ground_lo, ground_hi), units);
    r.cell_count = cells.size();
    r.area_m2 = static_cast<double>(r.cell_count) * surface.spec().cell_area();
    r.perimeter_m = geometry::perimeter(mask.polygon);
    r.centroid = geometry::centroid(mask.polygon);
    r.coverage = static_cast<double>(valid) / static_cast<double>(cells.size());
    return r;
}

enum class DiagnosticKind { DuplicateId, EmptyObject, LowCoverage };

inline std::string_view to_string(DiagnosticKind k) {
    switch (k) {
    case DiagnosticKind::DuplicateId: return "DuplicateId";
    case DiagnosticKind::EmptyObject: return "EmptyObject";
    case DiagnosticKind::LowCoverage: return "LowCoverage";
    }
    return "?";
}

struct Diagnostic {
    std::string id;
    DiagnosticKind kind;
    std::string message;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

struct TableOptions {
    Units units = Units::Feet;
    // Objects whose valid-cell fraction is below this are skipped.
    double coverage_min = kDefaultCoverageMin;
    unsigned threads = 1;
};

struct Table {
    std::vector<ObjectHeightRecord> records; // ordered by id
    std::vector<Diagnostic> diagnostics;     // in mask input order
    // Masks after duplicate-id renaming, as used for the records.
    std::vector<ObjectMask> masks;
};

// Gives later occurrences of a repeated id a "_dupN" suffix (N = 2, 3, ...),
// skipping any suffix already taken.
inline std::vector<ObjectMask> dedupe_ids(std::vector<ObjectMask> masks, std::vector<Diagnostic>& diagnostics) {
    std::set<std::string> taken;
    for (const auto& m : masks)
        taken.insert(m.id);
    std::set<std::string> seen;
    for (auto& m : masks) {
        if (seen.insert(m.id).second)
            continue;
        std::string renamed;
        for (int n = 2;; ++n) {
            renamed = m.id + "_dup" + std::to_string(n);
            if (!taken.count(renamed))
                break;
        }
        diagnostics.push_back({m.id, DiagnosticKind::DuplicateId, "duplicate id renamed to '" + renamed + "'"});
        m.id = renamed;
        taken.insert(renamed);
        seen.insert(renamed);
    }
    return masks;
}

inline Table build_table(const ElevationGrid& surface, const ElevationGrid& ground, std::vector<ObjectMask> masks,
                         const TableOptions& options = {}) {
    if (!(surface.spec() == ground.spec()))
        throw Error(ErrorCode::SpecMismatch, "surface and ground grids differ");

    Table table;
    table.masks = dedupe_ids(std::move(masks), table.diagnostics);

    const auto n = table.masks.size();
    std::vector<std::optional<ObjectHeightRecord>> rows(n);
    std::vector<std::optional<Diagnostic>> skipped(n);
    heights::detail::parallel_chunks(n, options.threads, [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto& m = table.masks[i];
            const auto cells = masks::rasterize_mask(m, surface.spec());
            try {
                auto r = object_stats(surface, ground, m, cells, options.units);
                if (r.coverage < options.coverage_min) {
                    skipped[i] = Diagnostic{m.id, DiagnosticKind::LowCoverage,
                                            "coverage " + std::to_string(r.coverage) + " below minimum " +
                                                std::to_string(options.coverage_min)};
                    continue;
                }
                rows[i] = std::move(r);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::EmptyObject)
                    throw;
                skipped[i] = Diagnostic{m.id, DiagnosticKind::EmptyObject, e.what()};
            }
        }
    });

    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i])
            table.records.push_back(std::move(*rows[i]));
        if (skipped[i])
            table.diagnostics.push_back(std::move(*skipped[i]));
    }
    std::sort(table.records.begin(), table.records.end(),
              [](const ObjectHeightRecord& a, const ObjectHeightRecord& b) { return a.id < b.id; });
    return table;
}

} // namespace heights::zonal
