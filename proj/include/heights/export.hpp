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

// Plain-text outputs: the object table as CSV and GeoJSON, and grids as
// ESRI ASCII. Output bytes depend only on the input values.

#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "heights/error.hpp"
#include "heights/grid.hpp"
#include "heights/masks.hpp"
#include "heights/zonal.hpp"

namespace heights::io {

inline constexpr std::string_view kCsvHeader =
    "id,label,centroid_x,centroid_y,area_m2,perimeter_m,height_min,height_max,height_mean,elev_ground_mean,units,"
    "cell_count,coverage";
inline constexpr int kTableDigits = 4;
inline constexpr int kGridDigits = 3;
inline constexpr std::string_view kAscNodata = "-9999";

// Fixed-point decimal with the given fractional digits; negative zero prints
// without a sign and non-finite values print empty.
inline std::string fixed(double v, int digits) {
    if (!std::isfinite(v))
        return {};
    std::array<char, 512> buf;
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, digits);
    if (ec != std::errc{})
        throw Error(ErrorCode::InvalidArgument, "value too large to format");
    std::string s(buf.data(), end);
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos)
        s.erase(0, 1);
    return s;
}

// Shortest fixed-notation decimal that reads back to the same double.
inline std::string shortest(double v) {
    std::array<char, 512> buf;
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed);
    if (ec != std::errc{})
        throw Error(ErrorCode::InvalidArgument, "value too large to format");
    return std::string(buf.data(), end);
}

// RFC 4180 field quoting.
inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos)
        return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

// Table columns as formatted text, in header order. Both CSV and GeoJSON are
// derived from these strings so they carry identical values.
inline std::vector<std::string> record_fields(const zonal::ObjectHeightRecord& r) {
    return {r.id,
            r.label,
            fixed(r.centroid.x, kTableDigits),
            fixed(r.centroid.y, kTableDigits),
            fixed(r.area_m2, kTableDigits),
            fixed(r.perimeter_m, kTableDigits),
            fixed(r.height_min, kTableDigits),
            fixed(r.height_max, kTableDigits),
            fixed(r.height_mean, kTableDigits),
            fixed(r.elev_ground_mean, kTableDigits),
            std::string(zonal::to_string(r.units)),
            std::to_string(r.cell_count),
            fixed(r.coverage, kTableDigits)};
}

inline std::vector<std::string> column_names() {
    std::vector<std::string> names;
    std::string_view rest = kCsvHeader;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        names.emplace_back(rest.substr(0, comma));
        if (comma == std::string_view::npos)
            break;
        rest.remove_prefix(comma + 1);
    }
    return names;
}

inline std::string table_csv(const std::vector<zonal::ObjectHeightRecord>& records) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& r : records) {
        const auto fields = record_fields(r);
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i)
                out += ',';
            out += csv_field(fields[i]);
        }
        out += '\n';
    }
    return out;
}

// Writes to a sibling temporary file and renames it over the target.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(ErrorCode::Io, "cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out)
            throw Error(ErrorCode::Io, "write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorCode::Io, "cannot move output into place: " + path.string());
    }
}

inline void write_table_csv(const std::vector<zonal::ObjectHeightRecord>& records, const std::filesystem::path& path) {
    write_file_atomic(path, table_csv(records));
}

// One Feature per record; geometry is the mask polygon with the same id and
// properties are the CSV columns.
inline std::string table_geojson(const std::vector<zonal::ObjectHeightRecord>& records,
                                 const std::vector<masks::ObjectMask>& object_masks) {
    std::map<std::string, const masks::ObjectMask*> by_id;
    for (const auto& m : object_masks)
        by_id.emplace(m.id, &m);

    const auto names = column_names();
    nlohmann::ordered_json doc;
    doc["type"] = "FeatureCollection";
    auto features = nlohmann::ordered_json::array();
    for (const auto& r : records) {
        const auto it = by_id.find(r.id);
        if (it == by_id.end())
            throw Error(ErrorCode::MissingGeometry, "no mask polygon for record '" + r.id + "'");
        const auto fields = record_fields(r);
        nlohmann::ordered_json props = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < names.size(); ++i) {
            const auto& name = names[i];
            if (name == "id" || name == "label" || name == "units") {
                props[name] = fields[i];
            } else if (name == "cell_count") {
                props[name] = r.cell_count;
            } else {
                double v = 0.0;
                const auto& f = fields[i];
                auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
                if (ec != std::errc{} || !std::isfinite(v))
                    props[name] = nullptr;
                else
                    props[name] = v;
            }
        }
        nlohmann::ordered_json feature;
        feature["type"] = "Feature";
        feature["properties"] = std::move(props);
        feature["geometry"] = masks::polygon_json(it->second->polygon);
        features.push_back(std::move(feature));
    }
    doc["features"] = std::move(features);
    return doc.dump(1) + "\n";
}

inline void write_table_geojson(const std::vector<zonal::ObjectHeightRecord>& records,
                                const std::vector<masks::ObjectMask>& object_masks, const std::filesystem::path& path) {
    write_file_atomic(path, table_geojson(records, object_masks));
}

// ESRI ASCII grid, rows north to south.
inline std::string grid_asc(const grid::ElevationGrid& g) {
    const auto& s = g.spec();
    std::string out;
    out += "ncols " + std::to_string(s.ncols) + "\n";
    out += "nrows " + std::to_string(s.nrows) + "\n";
    out += "xllcorner " + shortest(s.x0) + "\n";
    out += "yllcorner " + shortest(s.y0) + "\n";
    out += "cellsize " + shortest(s.cell_size) + "\n";
    out += "NODATA_value " + std::string(kAscNodata) + "\n";
    for (std::size_t r = s.nrows; r-- > 0;) {
        for (std::size_t c = 0; c < s.ncols; ++c) {
            if (c)
                out += ' ';
            const auto i = s.index(c, r);
            out += g.valid(i) ? fixed(g.value(i), kGridDigits) : std::string(kAscNodata);
        }
        out += '\n';
    }
    return out;
}

inline void write_grid_asc(const grid::ElevationGrid& g, const std::filesystem::path& path) {
    write_file_atomic(path, grid_asc(g));
}

} // namespace heights::io
