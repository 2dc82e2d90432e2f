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

// Object masks from an external segmentation step: loading, raster
// footprints and multi-resolution ensembling.
//
// Masks arrive as a GeoJSON FeatureCollection of Polygon features in world
// (CRS meter) coordinates with properties id, label, confidence and
// source_resolution_m.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "heights/error.hpp"
#include "heights/geometry.hpp"
#include "heights/grid.hpp"

namespace heights::masks {

using geometry::Point;
using geometry::Polygon;
using geometry::Ring;
using grid::GridSpec;

inline constexpr double kDefaultIouThreshold = 0.5;

struct ObjectMask {
    std::string id;
    std::string label;
    Polygon polygon;
    double confidence = 1.0;
    double source_resolution_m = 0.0;

    friend bool operator==(const ObjectMask&, const ObjectMask&) = default;
};

// Raster footprint of a mask: sorted, unique row-major cell indices.
struct CellSet {
    GridSpec spec;
    std::vector<std::size_t> cells;

    std::size_t size() const noexcept { return cells.size(); }
    bool empty() const noexcept { return cells.empty(); }
    bool contains(std::size_t index) const { return std::binary_search(cells.begin(), cells.end(), index); }
};

inline std::optional<std::string> mask_problem(const ObjectMask& m) {
    if (m.id.empty())
        return "empty id";
    if (auto why = geometry::ring_problem(m.polygon.exterior))
        return "exterior " + *why;
    for (std::size_t i = 0; i < m.polygon.holes.size(); ++i)
        if (auto why = geometry::ring_problem(m.polygon.holes[i]))
            return "interior ring " + std::to_string(i + 1) + ": " + *why;
    const geometry::Polygon shell{m.polygon.exterior, {}};
    for (std::size_t i = 0; i < m.polygon.holes.size(); ++i)
        for (const auto& p : m.polygon.holes[i])
            if (!geometry::contains(shell, p.x, p.y))
                return "interior ring " + std::to_string(i + 1) + " is not inside the exterior";
    if (!(geometry::area(m.polygon) > 0.0))
        return "polygon area is not positive";
    if (!(m.confidence >= 0.0 && m.confidence <= 1.0))
        return "confidence outside [0, 1]";
    if (!(std::isfinite(m.source_resolution_m) && m.source_resolution_m >= 0.0))
        return "source_resolution_m must be a non-negative number";
    return std::nullopt;
}

struct MaskRejection {
    std::string id; // feature index as "#N" when the id itself is unusable
    std::string reason;
};

struct LoadedMasks {
    std::vector<ObjectMask> masks;
    std::vector<MaskRejection> rejected;
};

struct LoadOptions {
    // When off, missing confidence defaults to 1 and missing
    // source_resolution_m to 0. Used to re-read exported object tables.
    bool require_mask_properties = true;
};

namespace detail {

inline Ring parse_ring(const nlohmann::json& coords) {
    if (!coords.is_array())
        throw std::invalid_argument("ring is not an array");
    Ring ring;
    ring.reserve(coords.size());
    for (const auto& c : coords) {
        if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number())
            throw std::invalid_argument("vertex is not a [x, y] number pair");
        ring.push_back({c[0].get<double>(), c[1].get<double>()});
    }
    return ring;
}

inline nlohmann::ordered_json ring_json(const Ring& ring) {
    auto out = nlohmann::ordered_json::array();
    for (const auto& p : ring)
        out.push_back({p.x, p.y});
    return out;
}

} // namespace detail

inline nlohmann::ordered_json polygon_json(const Polygon& poly) {
    nlohmann::ordered_json geometry;
    geometry["type"] = "Polygon";
    auto rings = nlohmann::ordered_json::array();
    rings.push_back(detail::ring_json(poly.exterior));
    for (const auto& h : poly.holes)
        rings.push_back(detail::ring_json(h));
    geometry["coordinates"] = std::move(rings);
    return geometry;
}

// Parses a mask FeatureCollection. A malformed document throws ParseError;
// individual invalid features are reported in `rejected` and skipped.
inline LoadedMasks parse_masks(std::string_view text, const LoadOptions& options = {}) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection")
        throw Error(ErrorCode::ParseError, "document is not a GeoJSON FeatureCollection");
    if (!doc.contains("features") || !doc["features"].is_array())
        throw Error(ErrorCode::ParseError, "FeatureCollection has no features array");

    LoadedMasks out;
    std::size_t index = 0;
    for (const auto& feature : doc["features"]) {
        ++index;
        std::string tag = "#" + std::to_string(index);
        try {
            if (!feature.is_object())
                throw std::invalid_argument("feature is not an object");
            const auto props = feature.value("properties", nlohmann::json::object());
            if (!props.is_object())
                throw std::invalid_argument("properties is not an object");
            if (props.contains("id") && props["id"].is_string())
                tag = props["id"].get<std::string>();

            ObjectMask m;
            if (!props.contains("id") || !props["id"].is_string())
                throw std::invalid_argument("property 'id' must be a string");
            m.id = props["id"].get<std::string>();
            if (!props.contains("label") || !props["label"].is_string())
                throw std::invalid_argument("property 'label' must be a string");
            m.label = props["label"].get<std::string>();

            auto number = [&](const char* key, double fallback) {
                if (props.contains(key) && props[key].is_number())
                    return props[key].get<double>();
                if (options.require_mask_properties || props.contains(key))
                    throw std::invalid_argument(std::string("property '") + key + "' must be a number");
                return fallback;
            };
            m.confidence = number("confidence", 1.0);
            m.source_resolution_m = number("source_resolution_m", 0.0);

            if (!feature.contains("geometry") || !feature["geometry"].is_object())
                throw std::invalid_argument("feature has no geometry");
            const auto& geom = feature["geometry"];
            if (geom.value("type", "") != "Polygon")
                throw std::invalid_argument("geometry type must be Polygon");
            if (!geom.contains("coordinates") || !geom["coordinates"].is_array() || geom["coordinates"].empty())
                throw std::invalid_argument("polygon has no rings");
            const auto& rings = geom["coordinates"];
            m.polygon.exterior = detail::parse_ring(rings[0]);
            for (std::size_t r = 1; r < rings.size(); ++r)
                m.polygon.holes.push_back(detail::parse_ring(rings[r]));

            if (auto why = mask_problem(m))
                throw std::invalid_argument(*why);
            out.masks.push_back(std::move(m));
        } catch (const std::invalid_argument& e) {
            out.rejected.push_back({tag, e.what()});
        } catch (const nlohmann::json::exception& e) {
            out.rejected.push_back({tag, e.what()});
        }
    }
    return out;
}

inline LoadedMasks load_masks(const std::filesystem::path& path, const LoadOptions& options = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open mask file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    try {
        return parse_masks(text.str(), options);
    } catch (const Error& e) {
        throw with_context(e, path.string());
    }
}

inline std::string masks_to_geojson(const std::vector<ObjectMask>& masks) {
    nlohmann::ordered_json doc;
    doc["type"] = "FeatureCollection";
    auto features = nlohmann::ordered_json::array();
    for (const auto& m : masks) {
        nlohmann::ordered_json f;
        f["type"] = "Feature";
        f["properties"] = {{"id", m.id},
                           {"label", m.label},
                           {"confidence", m.confidence},
                           {"source_resolution_m", m.source_resolution_m}};
        f["geometry"] = polygon_json(m.polygon);
        features.push_back(std::move(f));
    }
    doc["features"] = std::move(features);
    return doc.dump(1) + "\n";
}

// Cells whose center lies inside the polygon (even-odd over all rings).
inline CellSet rasterize_mask(const ObjectMask& mask, const GridSpec& spec) {
    spec.validate();
    CellSet out{spec, {}};
    const auto& poly = mask.polygon;
    if (poly.exterior.size() < 4)
        return out;
    auto box = geometry::bounds(poly.exterior);
    for (const auto& h : poly.holes) {
        if (h.empty())
            continue;
        const auto hb = geometry::bounds(h);
        box.min_y = std::min(box.min_y, hb.min_y);
        box.max_y = std::max(box.max_y, hb.max_y);
    }

    const double first_row = std::max(0.0, spec.row_of(box.min_y) - 1.0);
    const double last_row = std::min(static_cast<double>(spec.nrows) - 1.0, spec.row_of(box.max_y) + 1.0);
    std::vector<double> xs;
    for (double rr = first_row; rr <= last_row; rr += 1.0) {
        const auto row = static_cast<std::size_t>(rr);
        const double y = spec.center_y(row);
        xs.clear();
        auto collect = [&](const Ring& ring) {
            for (std::size_t i = 0; i + 1 < ring.size(); ++i)
                if (geometry::straddles(ring[i], ring[i + 1], y))
                    xs.push_back(geometry::crossing_x(ring[i], ring[i + 1], y));
        };
        collect(poly.exterior);
        for (const auto& h : poly.holes)
            collect(h);
        std::sort(xs.begin(), xs.end());
        // A center x is inside iff an odd number of crossings lie strictly to
        // its right, i.e. xs[2k] <= x < xs[2k+1].
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
            const double lo = xs[k], hi = xs[k + 1];
            double c = std::max(0.0, std::floor((lo - spec.x0) / spec.cell_size - 0.5));
            while (c > 0.0 && spec.center_x(static_cast<std::size_t>(c - 1.0)) >= lo)
                c -= 1.0;
            for (; c < static_cast<double>(spec.ncols); c += 1.0) {
                const double x = spec.center_x(static_cast<std::size_t>(c));
                if (x < lo)
                    continue;
                if (!(x < hi))
                    break;
                out.cells.push_back(spec.index(static_cast<std::size_t>(c), row));
            }
        }
    }
    std::sort(out.cells.begin(), out.cells.end());
    out.cells.erase(std::unique(out.cells.begin(), out.cells.end()), out.cells.end());
    return out;
}

inline std::size_t intersection_size(const CellSet& a, const CellSet& b) {
    std::size_t n = 0;
    auto i = a.cells.begin(), j = b.cells.begin();
    while (i != a.cells.end() && j != b.cells.end()) {
        if (*i < *j)
            ++i;
        else if (*j < *i)
            ++j;
        else {
            ++n;
            ++i;
            ++j;
        }
    }
    return n;
}

// Intersection over union of two footprints on the same grid; 0 when both are empty.
inline double iou(const CellSet& a, const CellSet& b) {
    if (!(a.spec == b.spec))
        throw Error(ErrorCode::SpecMismatch, "cell sets come from different grids");
    const auto inter = intersection_size(a, b);
    const auto uni = a.size() + b.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Total order used to rank masks before greedy acceptance: higher
// confidence, then finer source resolution, then id. Label and vertices
// break the remaining ties so the order never depends on input order.
inline bool merge_precedes(const ObjectMask& a, const ObjectMask& b) {
    if (a.confidence != b.confidence)
        return a.confidence > b.confidence;
    if (a.source_resolution_m != b.source_resolution_m)
        return a.source_resolution_m < b.source_resolution_m;
    if (a.id != b.id)
        return a.id < b.id;
    if (a.label != b.label)
        return a.label < b.label;
    return std::tie(a.polygon.exterior, a.polygon.holes) < std::tie(b.polygon.exterior, b.polygon.holes);
}

struct MergeResult {
    std::vector<ObjectMask> accepted;
    std::size_t dropped = 0;
};

// Greedy deduplication across mask sets produced at different imagery
// resolutions. A mask is accepted iff its raster IoU with every accepted mask
// of the same label is below the threshold. Output is in acceptance order.
inline MergeResult ensemble_merge(const std::vector<std::vector<ObjectMask>>& mask_sets, const GridSpec& spec,
                                  double iou_threshold = kDefaultIouThreshold) {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "IoU threshold must lie in (0, 1]");
    spec.validate();

    std::vector<const ObjectMask*> all;
    for (const auto& set : mask_sets)
        for (const auto& m : set)
            all.push_back(&m);
    std::sort(all.begin(), all.end(), [](const ObjectMask* a, const ObjectMask* b) { return merge_precedes(*a, *b); });

    MergeResult result;
    std::vector<CellSet> accepted_cells;
    for (const auto* m : all) {
        auto cells = rasterize_mask(*m, spec);
        bool keep = true;
        for (std::size_t i = 0; i < result.accepted.size(); ++i) {
            if (result.accepted[i].label != m->label)
                continue;
            if (iou(cells, accepted_cells[i]) >= iou_threshold) {
                keep = false;
                break;
            }
        }
        if (keep) {
            result.accepted.push_back(*m);
            accepted_cells.push_back(std::move(cells));
        } else {
            ++result.dropped;
        }
    }
    return result;
}

// Grid covering every mask vertex, for merging masks without a point cloud.
inline GridSpec mask_grid(const std::vector<std::vector<ObjectMask>>& mask_sets, double cell_size) {
    std::vector<las::PointRecord> corners;
    for (const auto& set : mask_sets)
        for (const auto& m : set) {
            const auto b = geometry::bounds(m.polygon.exterior);
            las::PointRecord lo, hi;
            lo.x = b.min_x;
            lo.y = b.min_y;
            hi.x = b.max_x;
            hi.y = b.max_y;
            corners.push_back(lo);
            corners.push_back(hi);
        }
    return grid::grid_bounds(corners, cell_size);
}

} // namespace heights::masks
