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

// Georeferenced elevation rasters and point binning.
//
// Cell (col, row) covers [x0 + col*s, x0 + (col+1)*s) x [y0 + row*s, y0 + (row+1)*s);
// row 0 is the southernmost row. Values are meters.

#pragma once

#include <bitset>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "heights/detail/compensated_sum.hpp"
#include "heights/detail/parallel.hpp"
#include "heights/error.hpp"
#include "heights/las.hpp"

namespace heights::grid {

inline constexpr double kDefaultCellSize = 0.2;

struct CellIndex {
    std::size_t col = 0;
    std::size_t row = 0;

    friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

struct GridSpec {
    double x0 = 0.0;
    double y0 = 0.0;
    double cell_size = kDefaultCellSize;
    std::size_t ncols = 1;
    std::size_t nrows = 1;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;

    void validate() const {
        if (!(std::isfinite(cell_size) && cell_size > 0.0))
            throw Error(ErrorCode::InvalidArgument, "cell size must be positive");
        if (!std::isfinite(x0) || !std::isfinite(y0))
            throw Error(ErrorCode::InvalidArgument, "grid origin must be finite");
        if (ncols == 0 || nrows == 0)
            throw Error(ErrorCode::InvalidArgument, "grid must have at least one cell");
    }

    std::size_t size() const noexcept { return ncols * nrows; }
    std::size_t index(std::size_t col, std::size_t row) const noexcept { return row * ncols + col; }
    CellIndex cell(std::size_t index) const noexcept { return {index % ncols, index / ncols}; }

    double center_x(std::size_t col) const noexcept { return x0 + (static_cast<double>(col) + 0.5) * cell_size; }
    double center_y(std::size_t row) const noexcept { return y0 + (static_cast<double>(row) + 0.5) * cell_size; }
    double max_x() const noexcept { return x0 + static_cast<double>(ncols) * cell_size; }
    double max_y() const noexcept { return y0 + static_cast<double>(nrows) * cell_size; }
    double cell_area() const noexcept { return cell_size * cell_size; }

    // Signed column/row of the cell containing a coordinate, without bounds checks.
    double col_of(double x) const noexcept { return std::floor((x - x0) / cell_size); }
    double row_of(double y) const noexcept { return std::floor((y - y0) / cell_size); }

    std::optional<CellIndex> locate(double x, double y) const noexcept {
        const double c = col_of(x);
        const double r = row_of(y);
        // Comparisons are false for NaN, which lands outside.
        if (!(c >= 0.0 && c < static_cast<double>(ncols) && r >= 0.0 && r < static_cast<double>(nrows)))
            return std::nullopt;
        return CellIndex{static_cast<std::size_t>(c), static_cast<std::size_t>(r)};
    }
};

// Single-band raster with a per-cell validity mask. Nodata cells store 0.0 so
// grids compare bit-exactly with ==.
class ElevationGrid {
public:
    ElevationGrid() = default;
    explicit ElevationGrid(GridSpec spec)
        : spec_(spec), values_(spec.size(), 0.0), valid_(spec.size(), 0) {
        spec_.validate();
    }

    const GridSpec& spec() const noexcept { return spec_; }
    std::size_t size() const noexcept { return values_.size(); }

    bool valid(std::size_t i) const noexcept { return valid_[i] != 0; }
    bool valid(std::size_t col, std::size_t row) const noexcept { return valid(spec_.index(col, row)); }
    double value(std::size_t i) const noexcept { return values_[i]; }
    double value(std::size_t col, std::size_t row) const noexcept { return value(spec_.index(col, row)); }

    std::optional<double> at(std::size_t col, std::size_t row) const noexcept {
        const auto i = spec_.index(col, row);
        return valid(i) ? std::optional<double>(values_[i]) : std::nullopt;
    }

    void set(std::size_t i, double v) {
        if (!std::isfinite(v))
            throw Error(ErrorCode::InvalidArgument, "grid values must be finite");
        values_[i] = v;
        valid_[i] = 1;
    }
    void set(std::size_t col, std::size_t row, double v) { set(spec_.index(col, row), v); }

    void clear(std::size_t i) noexcept {
        values_[i] = 0.0;
        valid_[i] = 0;
    }

    std::size_t valid_count() const noexcept {
        std::size_t n = 0;
        for (auto v : valid_)
            n += v;
        return n;
    }

    const std::vector<double>& values() const noexcept { return values_; }
    const std::vector<std::uint8_t>& validity() const noexcept { return valid_; }

    friend bool operator==(const ElevationGrid&, const ElevationGrid&) = default;

private:
    GridSpec spec_;
    std::vector<double> values_;
    std::vector<std::uint8_t> valid_;
};

// Set of classification codes.
class ClassSet {
public:
    ClassSet() = default;
    ClassSet(std::initializer_list<int> codes) {
        for (int c : codes)
            insert(c);
    }

    void insert(int code) {
        if (code < 0 || code > 255)
            throw Error(ErrorCode::InvalidArgument, "classification code out of range: " + std::to_string(code));
        bits_.set(static_cast<std::size_t>(code));
    }
    bool contains(int code) const noexcept { return code >= 0 && code < 256 && bits_.test(static_cast<std::size_t>(code)); }
    bool empty() const noexcept { return bits_.none(); }
    bool intersects(const ClassSet& other) const noexcept { return (bits_ & other.bits_).any(); }

    std::vector<int> codes() const {
        std::vector<int> out;
        for (int c = 0; c < 256; ++c)
            if (contains(c))
                out.push_back(c);
        return out;
    }

    friend bool operator==(const ClassSet&, const ClassSet&) = default;

private:
    std::bitset<256> bits_;
};

// ASPRS codes.
namespace classes {
inline constexpr int kGround = 2;
inline constexpr int kHighVegetation = 5;
inline constexpr int kBuilding = 6;
inline constexpr int kWire = 14;
} // namespace classes

enum class Reducer { Max, Min, Mean };

inline std::string_view to_string(Reducer r) {
    switch (r) {
    case Reducer::Max: return "max";
    case Reducer::Min: return "min";
    case Reducer::Mean: return "mean";
    }
    return "?";
}

inline Reducer parse_reducer(std::string_view s) {
    if (s == "max")
        return Reducer::Max;
    if (s == "min")
        return Reducer::Min;
    if (s == "mean")
        return Reducer::Mean;
    throw Error(ErrorCode::InvalidArgument, "unknown reducer '" + std::string(s) + "'");
}

// Smallest grid, origin snapped down to a multiple of cell_size, whose
// half-open cells contain every point.
inline GridSpec grid_bounds(std::span<const las::PointRecord> points, double cell_size) {
    if (!(std::isfinite(cell_size) && cell_size > 0.0))
        throw Error(ErrorCode::InvalidArgument, "cell size must be positive");
    if (points.empty())
        throw Error(ErrorCode::EmptyInput, "no points to bound");

    double min_x = std::numeric_limits<double>::infinity(), min_y = min_x;
    double max_x = -min_x, max_y = -min_x;
    for (const auto& p : points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            continue;
        min_x = std::min(min_x, p.x);
        min_y = std::min(min_y, p.y);
        max_x = std::max(max_x, p.x);
        max_y = std::max(max_y, p.y);
    }
    if (!std::isfinite(min_x))
        throw Error(ErrorCode::EmptyInput, "no point has finite coordinates");

    GridSpec spec;
    spec.cell_size = cell_size;
    spec.x0 = std::floor(min_x / cell_size) * cell_size;
    spec.y0 = std::floor(min_y / cell_size) * cell_size;
    // Rounding in the snap can leave the minimum just below the origin.
    while (spec.col_of(min_x) < 0.0)
        spec.x0 -= cell_size;
    while (spec.row_of(min_y) < 0.0)
        spec.y0 -= cell_size;
    spec.ncols = static_cast<std::size_t>(spec.col_of(max_x)) + 1;
    spec.nrows = static_cast<std::size_t>(spec.row_of(max_y)) + 1;
    return spec;
}

struct RasterizeResult {
    ElevationGrid grid;
    std::vector<std::uint32_t> counts; // in-class points per cell
    std::size_t in_class = 0;
    std::size_t out_of_extent = 0;
};

namespace detail {

struct Partial {
    std::vector<double> extreme;
    std::vector<heights::detail::CompensatedSum> sums;
    std::vector<std::uint32_t> counts;
    std::size_t in_class = 0;
    std::size_t out_of_extent = 0;
};

} // namespace detail

// Reduces z of in-class points per cell. Points outside the extent are
// counted, not rejected. Partitions are merged in a fixed order, and the
// reducers are order-independent, so the thread count does not change the
// result beyond compensated-sum rounding for Mean.
inline RasterizeResult rasterize(std::span<const las::PointRecord> points, const GridSpec& spec,
                                 const ClassSet& classes, Reducer reducer, unsigned threads = 1) {
    spec.validate();
    if (classes.empty())
        throw Error(ErrorCode::InvalidArgument, "no classification codes requested");

    const std::size_t n = spec.size();
    const bool mean = reducer == Reducer::Mean;
    const double init = reducer == Reducer::Max ? -std::numeric_limits<double>::infinity()
                                                : std::numeric_limits<double>::infinity();

    // Partition count bounded so per-partition grids stay affordable.
    const std::size_t chunk_cap = std::max<std::size_t>(1, points.size() / 65536);
    const unsigned parts = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), chunk_cap));
    std::vector<detail::Partial> partials(parts);

    heights::detail::parallel_chunks(points.size(), parts, [&](std::size_t begin, std::size_t end, std::size_t c) {
        auto& part = partials[c];
        part.counts.assign(n, 0);
        if (mean)
            part.sums.assign(n, {});
        else
            part.extreme.assign(n, init);
        for (std::size_t i = begin; i < end; ++i) {
            const auto& p = points[i];
            if (!classes.contains(p.classification))
                continue;
            ++part.in_class;
            const auto cell = spec.locate(p.x, p.y);
            if (!cell || !std::isfinite(p.z)) {
                ++part.out_of_extent;
                continue;
            }
            const auto k = spec.index(cell->col, cell->row);
            ++part.counts[k];
            if (mean)
                part.sums[k].add(p.z);
            else if (reducer == Reducer::Max)
                part.extreme[k] = std::max(part.extreme[k], p.z);
            else
                part.extreme[k] = std::min(part.extreme[k], p.z);
        }
    });

    auto& base = partials.front();
    if (base.counts.empty()) {
        base.counts.assign(n, 0);
        base.sums.assign(mean ? n : 0, {});
        base.extreme.assign(mean ? 0 : n, init);
    }
    for (std::size_t c = 1; c < partials.size(); ++c) {
        const auto& other = partials[c];
        base.in_class += other.in_class;
        base.out_of_extent += other.out_of_extent;
        for (std::size_t k = 0; k < n; ++k) {
            if (other.counts[k] == 0)
                continue;
            base.counts[k] += other.counts[k];
            if (mean)
                base.sums[k].merge(other.sums[k]);
            else if (reducer == Reducer::Max)
                base.extreme[k] = std::max(base.extreme[k], other.extreme[k]);
            else
                base.extreme[k] = std::min(base.extreme[k], other.extreme[k]);
        }
    }

    RasterizeResult result{ElevationGrid(spec), std::move(base.counts), base.in_class, base.out_of_extent};
    for (std::size_t k = 0; k < n; ++k) {
        if (result.counts[k] == 0)
            continue;
        const double v = mean ? base.sums[k].value() / result.counts[k] : base.extreme[k];
        result.grid.set(k, v);
    }
    return result;
}

} // namespace heights::grid
