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

// Nearest-donor infill of nodata cells.
//
// Distances are between cell centers. When several donors tie for nearest,
// their values are averaged; the tied donors are summed in ascending
// row-major index order and the mean is clamped to the tied donors' range,
// so the result does not depend on how donors were discovered.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "heights/detail/parallel.hpp"
#include "heights/error.hpp"
#include "heights/grid.hpp"

namespace heights::gapfill {

using grid::ElevationGrid;
using grid::GridSpec;

// Unlimited when empty.
using MaxDistance = std::optional<double>;

// Mean of the donors at the given row-major indices, which must be sorted.
inline double donor_mean(const ElevationGrid& g, const std::vector<std::size_t>& donors) {
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (auto i : donors) {
        const double v = g.value(i);
        sum += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return std::clamp(sum / static_cast<double>(donors.size()), lo, hi);
}

namespace detail {

inline constexpr std::int64_t kFar = std::numeric_limits<std::int64_t>::max() / 4;

// 1-D squared distance transform (lower envelope of parabolas) over the
// finite entries of f. Exact for integer inputs of this magnitude.
inline void distance_1d(const std::vector<std::int64_t>& f, std::vector<std::int64_t>& d,
                        std::vector<std::int64_t>& v, std::vector<double>& z) {
    const auto n = static_cast<std::int64_t>(f.size());
    std::int64_t k = -1;
    for (std::int64_t q = 0; q < n; ++q) {
        if (f[q] >= kFar)
            continue;
        const double fq = static_cast<double>(f[q] + q * q);
        while (k >= 0) {
            const auto p = v[k];
            const double s = (fq - static_cast<double>(f[p] + p * p)) / static_cast<double>(2 * (q - p));
            if (s <= z[k]) {
                --k;
                continue;
            }
            ++k;
            v[k] = q;
            z[k] = s;
            break;
        }
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -std::numeric_limits<double>::infinity();
        }
    }
    if (k < 0) {
        std::fill(d.begin(), d.end(), kFar);
        return;
    }
    std::int64_t j = 0;
    for (std::int64_t q = 0; q < n; ++q) {
        while (j < k && z[j + 1] < static_cast<double>(q))
            ++j;
        const auto p = v[j];
        d[q] = (q - p) * (q - p) + f[p];
    }
}

// Squared distance, in cell units, from every cell to its nearest valid cell.
inline std::vector<std::int64_t> squared_distance_transform(const ElevationGrid& g) {
    const auto& spec = g.spec();
    const std::size_t nc = spec.ncols, nr = spec.nrows;
    std::vector<std::int64_t> dist(spec.size(), kFar);
    const std::size_t longest = std::max(nc, nr);
    std::vector<std::int64_t> f(longest), d(longest), v(longest);
    std::vector<double> z(longest);

    f.resize(nr);
    d.resize(nr);
    for (std::size_t c = 0; c < nc; ++c) {
        for (std::size_t r = 0; r < nr; ++r)
            f[r] = g.valid(c, r) ? 0 : kFar;
        distance_1d(f, d, v, z);
        for (std::size_t r = 0; r < nr; ++r)
            dist[spec.index(c, r)] = d[r];
    }
    f.resize(nc);
    d.resize(nc);
    for (std::size_t r = 0; r < nr; ++r) {
        for (std::size_t c = 0; c < nc; ++c)
            f[c] = dist[spec.index(c, r)];
        distance_1d(f, d, v, z);
        for (std::size_t c = 0; c < nc; ++c)
            dist[spec.index(c, r)] = d[c];
    }
    return dist;
}

inline std::int64_t isqrt(std::int64_t n) {
    auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
    while (r * r > n)
        --r;
    while ((r + 1) * (r + 1) <= n)
        ++r;
    return r;
}

inline bool within(std::int64_t squared_cells, double cell_size, const MaxDistance& max_distance) {
    if (!max_distance)
        return true;
    return std::sqrt(static_cast<double>(squared_cells)) * cell_size <= *max_distance;
}

inline void require_donor(const ElevationGrid& g) {
    if (g.valid_count() == 0)
        throw Error(ErrorCode::AllNoData, "grid has no valid cell to fill from");
}

} // namespace detail

// Fills each nodata cell from its nearest valid cell(s). Cells farther than
// max_distance (meters, center to center) from every donor stay nodata.
inline ElevationGrid fill_nearest(const ElevationGrid& g, const MaxDistance& max_distance = std::nullopt,
                                  unsigned threads = 1) {
    detail::require_donor(g);
    if (max_distance && !(*max_distance >= 0.0))
        throw Error(ErrorCode::InvalidArgument, "max fill distance must be non-negative");

    const auto& spec = g.spec();
    const auto dist = detail::squared_distance_transform(g);
    ElevationGrid out = g;

    const auto nc = static_cast<std::int64_t>(spec.ncols);
    const auto nr = static_cast<std::int64_t>(spec.nrows);

    heights::detail::parallel_chunks(spec.nrows, threads, [&](std::size_t row_begin, std::size_t row_end, std::size_t) {
        std::vector<std::size_t> donors;
        for (auto row = static_cast<std::int64_t>(row_begin); row < static_cast<std::int64_t>(row_end); ++row) {
            for (std::int64_t col = 0; col < nc; ++col) {
                const auto i = spec.index(static_cast<std::size_t>(col), static_cast<std::size_t>(row));
                if (g.valid(i))
                    continue;
                const auto d2 = dist[i];
                if (d2 >= detail::kFar || !detail::within(d2, spec.cell_size, max_distance))
                    continue;

                // Every lattice offset with dc^2 + dr^2 == d2: walk a <= b with
                // a^2 + b^2 == d2 by two pointers, then take all sign/axis swaps.
                donors.clear();
                auto consider = [&](std::int64_t dc, std::int64_t dr) {
                    const auto c = col + dc, r = row + dr;
                    if (c < 0 || c >= nc || r < 0 || r >= nr)
                        return;
                    const auto k = spec.index(static_cast<std::size_t>(c), static_cast<std::size_t>(r));
                    if (g.valid(k))
                        donors.push_back(k);
                };
                std::int64_t a = 0, b = detail::isqrt(d2);
                while (a <= b) {
                    const auto sum = a * a + b * b;
                    if (sum < d2) {
                        ++a;
                    } else if (sum > d2) {
                        --b;
                    } else {
                        for (const auto sa : {a, -a})
                            for (const auto sb : {b, -b}) {
                                consider(sa, sb);
                                consider(sb, sa);
                            }
                        ++a;
                        --b;
                    }
                }
                std::sort(donors.begin(), donors.end());
                donors.erase(std::unique(donors.begin(), donors.end()), donors.end());
                // Rows are disjoint across workers, so writes never collide.
                out.set(i, donor_mean(g, donors));
            }
        }
    });
    return out;
}

// Fills each nodata cell with the mean of its k nearest valid cells; every
// donor tied with the k-th distance is included.
inline ElevationGrid fill_knn_mean(const ElevationGrid& g, std::size_t k, unsigned threads = 1) {
    if (k == 0)
        throw Error(ErrorCode::InvalidArgument, "k must be positive");
    detail::require_donor(g);
    const auto available = g.valid_count();
    if (available < k)
        throw Error(ErrorCode::InsufficientDonors,
                    "k = " + std::to_string(k) + " but only " + std::to_string(available) + " valid cells");

    const auto& spec = g.spec();
    ElevationGrid out = g;
    const auto nc = static_cast<std::int64_t>(spec.ncols);
    const auto nr = static_cast<std::int64_t>(spec.nrows);
    const auto max_ring = std::max(nc, nr);

    heights::detail::parallel_chunks(spec.nrows, threads, [&](std::size_t row_begin, std::size_t row_end, std::size_t) {
        std::vector<std::pair<std::int64_t, std::size_t>> found; // (squared distance, index)
        std::vector<std::int64_t> order;
        std::vector<std::size_t> donors;
        for (auto row = static_cast<std::int64_t>(row_begin); row < static_cast<std::int64_t>(row_end); ++row) {
            for (std::int64_t col = 0; col < nc; ++col) {
                const auto i = spec.index(static_cast<std::size_t>(col), static_cast<std::size_t>(row));
                if (g.valid(i))
                    continue;
                found.clear();
                auto visit = [&](std::int64_t c, std::int64_t r) {
                    if (c < 0 || c >= nc || r < 0 || r >= nr)
                        return;
                    const auto k2 = spec.index(static_cast<std::size_t>(c), static_cast<std::size_t>(r));
                    if (g.valid(k2))
                        found.emplace_back((c - col) * (c - col) + (r - row) * (r - row), k2);
                };
                // Square rings of growing Chebyshev radius. Cells beyond ring
                // `ring` are at squared distance >= (ring + 1)^2.
                for (std::int64_t ring = 1; ring <= max_ring; ++ring) {
                    for (std::int64_t c = col - ring; c <= col + ring; ++c) {
                        visit(c, row - ring);
                        visit(c, row + ring);
                    }
                    for (std::int64_t r = row - ring + 1; r <= row + ring - 1; ++r) {
                        visit(col - ring, r);
                        visit(col + ring, r);
                    }
                    if (found.size() >= k) {
                        order.clear();
                        for (const auto& f : found)
                            order.push_back(f.first);
                        std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1), order.end());
                        if (order[k - 1] < (ring + 1) * (ring + 1))
                            break;
                    }
                }
                std::int64_t kth = 0;
                {
                    order.clear();
                    for (const auto& f : found)
                        order.push_back(f.first);
                    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1), order.end());
                    kth = order[k - 1];
                }
                donors.clear();
                for (const auto& [d2, idx] : found)
                    if (d2 <= kth)
                        donors.push_back(idx);
                std::sort(donors.begin(), donors.end());
                out.set(i, donor_mean(g, donors));
            }
        }
    });
    return out;
}

} // namespace heights::gapfill
