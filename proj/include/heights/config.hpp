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

// Pipeline configuration: flat key=value text, '#' comments.
//
//   cell_size = 0.2
//   ground_classes = 2
//   object_classes = 5,6,14
//   dsm_reducer = max
//   dtm_reducer = min
//   fill = nearest            # or knn
//   knn_k = 4
//   max_fill_distance = unlimited
//   clamp_negative = true
//   iou_threshold = 0.5
//   units = feet
//   coverage_min = 0.1

#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "heights/error.hpp"
#include "heights/gapfill.hpp"
#include "heights/grid.hpp"
#include "heights/masks.hpp"
#include "heights/zonal.hpp"

namespace heights {

enum class FillMethod { Nearest, Knn };

struct PipelineConfig {
    double cell_size = grid::kDefaultCellSize;
    grid::ClassSet ground_classes{grid::classes::kGround};
    grid::ClassSet object_classes{grid::classes::kHighVegetation, grid::classes::kBuilding, grid::classes::kWire};
    grid::Reducer dsm_reducer = grid::Reducer::Max;
    grid::Reducer dtm_reducer = grid::Reducer::Min;
    FillMethod fill = FillMethod::Nearest;
    std::size_t knn_k = 4;
    gapfill::MaxDistance max_fill_distance; // unlimited
    bool clamp_negative = true;
    double iou_threshold = masks::kDefaultIouThreshold;
    zonal::Units units = zonal::Units::Feet;
    double coverage_min = zonal::kDefaultCoverageMin;

    void validate() const {
        auto fail = [](const std::string& m) { throw Error(ErrorCode::Config, m); };
        if (!(std::isfinite(cell_size) && cell_size > 0.0))
            fail("cell_size must be a positive number");
        if (ground_classes.empty())
            fail("ground_classes must not be empty");
        if (object_classes.empty())
            fail("object_classes must not be empty");
        if (ground_classes.intersects(object_classes))
            fail("ground_classes and object_classes must be disjoint");
        if (fill == FillMethod::Knn && knn_k == 0)
            fail("knn_k must be positive");
        if (max_fill_distance && !(std::isfinite(*max_fill_distance) && *max_fill_distance > 0.0))
            fail("max_fill_distance must be positive or 'unlimited'");
        if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
            fail("iou_threshold must lie in (0, 1]");
        if (!(coverage_min >= 0.0 && coverage_min <= 1.0))
            fail("coverage_min must lie in [0, 1]");
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_number(std::string_view key, std::string_view v) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out))
        throw Error(ErrorCode::Config, std::string(key) + ": '" + std::string(v) + "' is not a number");
    return out;
}

inline grid::ClassSet parse_classes(std::string_view key, std::string_view v) {
    grid::ClassSet set;
    while (!v.empty()) {
        const auto comma = v.find(',');
        const auto item = trim(v.substr(0, comma));
        int code = -1;
        auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), code);
        if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size() || code < 0 || code > 255)
            throw Error(ErrorCode::Config, std::string(key) + ": '" + std::string(item) + "' is not a class code 0-255");
        set.insert(code);
        if (comma == std::string_view::npos)
            break;
        v.remove_prefix(comma + 1);
    }
    return set;
}

inline bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "on" || v == "yes" || v == "1")
        return true;
    if (v == "false" || v == "off" || v == "no" || v == "0")
        return false;
    throw Error(ErrorCode::Config, std::string(key) + ": '" + std::string(v) + "' is not a boolean");
}

} // namespace detail

// Applies one key=value setting. Unknown keys are errors.
inline void apply_setting(PipelineConfig& config, std::string_view key, std::string_view value) {
    using namespace detail;
    key = trim(key);
    value = trim(value);
    try {
        if (key == "cell_size")
            config.cell_size = parse_number(key, value);
        else if (key == "ground_classes")
            config.ground_classes = parse_classes(key, value);
        else if (key == "object_classes")
            config.object_classes = parse_classes(key, value);
        else if (key == "dsm_reducer")
            config.dsm_reducer = grid::parse_reducer(value);
        else if (key == "dtm_reducer")
            config.dtm_reducer = grid::parse_reducer(value);
        else if (key == "fill") {
            if (value == "nearest")
                config.fill = FillMethod::Nearest;
            else if (value == "knn")
                config.fill = FillMethod::Knn;
            else
                throw Error(ErrorCode::Config, "fill: expected nearest or knn");
        } else if (key == "knn_k") {
            const double k = parse_number(key, value);
            if (k < 1 || k != std::floor(k))
                throw Error(ErrorCode::Config, "knn_k must be a positive integer");
            config.knn_k = static_cast<std::size_t>(k);
        } else if (key == "max_fill_distance") {
            if (value == "unlimited")
                config.max_fill_distance.reset();
            else
                config.max_fill_distance = parse_number(key, value);
        } else if (key == "clamp_negative")
            config.clamp_negative = parse_bool(key, value);
        else if (key == "iou_threshold")
            config.iou_threshold = parse_number(key, value);
        else if (key == "units")
            config.units = zonal::parse_units(value);
        else if (key == "coverage_min")
            config.coverage_min = parse_number(key, value);
        else
            throw Error(ErrorCode::Config, "unknown key '" + std::string(key) + "'");
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Config)
            throw;
        throw Error(ErrorCode::Config, std::string(key) + ": " + e.message());
    }
}

inline PipelineConfig parse_config(std::string_view text, PipelineConfig config = {}) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        const auto body = detail::trim(std::string_view(line).substr(0, hash));
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorCode::Config, "line " + std::to_string(number) + ": expected key=value");
        try {
            apply_setting(config, body.substr(0, eq), body.substr(eq + 1));
        } catch (const Error& e) {
            throw Error(ErrorCode::Config, "line " + std::to_string(number) + ": " + e.message());
        }
    }
    return config;
}

inline PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig config = {}) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Config, "cannot open config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    try {
        return parse_config(text.str(), config);
    } catch (const Error& e) {
        throw with_context(e, path.string());
    }
}

} // namespace heights
