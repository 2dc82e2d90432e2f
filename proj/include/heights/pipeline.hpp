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

// End-to-end object height pipeline:
//
//   points -> DSM (object classes) and DTM (ground classes)
//          -> gap-filled DTM -> nDSM = DSM - filled DTM
//   masks  -> (ensemble merge across mask files) -> per-object table
//
// Each stage is exposed separately so the CLI stage commands and the full
// run produce identical artifacts.

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "heights/config.hpp"
#include "heights/detail/parallel.hpp"
#include "heights/error.hpp"
#include "heights/export.hpp"
#include "heights/gapfill.hpp"
#include "heights/grid.hpp"
#include "heights/heightmodel.hpp"
#include "heights/las.hpp"
#include "heights/masks.hpp"
#include "heights/zonal.hpp"

namespace heights {

namespace artifacts {
inline constexpr const char* kTableCsv = "table.csv";
inline constexpr const char* kTableGeojson = "table.geojson";
inline constexpr const char* kDsm = "dsm.asc";
inline constexpr const char* kDtm = "dtm.asc";
inline constexpr const char* kDtmFilled = "dtm_filled.asc";
inline constexpr const char* kNdsm = "ndsm.asc";
inline constexpr const char* kReport = "run.report.json";
} // namespace artifacts

struct PointInput {
    std::string path;
    std::size_t points = 0;
};

struct PointCloud {
    std::vector<las::PointRecord> points;
    std::vector<PointInput> inputs;
};

inline PointCloud load_points(const std::vector<std::filesystem::path>& paths) {
    if (paths.empty())
        throw Error(ErrorCode::EmptyInput, "no point files given");
    PointCloud cloud;
    for (const auto& path : paths) {
        try {
            auto pts = las::read_point_file(path);
            cloud.inputs.push_back({path.string(), pts.size()});
            cloud.points.insert(cloud.points.end(), pts.begin(), pts.end());
        } catch (const Error& e) {
            throw with_context(e, path.string());
        }
    }
    return cloud;
}

struct Surfaces {
    grid::GridSpec spec;
    grid::RasterizeResult dsm;
    grid::RasterizeResult dtm;
    grid::ElevationGrid dtm_filled;
    heightmodel::NdsmResult ndsm;
};

inline unsigned worker_threads() { return detail::default_threads(); }

inline Surfaces build_surfaces(const std::vector<las::PointRecord>& points, const PipelineConfig& config) {
    const unsigned threads = worker_threads();
    Surfaces s;
    s.spec = grid::grid_bounds(points, config.cell_size);
    s.dsm = grid::rasterize(points, s.spec, config.object_classes, config.dsm_reducer, threads);
    s.dtm = grid::rasterize(points, s.spec, config.ground_classes, config.dtm_reducer, threads);
    try {
        s.dtm_filled = config.fill == FillMethod::Nearest
                           ? gapfill::fill_nearest(s.dtm.grid, config.max_fill_distance, threads)
                           : gapfill::fill_knn_mean(s.dtm.grid, config.knn_k, threads);
    } catch (const Error& e) {
        throw with_context(e, "ground infill");
    }
    s.ndsm = heightmodel::ndsm(s.dsm.grid, s.dtm_filled, config.clamp_negative);
    return s;
}

struct MaskInput {
    std::string path;
    std::size_t loaded = 0;
    std::vector<masks::MaskRejection> rejected;
};

struct MaskSelection {
    std::vector<masks::ObjectMask> masks;
    std::vector<MaskInput> inputs;
    bool ensembled = false;
    std::size_t dropped = 0;
};

// Loads every mask file; with more than one file the sets are merged by the
// resolution ensemble, a single file is taken as-is.
inline MaskSelection select_masks(const std::vector<std::filesystem::path>& paths, const grid::GridSpec& spec,
                                  const PipelineConfig& config) {
    MaskSelection sel;
    std::vector<std::vector<masks::ObjectMask>> sets;
    for (const auto& path : paths) {
        auto loaded = masks::load_masks(path);
        sel.inputs.push_back({path.string(), loaded.masks.size(), std::move(loaded.rejected)});
        sets.push_back(std::move(loaded.masks));
    }
    if (sets.size() == 1) {
        sel.masks = std::move(sets.front());
    } else if (sets.size() > 1) {
        auto merged = masks::ensemble_merge(sets, spec, config.iou_threshold);
        sel.masks = std::move(merged.accepted);
        sel.dropped = merged.dropped;
        sel.ensembled = true;
    }
    return sel;
}

namespace detail {

inline nlohmann::ordered_json spec_json(const grid::GridSpec& s) {
    return {{"xllcorner", s.x0}, {"yllcorner", s.y0}, {"cellsize", s.cell_size}, {"ncols", s.ncols}, {"nrows", s.nrows}};
}

inline nlohmann::ordered_json config_json(const PipelineConfig& c) {
    nlohmann::ordered_json j;
    j["cell_size"] = c.cell_size;
    j["ground_classes"] = c.ground_classes.codes();
    j["object_classes"] = c.object_classes.codes();
    j["dsm_reducer"] = grid::to_string(c.dsm_reducer);
    j["dtm_reducer"] = grid::to_string(c.dtm_reducer);
    j["fill"] = c.fill == FillMethod::Nearest ? "nearest" : "knn";
    j["knn_k"] = c.knn_k;
    if (c.max_fill_distance)
        j["max_fill_distance"] = *c.max_fill_distance;
    else
        j["max_fill_distance"] = "unlimited";
    j["clamp_negative"] = c.clamp_negative;
    j["iou_threshold"] = c.iou_threshold;
    j["units"] = zonal::to_string(c.units);
    j["coverage_min"] = c.coverage_min;
    return j;
}

inline nlohmann::ordered_json raster_json(const grid::RasterizeResult& r) {
    return {{"in_class_points", r.in_class},
            {"out_of_extent_points", r.out_of_extent},
            {"valid_cells", r.grid.valid_count()}};
}

} // namespace detail

inline nlohmann::ordered_json surfaces_report(const Surfaces& s) {
    nlohmann::ordered_json j;
    j["grid"] = detail::spec_json(s.spec);
    j["dsm"] = detail::raster_json(s.dsm);
    j["dtm"] = detail::raster_json(s.dtm);
    const auto before = s.dtm.grid.valid_count();
    const auto after = s.dtm_filled.valid_count();
    j["fill"] = {{"filled_cells", after - before}, {"unfilled_cells", s.dtm_filled.size() - after}};
    j["ndsm"] = {{"negative_cells", s.ndsm.negative_cells},
                 {"clamped", s.ndsm.clamped},
                 {"valid_cells", s.ndsm.surface.valid_count()}};
    return j;
}

inline nlohmann::ordered_json masks_report(const MaskSelection& sel) {
    nlohmann::ordered_json j;
    auto inputs = nlohmann::ordered_json::array();
    for (const auto& in : sel.inputs) {
        auto rejected = nlohmann::ordered_json::array();
        for (const auto& r : in.rejected)
            rejected.push_back({{"id", r.id}, {"reason", r.reason}});
        inputs.push_back({{"path", in.path}, {"loaded", in.loaded}, {"rejected", std::move(rejected)}});
    }
    j["inputs"] = std::move(inputs);
    j["ensemble"] = {{"applied", sel.ensembled}, {"dropped", sel.dropped}, {"selected", sel.masks.size()}};
    return j;
}

inline void write_stage(const std::filesystem::path& out_dir, const char* name, const grid::ElevationGrid& g) {
    io::write_grid_asc(g, out_dir / name);
}

struct RunResult {
    Surfaces surfaces;
    zonal::Table table;
    nlohmann::ordered_json report;
};

// Full run. Writes every artifact into out_dir, table.csv last, so its
// presence after a successful return means the run completed.
inline RunResult run_pipeline(const PipelineConfig& config, const std::vector<std::filesystem::path>& las_paths,
                              const std::vector<std::filesystem::path>& mask_paths,
                              const std::filesystem::path& out_dir) {
    config.validate();
    if (mask_paths.empty())
        throw Error(ErrorCode::EmptyInput, "no mask files given");
    for (const auto& p : mask_paths)
        if (!std::filesystem::exists(p))
            throw Error(ErrorCode::Io, "mask file not found: " + p.string());

    // A stale table from an earlier run must not outlive a failed one.
    std::error_code ignored;
    std::filesystem::remove(out_dir / artifacts::kTableCsv, ignored);

    auto cloud = load_points(las_paths);
    RunResult run;
    run.surfaces = build_surfaces(cloud.points, config);
    auto selection = select_masks(mask_paths, run.surfaces.spec, config);

    zonal::TableOptions options;
    options.units = config.units;
    options.coverage_min = config.coverage_min;
    options.threads = worker_threads();
    run.table = zonal::build_table(run.surfaces.ndsm.surface, run.surfaces.dtm_filled, selection.masks, options);

    auto& report = run.report;
    report["config"] = detail::config_json(config);
    auto points = nlohmann::ordered_json::array();
    for (const auto& in : cloud.inputs)
        points.push_back({{"path", in.path}, {"points", in.points}});
    report["point_inputs"] = std::move(points);
    report["surfaces"] = surfaces_report(run.surfaces);
    report["masks"] = masks_report(selection);
    auto diagnostics = nlohmann::ordered_json::array();
    for (const auto& d : run.table.diagnostics)
        diagnostics.push_back({{"id", d.id}, {"kind", zonal::to_string(d.kind)}, {"message", d.message}});
    report["table"] = {{"records", run.table.records.size()}, {"diagnostics", std::move(diagnostics)}};

    std::filesystem::create_directories(out_dir);
    write_stage(out_dir, artifacts::kDsm, run.surfaces.dsm.grid);
    write_stage(out_dir, artifacts::kDtm, run.surfaces.dtm.grid);
    write_stage(out_dir, artifacts::kDtmFilled, run.surfaces.dtm_filled);
    write_stage(out_dir, artifacts::kNdsm, run.surfaces.ndsm.surface);
    io::write_table_geojson(run.table.records, run.table.masks, out_dir / artifacts::kTableGeojson);
    io::write_file_atomic(out_dir / artifacts::kReport, report.dump(2) + "\n");
    io::write_table_csv(run.table.records, out_dir / artifacts::kTableCsv);
    return run;
}

} // namespace heights
