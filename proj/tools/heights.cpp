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

// heights: object height table from classified LiDAR and segmentation masks.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#if __has_include("CLI11.hpp")
#include "CLI11.hpp"
#else
#include <CLI/CLI.hpp>
#endif

#include "heights.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<double> cell_size;
    std::optional<std::string> units;
    std::optional<double> iou_threshold;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path, "key=value configuration file");
    cmd->add_option("--cell-size", opts.cell_size, "grid cell size in meters (default 0.2)");
    cmd->add_option("--units", opts.units, "output height units: feet|meters (default feet)");
    cmd->add_option("--iou-threshold", opts.iou_threshold, "mask ensemble IoU threshold (default 0.5)");
}

// Config file first, then flags; validated before any input is read.
heights::PipelineConfig resolve_config(const CommonOptions& opts) {
    heights::PipelineConfig config;
    if (!opts.config_path.empty())
        config = heights::load_config(opts.config_path);
    if (opts.cell_size)
        config.cell_size = *opts.cell_size;
    if (opts.units)
        heights::apply_setting(config, "units", *opts.units);
    if (opts.iou_threshold)
        config.iou_threshold = *opts.iou_threshold;
    config.validate();
    return config;
}

std::vector<fs::path> to_paths(const std::vector<std::string>& names) {
    return {names.begin(), names.end()};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Per-object heights from classified LiDAR and segmentation masks"};
    app.require_subcommand(1);

    CommonOptions common;
    std::vector<std::string> las_files;
    std::vector<std::string> mask_files;
    std::string out = ".";

    auto* run = app.add_subcommand("run", "full pipeline: rasters, object table and report");
    add_common(run, common);
    run->add_option("--las", las_files, "LAS (or .xyz text) point files")->required()->expected(1, -1);
    run->add_option("--masks", mask_files, "mask GeoJSON files, one per imagery resolution")->required()->expected(1, -1);
    run->add_option("--out", out, "output directory");

    std::vector<CLI::App*> stages;
    for (const char* name : {"dsm", "dtm", "ndsm"}) {
        auto* stage = app.add_subcommand(name, std::string("write the ") + name + " stage rasters");
        add_common(stage, common);
        stage->add_option("--las", las_files, "LAS (or .xyz text) point files")->required()->expected(1, -1);
        stage->add_option("--out", out, "output directory");
        stages.push_back(stage);
    }

    std::string merged_out = "masks.merged.geojson";
    auto* merge = app.add_subcommand("merge-masks", "deduplicate mask sets from several resolutions");
    add_common(merge, common);
    merge->add_option("--masks", mask_files, "mask GeoJSON files")->required()->expected(1, -1);
    merge->add_option("--las", las_files, "point files defining the grid (default: mask extent)")->expected(1, -1);
    merge->add_option("--out", merged_out, "merged mask GeoJSON path");

    auto* validate = app.add_subcommand("validate", "parse inputs and print a JSON report");
    add_common(validate, common);
    validate->add_option("--las", las_files, "point files")->expected(1, -1);
    validate->add_option("--masks", mask_files, "mask GeoJSON files")->expected(1, -1);

    CLI11_PARSE(app, argc, argv);

    try {
        const auto config = resolve_config(common);

        if (run->parsed()) {
            const auto result = heights::run_pipeline(config, to_paths(las_files), to_paths(mask_files), out);
            std::cerr << "wrote " << result.table.records.size() << " objects to " << (fs::path(out) / "table.csv").string()
                      << "\n";
            return 0;
        }

        for (auto* stage : stages) {
            if (!stage->parsed())
                continue;
            const auto cloud = heights::load_points(to_paths(las_files));
            const auto s = heights::build_surfaces(cloud.points, config);
            fs::create_directories(out);
            const std::string name = stage->get_name();
            if (name == "dsm") {
                heights::write_stage(out, heights::artifacts::kDsm, s.dsm.grid);
            } else if (name == "dtm") {
                heights::write_stage(out, heights::artifacts::kDtm, s.dtm.grid);
                heights::write_stage(out, heights::artifacts::kDtmFilled, s.dtm_filled);
            } else {
                heights::write_stage(out, heights::artifacts::kNdsm, s.ndsm.surface);
            }
            return 0;
        }

        if (merge->parsed()) {
            std::vector<std::vector<heights::masks::ObjectMask>> sets;
            for (const auto& path : mask_files) {
                auto loaded = heights::masks::load_masks(path);
                for (const auto& r : loaded.rejected)
                    std::cerr << path << ": rejected " << r.id << ": " << r.reason << "\n";
                sets.push_back(std::move(loaded.masks));
            }
            const auto spec = las_files.empty()
                                  ? heights::masks::mask_grid(sets, config.cell_size)
                                  : heights::grid::grid_bounds(heights::load_points(to_paths(las_files)).points,
                                                               config.cell_size);
            const auto merged = heights::masks::ensemble_merge(sets, spec, config.iou_threshold);
            heights::io::write_file_atomic(merged_out, heights::masks::masks_to_geojson(merged.accepted));
            std::cerr << "kept " << merged.accepted.size() << " masks, dropped " << merged.dropped << "\n";
            return 0;
        }

        if (validate->parsed()) {
            nlohmann::ordered_json report;
            bool ok = true;
            auto points = nlohmann::ordered_json::array();
            for (const auto& path : las_files) {
                try {
                    const auto pts = heights::las::read_point_file(path);
                    points.push_back({{"path", path}, {"points", pts.size()}});
                } catch (const heights::Error& e) {
                    ok = false;
                    points.push_back({{"path", path}, {"error", e.what()}});
                }
            }
            auto mask_inputs = nlohmann::ordered_json::array();
            for (const auto& path : mask_files) {
                try {
                    const auto loaded = heights::masks::load_masks(path);
                    auto rejected = nlohmann::ordered_json::array();
                    for (const auto& r : loaded.rejected)
                        rejected.push_back({{"id", r.id}, {"reason", r.reason}});
                    ok = ok && loaded.rejected.empty();
                    mask_inputs.push_back({{"path", path}, {"loaded", loaded.masks.size()}, {"rejected", rejected}});
                } catch (const heights::Error& e) {
                    ok = false;
                    mask_inputs.push_back({{"path", path}, {"error", e.what()}});
                }
            }
            report["point_inputs"] = std::move(points);
            report["mask_inputs"] = std::move(mask_inputs);
            report["ok"] = ok;
            std::cout << report.dump(2) << "\n";
            return ok ? 0 : 1;
        }
    } catch (const heights::Error& e) {
        std::cerr << "heights: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "heights: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
