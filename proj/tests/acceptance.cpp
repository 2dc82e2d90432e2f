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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstring>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "oracles.hpp"

using namespace heights;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
};

// Records the first failed check.
struct Check {
    Outcome out;
    void operator()(bool cond, const std::string& what) {
        if (!cond && out.ok) {
            out.ok = false;
            out.detail = what;
        }
    }
};

fs::path work_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "heights_acceptance" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

bool relative_close(double a, double b, double tol) {
    return std::fabs(a - b) <= tol * std::max(std::fabs(a), std::fabs(b));
}

// Ground at 100 m everywhere (class 2, 0.1 m spacing) plus 105 m returns
// (class 6) over the 4 m x 4 m footprint at [8, 12].
std::vector<las::PointRecord> synthetic_scene() {
    std::vector<las::PointRecord> pts;
    for (int j = 0; j < 200; ++j)
        for (int i = 0; i < 200; ++i) {
            las::PointRecord p;
            p.x = 0.05 + 0.1 * i;
            p.y = 0.05 + 0.1 * j;
            p.z = 100.0;
            p.classification = grid::classes::kGround;
            pts.push_back(p);
            if (p.x > 8.0 && p.x < 12.0 && p.y > 8.0 && p.y < 12.0) {
                p.z = 105.0;
                p.classification = grid::classes::kBuilding;
                pts.push_back(p);
            }
        }
    return pts;
}

const fs::path kMaskFixture = fs::path(HEIGHTS_FIXTURES) / "box_scene_masks.geojson";

fs::path write_scene(const fs::path& dir) {
    const auto path = dir / "scene.las";
    las::write_las(synthetic_scene(), {0.001, 0.001, 0.001}, {0, 0, 0}, path);
    return path;
}

Outcome end_to_end() {
    Check check;
    const auto dir = work_dir("e2e");
    const auto las_path = write_scene(dir);
    PipelineConfig config;
    config.units = zonal::Units::Meters;
    const auto t0 = std::chrono::steady_clock::now();
    const auto run = run_pipeline(config, {las_path}, {kMaskFixture}, dir / "out");
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    check(run.table.records.size() == 1, "expected 1 record, got " + std::to_string(run.table.records.size()));
    if (!check.out.ok)
        return check.out;
    const auto& r = run.table.records[0];
    check(r.height_mean >= 4.95 && r.height_mean <= 5.05, "height_mean " + std::to_string(r.height_mean));
    check(r.height_min >= 4.9 && r.height_min <= 5.1, "height_min " + std::to_string(r.height_min));
    check(r.height_max >= 4.9 && r.height_max <= 5.1, "height_max " + std::to_string(r.height_max));
    check(std::fabs(r.area_m2 - 16.0) <= 3.2, "area " + std::to_string(r.area_m2));
    check(seconds < 5.0, "runtime " + std::to_string(seconds) + " s");
    check.out.detail = check.out.ok ? "mean " + io::fixed(r.height_mean, 4) + " m, area " + io::fixed(r.area_m2, 2) +
                                          " m2, " + io::fixed(seconds, 2) + " s"
                                    : check.out.detail;
    return check.out;
}

Outcome gapfill_oracle() {
    Check check;
    std::mt19937_64 rng(20260101);
    std::uniform_real_distribution<double> frac(0.05, 0.9);
    for (int t = 0; t < 200 && check.out.ok; ++t) {
        const auto g = oracle::random_grid(rng, 64, frac(rng));
        const auto got = gapfill::fill_nearest(g);
        const auto want = oracle::brute_fill_nearest(g);
        bool equal = got.validity() == want.validity();
        for (std::size_t i = 0; equal && i < g.size(); ++i)
            equal = std::memcmp(&got.values()[i], &want.values()[i], sizeof(double)) == 0;
        check(equal, "grid " + std::to_string(t) + " differs from brute-force scan");
    }
    if (check.out.ok)
        check.out.detail = "200 grids bit-equal";
    return check.out;
}

Outcome zonal_oracle() {
    Check check;
    std::mt19937_64 rng(20260202);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int compared = 0;
    for (int t = 0; t < 100 && check.out.ok; ++t) {
        const auto surface = oracle::random_grid(rng, 64, 0.2);
        const auto& s = surface.spec();
        grid::ElevationGrid ground(s);
        for (std::size_t i = 0; i < ground.size(); ++i)
            ground.set(i, 0.0);
        masks::ObjectMask m;
        m.id = "z";
        m.label = "tree";
        const double w = s.max_x() - s.x0, h = s.max_y() - s.y0;
        const double radius = std::max(0.3, 0.6 * std::max(w, h) * (0.2 + unit(rng)));
        m.polygon = oracle::random_polygon(rng, s.x0 + w * unit(rng), s.y0 + h * unit(rng), radius, t % 2 == 0);
        const auto naive = oracle::naive_zonal(surface, m.polygon);
        const auto cells = masks::rasterize_mask(m, s);
        check(cells.size() == naive.mask_cells, "pair " + std::to_string(t) + ": footprint size differs");
        if (naive.valid == 0) {
            bool threw = false;
            try {
                zonal::object_stats(surface, ground, m, cells, zonal::Units::Meters);
            } catch (const Error& e) {
                threw = e.code() == ErrorCode::EmptyObject;
            }
            check(threw, "pair " + std::to_string(t) + ": empty footprint not reported");
            continue;
        }
        const auto r = zonal::object_stats(surface, ground, m, cells, zonal::Units::Meters);
        check(r.height_min == naive.min && r.height_max == naive.max,
              "pair " + std::to_string(t) + ": min/max differ");
        check(std::fabs(r.height_mean - naive.mean) <= 1e-9 * std::fabs(naive.mean),
              "pair " + std::to_string(t) + ": mean differs");
        ++compared;
    }
    if (check.out.ok)
        check.out.detail = std::to_string(compared) + " pairs with stats, 100 footprints";
    return check.out;
}

Outcome ndsm_identities() {
    Check check;
    std::mt19937_64 rng(20260303);
    std::uniform_real_distribution<double> ground_value(80.0, 140.0);
    for (int t = 0; t < 50 && check.out.ok; ++t) {
        const auto obj = oracle::random_grid(rng, 48, 0.3);
        grid::ElevationGrid ground(obj.spec());
        for (std::size_t i = 0; i < ground.size(); ++i)
            ground.set(i, ground_value(rng));

        const auto self = heightmodel::ndsm(obj, obj, false);
        for (std::size_t i = 0; i < obj.size(); ++i)
            if (self.surface.valid(i))
                check(self.surface.value(i) == 0.0, "ndsm(g, g) != 0");

        const auto base = heightmodel::ndsm(obj, ground, false);
        const double c = 1000.0 * (t - 25);
        grid::ElevationGrid o2(obj.spec()), g2(obj.spec());
        for (std::size_t i = 0; i < obj.size(); ++i) {
            if (obj.valid(i))
                o2.set(i, obj.value(i) + c);
            g2.set(i, ground.value(i) + c);
        }
        const auto shifted = heightmodel::ndsm(o2, g2, false);
        for (std::size_t i = 0; i < obj.size(); ++i)
            if (base.surface.valid(i))
                check(std::fabs(shifted.surface.value(i) - base.surface.value(i)) <= 1e-9 * std::max(1.0, std::fabs(c)),
                      "shift by " + std::to_string(c) + " changed heights");

        const auto clamped = heightmodel::ndsm(obj, ground, true);
        for (std::size_t i = 0; i < obj.size(); ++i)
            if (clamped.surface.valid(i))
                check(clamped.surface.value(i) >= 0.0, "clamped output negative");
    }
    if (check.out.ok)
        check.out.detail = "50 grids";
    return check.out;
}

Outcome las_round_trip_and_fuzz() {
    Check check;
    std::mt19937_64 rng(20260404);
    std::uniform_real_distribution<double> xy(-1000.0, 1000.0);
    std::uniform_real_distribution<double> z(-50.0, 500.0);
    std::uniform_int_distribution<int> cls(0, 31);
    std::vector<las::PointRecord> pts(1000);
    for (auto& p : pts) {
        p.x = 500000.0 + xy(rng);
        p.y = 3500000.0 + xy(rng);
        p.z = z(rng);
        p.classification = static_cast<std::uint8_t>(cls(rng));
    }
    const las::Vec3 scale{0.001, 0.001, 0.001}, offset{500000.0, 3500000.0, 0.0};
    const auto bytes = las::encode_las(pts, scale, offset);
    std::istringstream in(std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    const auto file = las::read_las(in);
    check(file.points.size() == pts.size(), "point count differs");
    for (std::size_t i = 0; check.out.ok && i < pts.size(); ++i) {
        const auto& a = pts[i];
        const auto& b = file.points[i];
        check(std::fabs(a.x - b.x) <= 0.001 && std::fabs(a.y - b.y) <= 0.001 && std::fabs(a.z - b.z) <= 0.001 &&
                  a.classification == b.classification,
              "point " + std::to_string(i) + " outside one quantum");
    }

    std::uniform_int_distribution<std::size_t> header_pos(0, las::layout::kHeaderSize12 - 1);
    std::uniform_int_distribution<std::size_t> any_len(0, bytes.size());
    std::uniform_int_distribution<int> byte(0, 255);
    std::uniform_int_distribution<int> flips(1, 8);
    std::size_t typed = 0, accepted = 0;
    const int kCases = 12000;
    for (int t = 0; t < kCases && check.out.ok; ++t) {
        auto m = bytes;
        for (int f = flips(rng); f > 0; --f)
            m[header_pos(rng)] = static_cast<std::byte>(byte(rng));
        if (t % 4 == 0)
            m.resize(any_len(rng));
        std::istringstream fin(std::string(reinterpret_cast<const char*>(m.data()), m.size()));
        try {
            las::read_las(fin);
            ++accepted;
        } catch (const Error&) {
            ++typed;
        } catch (const std::exception& e) {
            check(false, std::string("untyped exception: ") + e.what());
        }
    }
    if (check.out.ok)
        check.out.detail = "1000 points within 0.001; " + std::to_string(kCases) + " mutated headers, " +
                           std::to_string(typed) + " typed errors, " + std::to_string(accepted) + " accepted";
    return check.out;
}

Outcome rasterize_order() {
    Check check;
    std::mt19937_64 rng(20260505);
    std::uniform_real_distribution<double> xy(0.0, 40.0);
    std::uniform_real_distribution<double> z(90.0, 140.0);
    std::vector<las::PointRecord> pts(100000);
    for (auto& p : pts) {
        p.x = xy(rng);
        p.y = xy(rng);
        p.z = z(rng);
        p.classification = grid::classes::kBuilding;
    }
    const auto spec = grid::grid_bounds(pts, 0.2);
    const grid::ClassSet cls{grid::classes::kBuilding};
    const auto ref_max = grid::rasterize(pts, spec, cls, grid::Reducer::Max).grid;
    const auto ref_min = grid::rasterize(pts, spec, cls, grid::Reducer::Min).grid;
    const auto ref_mean = grid::rasterize(pts, spec, cls, grid::Reducer::Mean).grid;
    for (int t = 0; t < 10 && check.out.ok; ++t) {
        std::shuffle(pts.begin(), pts.end(), rng);
        check(grid::rasterize(pts, spec, cls, grid::Reducer::Max).grid == ref_max, "max differs");
        check(grid::rasterize(pts, spec, cls, grid::Reducer::Min).grid == ref_min, "min differs");
        const auto mean = grid::rasterize(pts, spec, cls, grid::Reducer::Mean).grid;
        check(mean.validity() == ref_mean.validity(), "mean validity differs");
        for (std::size_t i = 0; i < mean.size(); ++i)
            if (mean.valid(i))
                check(relative_close(mean.value(i), ref_mean.value(i), 1e-9), "mean differs");
    }
    if (check.out.ok)
        check.out.detail = "10 permutations of 1e5 points";
    return check.out;
}

Outcome ensemble() {
    Check check;
    const grid::GridSpec spec{0, 0, 0.25, 48, 48};
    const auto a = oracle::square_mask("a", 1, 1, 5, 5, "tree", 0.9, 0.2);
    auto b = a;
    b.id = "b";
    check(masks::ensemble_merge({{a}, {b}}, spec, 0.5).accepted.size() == 1, "identical masks not deduplicated");
    check(masks::ensemble_merge({{a}, {oracle::square_mask("c", 7, 7, 10, 10, "tree")}}, spec, 0.5).accepted.size() ==
              2,
          "disjoint masks not preserved");

    std::mt19937_64 rng(20260606);
    std::uniform_real_distribution<double> pos(1.0, 11.0);
    std::uniform_real_distribution<double> rad(0.4, 3.5);
    std::uniform_real_distribution<double> conf(0.0, 1.0);
    std::uniform_int_distribution<int> count(2, 15);
    std::uniform_int_distribution<int> files(1, 3);
    for (int t = 0; t < 50 && check.out.ok; ++t) {
        std::vector<std::vector<masks::ObjectMask>> sets(static_cast<std::size_t>(files(rng)));
        for (auto& set : sets)
            for (int i = count(rng); i > 0; --i) {
                masks::ObjectMask m;
                m.id = "m" + std::to_string(i);
                m.label = i % 3 ? "tree" : "building";
                m.confidence = conf(rng);
                m.source_resolution_m = 0.1 * files(rng);
                m.polygon = oracle::random_polygon(rng, pos(rng), pos(rng), rad(rng), false);
                set.push_back(m);
            }
        const auto out = masks::ensemble_merge(sets, spec, 0.5).accepted;
        for (std::size_t i = 0; i < out.size(); ++i)
            for (std::size_t j = i + 1; j < out.size(); ++j)
                if (out[i].label == out[j].label)
                    check(masks::iou(masks::rasterize_mask(out[i], spec), masks::rasterize_mask(out[j], spec)) < 0.5,
                          "set " + std::to_string(t) + ": accepted pair with IoU >= threshold");
    }
    if (check.out.ok)
        check.out.detail = "identical, disjoint, 50 random sets";
    return check.out;
}

Outcome units() {
    Check check;
    const auto dir = work_dir("units");
    const auto las_path = write_scene(dir);
    PipelineConfig m;
    m.units = zonal::Units::Meters;
    PipelineConfig f = m;
    f.units = zonal::Units::Feet;
    const auto rm = run_pipeline(m, {las_path}, {kMaskFixture}, dir / "m").table.records;
    const auto rf = run_pipeline(f, {las_path}, {kMaskFixture}, dir / "f").table.records;
    check(rm.size() == rf.size() && !rm.empty(), "record counts differ");
    for (std::size_t i = 0; check.out.ok && i < rm.size(); ++i) {
        const auto& a = rm[i];
        const auto& b = rf[i];
        for (auto [mv, fv] : {std::pair{a.height_min, b.height_min}, {a.height_max, b.height_max},
                              {a.height_mean, b.height_mean}, {a.elev_ground_mean, b.elev_ground_mean}})
            check(relative_close(fv, mv * zonal::kFeetPerMeter, 1e-9), "feet != meters * 3.28084");
    }
    if (check.out.ok)
        check.out.detail = "4 height fields";
    return check.out;
}

Outcome format_stability() {
    Check check;
    const auto dir = work_dir("stability");
    const auto las_path = write_scene(dir);
    run_pipeline({}, {las_path}, {kMaskFixture}, dir / "a");
    run_pipeline({}, {las_path}, {kMaskFixture}, dir / "b");
    int compared = 0;
    for (const auto* name : {artifacts::kTableCsv, artifacts::kTableGeojson, artifacts::kDsm, artifacts::kDtm,
                             artifacts::kDtmFilled, artifacts::kNdsm}) {
        const auto x = oracle::slurp((dir / "a" / name).string());
        check(!x.empty() && x == oracle::slurp((dir / "b" / name).string()), std::string(name) + " differs");
        ++compared;
    }
    if (check.out.ok)
        check.out.detail = std::to_string(compared) + " artifacts byte-identical";
    return check.out;
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"end-to-end synthetic scene", end_to_end},
        {"gap-fill oracle", gapfill_oracle},
        {"zonal oracle", zonal_oracle},
        {"nDSM identities", ndsm_identities},
        {"LAS round-trip and header fuzz", las_round_trip_and_fuzz},
        {"rasterize order independence", rasterize_order},
        {"mask ensemble", ensemble},
        {"units", units},
        {"format stability", format_stability},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.ok;
        std::cout << (o.ok ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
              << " acceptance criteria passed" << std::endl;
    return failed ? 1 : 0;
}
