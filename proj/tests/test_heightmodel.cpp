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

#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace heights;
using namespace heights::heightmodel;
using heights::grid::ElevationGrid;
using heights::grid::GridSpec;

TEST(Ndsm, IdenticalInputsGiveZero) {
    std::mt19937_64 rng(2);
    const auto g = oracle::random_grid(rng, 30, 0.3);
    const auto out = ndsm(g, g);
    EXPECT_EQ(out.surface.validity(), g.validity());
    for (std::size_t i = 0; i < g.size(); ++i)
        EXPECT_EQ(out.surface.value(i), 0.0);
    EXPECT_EQ(out.negative_cells, 0u);
}

TEST(Ndsm, SubtractsGroundFromObject) {
    ElevationGrid object(GridSpec{0, 0, 0.2, 2, 1}), ground(GridSpec{0, 0, 0.2, 2, 1});
    object.set(0, 105.0);
    ground.set(0, 100.0);
    object.set(1, 99.0);
    ground.set(1, 100.0);

    const auto clamped = ndsm(object, ground, true);
    EXPECT_EQ(clamped.surface.value(0), 5.0);
    EXPECT_EQ(clamped.surface.value(1), 0.0);
    EXPECT_EQ(clamped.negative_cells, 1u);

    const auto raw = ndsm(object, ground, false);
    EXPECT_EQ(raw.surface.value(1), -1.0);
    EXPECT_EQ(raw.negative_cells, 1u);
}

TEST(Ndsm, NodataPropagatesFromEitherInput) {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 10; ++t) {
        auto a = oracle::random_grid(rng, 20, 0.4);
        ElevationGrid b(a.spec());
        std::bernoulli_distribution hole(0.3);
        for (std::size_t i = 0; i < b.size(); ++i)
            if (!hole(rng))
                b.set(i, 95.0);
        const auto out = ndsm(a, b, false);
        for (std::size_t i = 0; i < a.size(); ++i)
            EXPECT_EQ(out.surface.valid(i), a.valid(i) && b.valid(i));
    }
}

TEST(Ndsm, ConstantShiftInvariance) {
    std::mt19937_64 rng(6);
    const auto obj = oracle::random_grid(rng, 25, 0.2);
    ElevationGrid ground(obj.spec());
    for (std::size_t i = 0; i < ground.size(); ++i)
        ground.set(i, 90.0 + static_cast<double>(i % 13));
    const auto base = ndsm(obj, ground, false);
    for (double c : {-250.0, 0.5, 1234.5}) {
        ElevationGrid o2(obj.spec()), g2(obj.spec());
        for (std::size_t i = 0; i < obj.size(); ++i) {
            if (obj.valid(i))
                o2.set(i, obj.value(i) + c);
            g2.set(i, ground.value(i) + c);
        }
        const auto shifted = ndsm(o2, g2, false);
        for (std::size_t i = 0; i < obj.size(); ++i)
            EXPECT_NEAR(shifted.surface.value(i), base.surface.value(i), 1e-9);
    }
}

TEST(Ndsm, ClampedOutputIsNonNegative) {
    std::mt19937_64 rng(10);
    auto obj = oracle::random_grid(rng, 30, 0.1);
    ElevationGrid ground(obj.spec());
    std::uniform_real_distribution<double> v(90.0, 130.0);
    for (std::size_t i = 0; i < ground.size(); ++i)
        ground.set(i, v(rng));
    const auto out = ndsm(obj, ground, true);
    EXPECT_GT(out.negative_cells, 0u);
    for (std::size_t i = 0; i < out.surface.size(); ++i)
        EXPECT_GE(out.surface.value(i), 0.0);
}

TEST(Ndsm, SpecMismatchIsAnError) {
    ElevationGrid a(GridSpec{0, 0, 0.2, 2, 2}), b(GridSpec{0, 0, 0.25, 2, 2});
    try {
        ndsm(a, b);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SpecMismatch);
    }
}
