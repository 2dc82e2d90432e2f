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

#pragma once

#include <cmath>

namespace heights::detail {

// Neumaier-compensated running sum. Merging two partial sums keeps the
// compensation of both.
struct CompensatedSum {
    double sum = 0.0;
    double compensation = 0.0;

    void add(double v) noexcept {
        const double t = sum + v;
        if (std::fabs(sum) >= std::fabs(v))
            compensation += (sum - t) + v;
        else
            compensation += (v - t) + sum;
        sum = t;
    }

    void merge(const CompensatedSum& other) noexcept {
        add(other.sum);
        add(other.compensation);
    }

    double value() const noexcept { return sum + compensation; }
};

} // namespace heights::detail
