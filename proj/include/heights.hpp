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

// Umbrella header.

#pragma once

#include "heights/config.hpp"
#include "heights/error.hpp"
#include "heights/export.hpp"
#include "heights/gapfill.hpp"
#include "heights/geometry.hpp"
#include "heights/grid.hpp"
#include "heights/heightmodel.hpp"
#include "heights/las.hpp"
#include "heights/masks.hpp"
#include "heights/pipeline.hpp"
#include "heights/zonal.hpp"
