/*
 * Copyright (C) 2026 The eesim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


// On-disk encoder bundle: a directory holding manifest.json, one raw code
// blob (.q8) per dense tensor and the bitmask-encoded embedding table.

#pragma once

#include <filesystem>

#include "eesim/model.hpp"

namespace eesim {

inline constexpr int kBundleFormatVersion = 1;

void save_bundle(const std::filesystem::path& dir, const EncoderBundle& bundle);

// Throws IoError for missing files and ConfigError for inconsistent content.
EncoderBundle load_bundle(const std::filesystem::path& dir);

}  // namespace eesim
