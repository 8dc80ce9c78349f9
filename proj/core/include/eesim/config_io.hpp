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


// JSON forms of the configuration types. Objects may omit fields (defaults
// apply); unknown keys are rejected with ConfigError.

#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "eesim/dvfs.hpp"
#include "eesim/earlyexit.hpp"
#include "eesim/envm.hpp"
#include "eesim/model.hpp"
#include "eesim/simulator.hpp"

namespace eesim {

using nlohmann::json;

void to_json(json& j, const EncoderConfig& c);
void from_json(const json& j, EncoderConfig& c);

void to_json(json& j, const VfPoint& p);
void from_json(const json& j, VfPoint& p);
void to_json(json& j, const VfTable& t);
void from_json(const json& j, VfTable& t);

void to_json(json& j, const LdoAdpllModel& m);
void from_json(const json& j, LdoAdpllModel& m);

void to_json(json& j, const EnergyModel& m);
void from_json(const json& j, EnergyModel& m);

void to_json(json& j, const HardwareConfig& h);
void from_json(const json& j, HardwareConfig& h);

// "SLC" / "MLC2" / "MLC3" strings select the calibrated defaults; objects
// start from the default named by "name" (or bits_per_cell) and override.
void to_json(json& j, const CellConfig& c);
void from_json(const json& j, CellConfig& c);

void to_json(json& j, const ConventionalMemoryModel& m);
void from_json(const json& j, ConventionalMemoryModel& m);

void to_json(json& j, const PredictorHyper& h);
void from_json(const json& j, PredictorHyper& h);

// latency_target_ms in JSON.
void to_json(json& j, const PolicyConfig& c);
void from_json(const json& j, PolicyConfig& c);

// Reads and parses a JSON file; IoError if unreadable, ConfigError if malformed.
json read_json_file(const std::filesystem::path& path);

// Writes text through a temporary file and rename; creates parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace eesim
