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


// Inference policies (Base, conventional early exit, latency-aware) and
// sentence-stream simulation with cycle, latency and energy accounting.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "eesim/dvfs.hpp"
#include "eesim/earlyexit.hpp"
#include "eesim/model.hpp"

namespace eesim {

enum class Policy { kBase, kConventionalEE, kLatencyAware };

std::string policy_name(Policy p);
Policy parse_policy(const std::string& name);  // throws ConfigError

struct PolicyConfig {
  Policy policy = Policy::kBase;
  double entropy_threshold = 0.0;
  double latency_target_s = 50e-3;
  std::size_t tile_n = 16;

  // tile_n must be one of 2, 4, 8, 16, 32; T > 0 for the latency-aware policy.
  void validate() const;
};

struct HardwareConfig {
  VfTable vf = VfTable::default_table();
  LdoAdpllModel ldo;
  EnergyModel energy;
};

struct VfSegment {
  std::size_t first_layer = 0;  // 0 denotes the embedding stage
  std::size_t last_layer = 0;
  VfPoint point;
  double frequency = 0.0;
};

struct SentenceResult {
  Policy policy = Policy::kBase;
  std::size_t exit_layer = 0;
  std::size_t predicted_layer = 0;  // latency-aware only; 0 otherwise
  double latency_s = 0.0;           // includes transitions before and during compute
  double energy_j = 0.0;            // includes every transition, ramp-back too
  double ramp_back_s = 0.0;         // restore-to-nominal time, outside latency
  bool deadline_ok = true;          // a feasible V/F point was found
  bool deadline_met = true;         // latency <= T
  std::uint64_t cycles = 0;
  std::vector<VfSegment> vf_schedule;
  std::vector<double> entropies;    // per computed layer
  std::vector<double> logits;       // at the exit layer
};

// Maps layer-1 entropy to a predicted exit layer.
using LayerPredictor = std::function<std::size_t(double)>;

LayerPredictor lut_predictor(const ExitPredictor& p);

// Every policy computes the off-ramp and its entropy at each layer it runs.
SentenceResult run_base(const Encoder& encoder, std::span<const Token> tokens, const PolicyConfig& cfg,
                        const HardwareConfig& hw);
SentenceResult run_conventional_ee(const Encoder& encoder, std::span<const Token> tokens, const PolicyConfig& cfg,
                                   const HardwareConfig& hw);
SentenceResult run_latency_aware(const Encoder& encoder, std::span<const Token> tokens, const LayerPredictor& predictor,
                                 const PolicyConfig& cfg, const HardwareConfig& hw);

// Dispatches on cfg.policy; predictor is only used by the latency-aware policy.
SentenceResult run_sentence(const Encoder& encoder, std::span<const Token> tokens, const LayerPredictor& predictor,
                            const PolicyConfig& cfg, const HardwareConfig& hw);

// Per-layer entropies of all layers (no early exit).
EntropyTrace entropy_trace(const Encoder& encoder, std::span<const Token> tokens);

struct StreamReport {
  PolicyConfig config;
  std::vector<SentenceResult> sentences;
  double mean_exit_layer = 0.0;
  double mean_latency_s = 0.0;
  double mean_energy_j = 0.0;         // active energy per sentence
  double idle_energy_j = 0.0;         // standby leakage between sentences
  double total_energy_j = 0.0;        // active + idle
  double deadline_miss_rate = 0.0;
};

// Sentences run back to back; each occupies a slot of length T, the remainder
// idles at standby voltage. Throws InvalidInput on an empty stream.
StreamReport run_stream(const Encoder& encoder, const std::vector<std::vector<Token>>& sentences,
                        const LayerPredictor& predictor, const PolicyConfig& cfg, const HardwareConfig& hw);

// Predictor that also sees the sentence index (e.g. an oracle fed true labels).
using StreamPredictor = std::function<std::size_t(std::size_t sentence, double h1)>;

StreamReport run_stream(const Encoder& encoder, const std::vector<std::vector<Token>>& sentences,
                        const StreamPredictor& predictor, const PolicyConfig& cfg, const HardwareConfig& hw);

}  // namespace eesim
