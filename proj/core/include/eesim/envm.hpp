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


// Multi-level-cell ReRAM storage for bitmask-encoded embeddings: packing
// (mask in SLC cells, payload in data cells), Gaussian read-fault injection,
// readout, Monte-Carlo trials, geometry and power-on cost.
//
// Cell model: a cell programmed to level l (0 .. 2^b - 1, unit spacing) reads
// back l + sigma * N(0, 1), decoded to the nearest level and clamped. The
// per-cell misread probability is then 2 (L - 1) / L * Q(0.5 / sigma).

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "eesim/sparse.hpp"

namespace eesim {

struct CellConfig {
  std::string name = "MLC2";
  int bits_per_cell = 2;
  double level_sigma = 0.0;              // in units of level spacing
  double area_density_mm2_per_mb = 0.08;
  double read_latency_ns = 1.54;
  double read_energy_j_per_bit = 0.065e-15;

  // Defaults with sigma calibrated to per-cell misread 1e-12, 1e-9 and 1e-4.
  static CellConfig slc();
  static CellConfig mlc2();
  static CellConfig mlc3();

  int levels() const { return 1 << bits_per_cell; }
  // Cells needed per 8-bit code: ceil(8 / b).
  int cells_per_byte() const { return (8 + bits_per_cell - 1) / bits_per_cell; }
  void validate() const;
};

inline constexpr double kSlcMisreadTarget = 1e-12;
inline constexpr double kMlc2MisreadTarget = 1e-9;
inline constexpr double kMlc3MisreadTarget = 1e-4;

// Average over uniformly used levels of P(decoded level != programmed level).
double misread_probability(int bits_per_cell, double sigma);

// Inverse of misread_probability in sigma (bisection).
double sigma_for_misread(int bits_per_cell, double probability);

struct EnvmImage {
  Shape shape;
  FloatFormat format;
  std::size_t payload_length = 0;
  CellConfig mask_config;
  CellConfig data_config;
  std::vector<std::uint8_t> mask_cells;  // one level per mask bit
  std::vector<std::uint8_t> data_cells;  // ceil(8 / b) levels per payload byte, LSB first

  std::size_t cell_count() const { return mask_cells.size() + data_cells.size(); }
};

// Throws InvalidInput unless mask_cfg is single-level and both configs are valid.
EnvmImage pack_embeddings(const BitmaskTensor& s, const CellConfig& data_cfg, const CellConfig& mask_cfg);

// Independent streams for mask and data cells; sigma 0 leaves the image unchanged.
// When analog is non-null it receives the sampled read values, mask cells first.
EnvmImage inject_faults(const EnvmImage& img, std::uint64_t seed, std::vector<double>* analog = nullptr);

struct ReadoutResult {
  BitmaskTensor tensor;
  bool corrupted = false;  // popcount(mask) disagreed with the stored payload length
};

// Never throws on fault-induced inconsistency: the payload is truncated or
// zero-padded to popcount(mask) and corrupted is set.
ReadoutResult readout(const EnvmImage& img);

struct TrialRecord {
  std::uint64_t seed = 0;
  std::size_t cell_flips = 0;
  std::size_t mask_bit_flips = 0;
  std::size_t weight_flips = 0;  // payload bytes differing from the source
  bool corrupted = false;
  double accuracy = 0.0;
};

struct TrialStats {
  std::size_t trials = 0;
  double fault_free_accuracy = 0.0;
  double mean_accuracy = 0.0;
  double min_accuracy = 0.0;
  std::vector<TrialRecord> records;
};

using AccuracyFn = std::function<double(const BitmaskTensor&)>;

// Trial i uses seed + i. The closure's exceptions propagate.
TrialStats run_trials(const BitmaskTensor& s, const CellConfig& data_cfg, const CellConfig& mask_cfg,
                      const AccuracyFn& evaluate, std::size_t trials = 100, std::uint64_t seed = 1);

struct Geometry {
  double area_mm2 = 0.0;
  double read_latency_ns = 0.0;
};

Geometry envm_geometry(const CellConfig& cfg, double megabytes);

// Conventional power-on path: DRAM read, then SRAM write and read per byte.
// Defaults are calibrated stand-ins.
struct ConventionalMemoryModel {
  double dram_read_ns_per_byte = 0.078;
  double sram_write_ns_per_byte = 0.0625;
  double sram_read_ns_per_byte = 0.0625;
  double dram_read_j_per_byte = 20e-12;
  double sram_write_j_per_byte = 7e-12;
  double sram_read_j_per_byte = 7e-12;
  double envm_read_width_bytes = 384.0;  // bytes delivered per eNVM read access

  void validate() const;
};

struct PathCost {
  double latency_ns = 0.0;
  double energy_j = 0.0;
};

struct PowerOnReport {
  std::size_t power_cycles = 1;
  std::size_t bytes = 0;
  PathCost envm;
  PathCost conventional;
  double latency_ratio = 0.0;  // conventional / envm (0 when both are zero)
  double energy_ratio = 0.0;
  double energy_saved_j = 0.0;
};

// Costs of loading s once per power cycle. The mask is read from SLC cells
// (mask_cfg), the payload from data_cfg cells.
PowerOnReport power_on_cost(const BitmaskTensor& s, const CellConfig& data_cfg, const CellConfig& mask_cfg,
                            const ConventionalMemoryModel& conv = {}, std::size_t power_cycles = 1);

}  // namespace eesim
