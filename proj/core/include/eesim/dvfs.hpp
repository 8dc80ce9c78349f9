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


// Sentence-level DVFS: V/F table, frequency selection, LDO/ADPLL transition
// timing, cycle accounting and the V^2 energy model.

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "eesim/model.hpp"

namespace eesim {

struct VfPoint {
  double voltage = 0.8;          // volts
  double max_frequency = 1.0e9;  // Hz

  bool operator==(const VfPoint&) const = default;
};

struct VfTable {
  std::vector<VfPoint> points;  // ascending voltage
  double standby_voltage = 0.5;
  double nominal_voltage = 0.8;

  // 0.5 V to 0.8 V in 25 mV steps, f_max = 1 GHz * (V - 0.3) / 0.5.
  static VfTable default_table();

  const VfPoint& nominal() const;
  // Throws ConfigError unless voltages and frequencies strictly increase and
  // the nominal point is present.
  void validate() const;
};

// n_cycles / (T - t_elapsed). Throws DeadlineMissed when T <= t_elapsed.
double required_frequency(std::uint64_t n_cycles, double deadline_s, double elapsed_s);

struct VfSelection {
  VfPoint point;
  double frequency = 0.0;  // operating frequency (f_req, or f_max of nominal on failure)
  bool deadline_ok = true;
};

// Lowest-voltage point whose f_max covers f_req, run at f_req.
VfSelection select_vf(const VfTable& table, double f_req);

struct LdoAdpllModel {
  double ldo_step_ns = 3.8;        // per ldo_step_volts of change
  double ldo_step_volts = 0.05;
  double adpll_relock_ns = 50.0;
  double settle_cap_ns = 100.0;
  double adpll_power_w = 2.46e-3;
  double ldo_peak_efficiency = 0.992;
  double ldo_step_energy_j = 5e-12;  // switching cost per LDO step
};

struct Transition {
  double time_ns = 0.0;
  double energy_j = 0.0;
};

Transition transition(const LdoAdpllModel& model, const VfPoint& from, const VfPoint& to);

struct CycleCount {
  std::uint64_t pu = 0;
  std::uint64_t sfu = 0;
  std::uint64_t total() const { return pu + sfu; }
};

// PU cycles from the tiled-matmul formula on each recorded shape; SFU cycles
// per row pass (softmax: 3 passes, layer norm: 2) over ceil(len / n) lanes,
// element-wise ops n per cycle, entropy 3 passes + 1, LUT lookups 1 each.
CycleCount stage_cycles(const StageTrace& stage, std::size_t n);
CycleCount account_cycles(const OpTrace& trace, std::size_t n);

struct EnergyModel {
  double alpha = 0.5;
  double cap_per_lane = 1.5e-12;      // F switched per datapath lane per cycle
  double mac_energy = 0.5e-12;        // J/V^2 per executed MAC
  double skip_fraction = 0.05;        // skipped-VMAC cost relative to executed
  double softmax_element = 2e-12;     // J/V^2 per element
  double layernorm_element = 2e-12;
  double elementwise_op = 0.5e-12;
  double entropy_element = 2e-12;
  double lut_lookup = 1e-12;
  double memory_byte = 1e-12;
  double active_leakage_w = 0.0;      // charged over compute time when nonzero
  double standby_leakage_w = 1e-4;    // charged over idle time at standby voltage

  // Throws ConfigError on negative weights or skip_fraction outside [0, 1).
  void validate() const;
};

double stage_energy(const EnergyModel& model, double voltage, const StageTrace& stage, std::size_t n);

// v^2 * [alpha C (n^2 PU + n SFU cycles) + MAC and SFU weights] plus optional
// active leakage over cycles / f.
double energy(const EnergyModel& model, double voltage, const OpTrace& trace, double frequency);

}  // namespace eesim
