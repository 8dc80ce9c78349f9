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


#include "eesim/dvfs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eesim/error.hpp"

namespace eesim {

namespace {

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

constexpr int kMinMillivolts = 500;
constexpr int kMaxMillivolts = 800;
constexpr int kStepMillivolts = 25;
constexpr int kThresholdMillivolts = 300;

}  // namespace

VfTable VfTable::default_table() {
  VfTable t;
  for (int mv = kMinMillivolts; mv <= kMaxMillivolts; mv += kStepMillivolts) {
    t.points.push_back({mv / 1000.0, 1.0e9 * (mv - kThresholdMillivolts) / (kMaxMillivolts - kThresholdMillivolts)});
  }
  return t;
}

const VfPoint& VfTable::nominal() const {
  for (const auto& p : points) {
    if (std::fabs(p.voltage - nominal_voltage) < 1e-9) return p;
  }
  throw ConfigError("V/F table does not contain the nominal voltage");
}

void VfTable::validate() const {
  if (points.empty()) throw ConfigError("V/F table is empty");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].voltage > 0.0) || !(points[i].max_frequency > 0.0)) {
      throw ConfigError("V/F points must have positive voltage and frequency");
    }
    if (i > 0 && (points[i].voltage <= points[i - 1].voltage ||
                  points[i].max_frequency <= points[i - 1].max_frequency)) {
      throw ConfigError("V/F table must be strictly increasing in voltage and frequency");
    }
  }
  nominal();
  if (standby_voltage > nominal_voltage) throw ConfigError("standby voltage exceeds nominal");
}

double required_frequency(std::uint64_t n_cycles, double deadline_s, double elapsed_s) {
  if (!(elapsed_s >= 0.0)) throw InvalidInput("elapsed time must be non-negative");
  if (!(deadline_s > elapsed_s)) {
    throw DeadlineMissed("no time left: T = " + std::to_string(deadline_s) + " s, elapsed " +
                         std::to_string(elapsed_s) + " s");
  }
  return static_cast<double>(n_cycles) / (deadline_s - elapsed_s);
}

VfSelection select_vf(const VfTable& table, double f_req) {
  for (const auto& p : table.points) {
    if (p.max_frequency >= f_req) return {p, std::max(f_req, 0.0), true};
  }
  const auto& nom = table.nominal();
  return {nom, nom.max_frequency, false};
}

Transition transition(const LdoAdpllModel& m, const VfPoint& from, const VfPoint& to) {
  // Integer millivolts keep the step count exact for table voltages.
  const long dmv = std::lround(std::fabs(from.voltage - to.voltage) * 1000.0);
  const long step_mv = std::lround(m.ldo_step_volts * 1000.0);
  const long steps = step_mv > 0 ? (dmv + step_mv - 1) / step_mv : 0;
  Transition t;
  t.time_ns = std::min(static_cast<double>(steps) * m.ldo_step_ns + m.adpll_relock_ns, m.settle_cap_ns);
  t.energy_j = m.adpll_power_w * t.time_ns * 1e-9 + m.ldo_step_energy_j * static_cast<double>(steps);
  return t;
}

CycleCount stage_cycles(const StageTrace& s, std::size_t n) {
  if (n == 0) throw InvalidInput("tile size must be positive");
  CycleCount c;
  for (const auto& mm : s.matmuls) c.pu += matmul_cycles(mm.m, mm.k, mm.n, n);
  c.sfu += s.softmax_rows * 3 * ceil_div(s.softmax_row_len, n);
  c.sfu += s.layernorm_rows * 2 * ceil_div(s.layernorm_row_len, n);
  c.sfu += ceil_div(s.elementwise_ops, n);
  c.sfu += s.entropy_evals * (3 * ceil_div(s.entropy_len, n) + 1);
  c.sfu += s.lut_lookups;
  return c;
}

CycleCount account_cycles(const OpTrace& trace, std::size_t n) {
  CycleCount c = stage_cycles(trace.embedding, n);
  for (const auto& l : trace.layers) {
    const auto lc = stage_cycles(l, n);
    c.pu += lc.pu;
    c.sfu += lc.sfu;
  }
  return c;
}

void EnergyModel::validate() const {
  for (double w : {alpha, cap_per_lane, mac_energy, softmax_element, layernorm_element, elementwise_op,
                   entropy_element, lut_lookup, memory_byte, active_leakage_w, standby_leakage_w}) {
    if (!(w >= 0.0)) throw ConfigError("energy model weights must be non-negative");
  }
  if (alpha > 1.0) throw ConfigError("activity factor must lie in [0, 1]");
  if (!(skip_fraction >= 0.0 && skip_fraction < 1.0)) throw ConfigError("skip_fraction must lie in [0, 1)");
}

double stage_energy(const EnergyModel& m, double v, const StageTrace& s, std::size_t n) {
  const auto c = stage_cycles(s, n);
  const double lanes = static_cast<double>(n);
  const double executed = static_cast<double>(s.vmac_invocations - std::min(s.vmac_skipped, s.vmac_invocations));
  const double skipped = static_cast<double>(std::min(s.vmac_skipped, s.vmac_invocations));

  double e = m.alpha * m.cap_per_lane * (lanes * lanes * static_cast<double>(c.pu) + lanes * static_cast<double>(c.sfu));
  e += m.mac_energy * lanes * (executed + m.skip_fraction * skipped);
  e += m.softmax_element * static_cast<double>(s.softmax_rows * s.softmax_row_len);
  e += m.layernorm_element * static_cast<double>(s.layernorm_rows * s.layernorm_row_len);
  e += m.elementwise_op * static_cast<double>(s.elementwise_ops);
  e += m.entropy_element * static_cast<double>(s.entropy_evals * s.entropy_len);
  e += m.lut_lookup * static_cast<double>(s.lut_lookups);
  e += m.memory_byte * static_cast<double>(s.memory_bytes);
  return v * v * e;
}

double energy(const EnergyModel& m, double v, const OpTrace& trace, double f) {
  const std::size_t n = trace.tile_n;
  double e = stage_energy(m, v, trace.embedding, n);
  for (const auto& l : trace.layers) e += stage_energy(m, v, l, n);
  if (m.active_leakage_w > 0.0 && f > 0.0) {
    e += m.active_leakage_w * static_cast<double>(account_cycles(trace, n).total()) / f;
  }
  return e;
}

}  // namespace eesim
