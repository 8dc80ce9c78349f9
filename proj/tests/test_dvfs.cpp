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


#include <gtest/gtest.h>

#include <cmath>

#include "eesim/dvfs.hpp"
#include "eesim/error.hpp"
#include "eesim/model.hpp"
#include "oracles.hpp"

using namespace eesim;

namespace {

std::uint64_t cdiv(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

OpTrace toy_trace(std::size_t tile_n = 16) {
  const auto bundle = oracle::toy_bundle();
  ForwardOptions o;
  o.tile_n = tile_n;
  return encoder_forward(make_sentences(bundle->config, 1, 3).front(), *bundle, 4, o).trace;
}

OpTrace with_skips(OpTrace t, bool all) {
  auto set = [&](StageTrace& s) { s.vmac_skipped = all ? s.vmac_invocations : 0; };
  set(t.embedding);
  for (auto& l : t.layers) set(l);
  return t;
}

}  // namespace

TEST(RequiredFrequency, Examples) {
  EXPECT_DOUBLE_EQ(required_frequency(5'000'000, 50e-3, 10e-3), 125e6);
  EXPECT_EQ(required_frequency(0, 50e-3, 10e-3), 0.0);
  EXPECT_DOUBLE_EQ(required_frequency(1000, 3e-6, 1e-6), 2 * required_frequency(1000, 5e-6, 1e-6));
  EXPECT_THROW(required_frequency(10, 1e-3, 1e-3), DeadlineMissed);
  EXPECT_THROW(required_frequency(10, 1e-3, 2e-3), DeadlineMissed);
}

TEST(VfTable, DefaultCurve) {
  const auto t = VfTable::default_table();
  EXPECT_NO_THROW(t.validate());
  EXPECT_EQ(t.points.size(), 13u);
  EXPECT_DOUBLE_EQ(t.nominal().voltage, 0.8);
  EXPECT_DOUBLE_EQ(t.nominal().max_frequency, 1e9);
  for (const auto& p : t.points) EXPECT_NEAR(p.max_frequency, 1e9 * (p.voltage - 0.3) / 0.5, 1e-3);
  VfTable bad = t;
  std::swap(bad.points[0], bad.points[1]);
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(SelectVf, Examples) {
  const auto t = VfTable::default_table();
  const auto low = select_vf(t, 0.3e9);
  EXPECT_DOUBLE_EQ(low.point.voltage, 0.5);
  EXPECT_TRUE(low.deadline_ok);
  EXPECT_DOUBLE_EQ(low.frequency, 0.3e9);
  const auto nom = select_vf(t, 1e9);
  EXPECT_DOUBLE_EQ(nom.point.voltage, 0.8);
  EXPECT_TRUE(nom.deadline_ok);
  const auto over = select_vf(t, 1.2e9);
  EXPECT_DOUBLE_EQ(over.point.voltage, 0.8);
  EXPECT_FALSE(over.deadline_ok);
  EXPECT_DOUBLE_EQ(over.frequency, 1e9);
}

TEST(SelectVf, MonotoneAndLowestFeasible) {
  const auto t = VfTable::default_table();
  double prev = 0;
  for (double f = 0; f <= 1.3e9; f += 1e6) {
    const auto s = select_vf(t, f);
    EXPECT_GE(s.point.voltage, prev);
    prev = s.point.voltage;
    if (s.deadline_ok) {
      EXPECT_GE(s.point.max_frequency, f);
      for (const auto& p : t.points)
        if (p.voltage < s.point.voltage) EXPECT_LT(p.max_frequency, f);
    }
  }
}

TEST(Transition, Examples) {
  const LdoAdpllModel m;
  const auto t = VfTable::default_table();
  const VfPoint hi = t.nominal(), lo = t.points.front();
  EXPECT_DOUBLE_EQ(transition(m, hi, hi).time_ns, 50.0);
  const auto down = transition(m, hi, lo);
  EXPECT_DOUBLE_EQ(down.time_ns, std::min(6 * 3.8 + 50.0, 100.0));
  EXPECT_LE(down.time_ns, 100.0);
  EXPECT_DOUBLE_EQ(transition(m, lo, hi).time_ns, down.time_ns);
  EXPECT_DOUBLE_EQ(down.energy_j, 2.46e-3 * 72.8e-9 + 6 * 5e-12);
}

TEST(Transition, NeverExceedsCapAcrossTable) {
  LdoAdpllModel slow;
  slow.adpll_relock_ns = 90;
  const auto t = VfTable::default_table();
  for (const auto& a : t.points)
    for (const auto& b : t.points) {
      EXPECT_LE(transition(LdoAdpllModel{}, a, b).time_ns, 100.0);
      EXPECT_LE(transition(slow, a, b).time_ns, 100.0);
      EXPECT_DOUBLE_EQ(transition(slow, a, b).time_ns, transition(slow, b, a).time_ns);
    }
}

TEST(Cycles, ZeroTrace) {
  EXPECT_EQ(account_cycles(OpTrace{}, 16).total(), 0u);
  EXPECT_EQ(energy(EnergyModel{}, 0.8, OpTrace{}, 1e9), 0.0);
}

TEST(Cycles, DoublingTileQuartersLargeMatmuls) {
  StageTrace s;
  s.matmuls.push_back({512, 512, 512});
  OpTrace t;
  t.layers.push_back(s);
  for (std::size_t n : {2u, 4u, 8u, 16u}) {
    EXPECT_EQ(account_cycles(t, n).pu, 4 * account_cycles(t, 2 * n).pu);
  }
}

TEST(Cycles, ToyForwardMatchesClosedForm) {
  const auto cfg = EncoderConfig::toy();
  for (std::size_t n : {2u, 4u, 8u, 16u, 32u}) {
    const auto trace = toy_trace(n);
    const std::uint64_t T = cfg.seq_len, H = cfg.hidden_dim, E = cfg.embed_dim, F = cfg.ffn_dim,
                        K = cfg.num_classes, D = cfg.head_dim(), heads = cfg.num_heads;
    auto mm = [&](std::uint64_t m, std::uint64_t k, std::uint64_t nn) { return cdiv(m, n) * cdiv(k, n) * cdiv(nn, n) * n; };
    const std::uint64_t head_pu = 3 * mm(T, H, D) + mm(T, D, T) + mm(T, T, D);
    const std::uint64_t layer_pu = heads * head_pu + mm(T, H, H) + mm(T, H, F) + mm(T, F, H) + mm(1, H, K);
    const std::uint64_t layer_sfu = heads * T * 3 * cdiv(T, n) + 2 * T * 2 * cdiv(H, n) +
                                    cdiv(heads * T * T + 2 * T * H + T * F, n);
    const auto c = account_cycles(trace, n);
    EXPECT_EQ(c.pu, mm(T, E, H) + cfg.num_layers * layer_pu) << "n=" << n;
    EXPECT_EQ(c.sfu, cfg.num_layers * layer_sfu) << "n=" << n;
  }
}

TEST(Energy, VoltageSquaredExact) {
  const auto t = toy_trace();
  const EnergyModel m;
  const double e1 = energy(m, 0.4, t, 1e9);
  EXPECT_DOUBLE_EQ(energy(m, 0.8, t, 1e9), 4 * e1);
  double prev = 0;
  for (const auto& p : VfTable::default_table().points) {
    const double e = energy(m, p.voltage, t, 1e9);
    EXPECT_GT(e, prev);
    EXPECT_DOUBLE_EQ(e / (p.voltage * p.voltage), e1 / 0.16);
    prev = e;
  }
}

TEST(Energy, SkipSavingsBoundedByCalibratedCeiling) {
  const auto t = toy_trace();
  const EnergyModel m;
  const double none = energy(m, 0.8, with_skips(t, false), 1e9);
  const double all = energy(m, 0.8, with_skips(t, true), 1e9);
  const double actual = energy(m, 0.8, t, 1e9);
  EXPECT_GT(none / all, 1.0);
  EXPECT_LE(none / all, 1.65);
  EXPECT_LE(actual, none);
  EXPECT_GE(actual, all);
}

TEST(Energy, ComponentsAddUp) {
  StageTrace s;
  s.softmax_rows = 3;
  s.softmax_row_len = 10;
  s.lut_lookups = 2;
  s.memory_bytes = 100;
  EnergyModel m;
  m.alpha = 0;
  EXPECT_NEAR(stage_energy(m, 1.0, s, 4), 30 * 2e-12 + 2 * 1e-12 + 100 * 1e-12, 1e-24);
}

TEST(Energy, SelectedPointNeverCostsMoreThanNominal) {
  const auto t = toy_trace();
  const auto table = VfTable::default_table();
  const EnergyModel m;
  for (double f = 0.1e9; f <= 1e9; f += 0.05e9) {
    const auto s = select_vf(table, f);
    ASSERT_TRUE(s.deadline_ok);
    EXPECT_LE(energy(m, s.point.voltage, t, s.frequency), energy(m, 0.8, t, 1e9));
  }
}

TEST(Energy, ActiveLeakageChargedOverComputeTime) {
  const auto t = toy_trace();
  EnergyModel m;
  const double base = energy(m, 0.8, t, 1e9);
  m.active_leakage_w = 1e-3;
  const double cycles = static_cast<double>(account_cycles(t, 16).total());
  EXPECT_NEAR(energy(m, 0.8, t, 1e9) - base, 1e-3 * cycles / 1e9, 1e-18);
  EXPECT_THROW((EnergyModel{.alpha = 2.0}).validate(), ConfigError);
}
