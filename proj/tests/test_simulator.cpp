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
#include <memory>

#include "eesim/dvfs.hpp"
#include "eesim/earlyexit.hpp"
#include "eesim/error.hpp"
#include "eesim/simulator.hpp"
#include "oracles.hpp"

using namespace eesim;

namespace {

class SimulatorTest : public ::testing::Test {
 protected:
  void SetUp() override {
    bundle = oracle::toy_bundle(12);
    encoder = std::make_unique<Encoder>(bundle);
    sentences = make_sentences(bundle->config, 40, 77);
    PolicyConfig slow;
    slow.latency_target_s = 1.0;
    base_latency = run_base(*encoder, sentences[0], slow, hw).latency_s;
  }

  PolicyConfig config(Policy p, double et, double T) const {
    PolicyConfig c;
    c.policy = p;
    c.entropy_threshold = et;
    c.latency_target_s = T;
    return c;
  }

  std::shared_ptr<const EncoderBundle> bundle;
  std::unique_ptr<Encoder> encoder;
  std::vector<std::vector<Token>> sentences;
  HardwareConfig hw;
  double base_latency = 0;
  const double et = 0.2;
};

}  // namespace

TEST_F(SimulatorTest, BaseRunsEveryLayerAtNominal) {
  const auto cfg = config(Policy::kBase, et, 1.0);
  const auto r = run_base(*encoder, sentences[1], cfg, hw);
  EXPECT_EQ(r.exit_layer, 12u);
  EXPECT_EQ(r.entropies.size(), 12u);

  // Energy is the dvfs model applied to the forward trace plus off-ramp entropy.
  auto trace = encoder_forward(sentences[1], *bundle, 12).trace;
  for (auto& l : trace.layers) {
    l.entropy_evals = 1;
    l.entropy_len = bundle->config.num_classes;
  }
  EXPECT_NEAR(r.energy_j, energy(hw.energy, 0.8, trace, 1e9), 1e-12 * r.energy_j);
  EXPECT_EQ(r.cycles, account_cycles(trace, 16).total());
  EXPECT_DOUBLE_EQ(r.latency_s, static_cast<double>(r.cycles) / 1e9);
  ASSERT_EQ(r.vf_schedule.size(), 1u);
  EXPECT_EQ(r.vf_schedule[0].first_layer, 0u);
  EXPECT_EQ(r.vf_schedule[0].last_layer, 12u);
}

TEST_F(SimulatorTest, ZeroThresholdEarlyExitEqualsBase) {
  for (std::size_t i = 0; i < 5; ++i) {
    const auto b = run_base(*encoder, sentences[i], config(Policy::kBase, 0.0, 1.0), hw);
    const auto e = run_conventional_ee(*encoder, sentences[i], config(Policy::kConventionalEE, 0.0, 1.0), hw);
    EXPECT_EQ(e.exit_layer, b.exit_layer);
    EXPECT_EQ(e.cycles, b.cycles);
    EXPECT_EQ(e.energy_j, b.energy_j);
    EXPECT_EQ(e.latency_s, b.latency_s);
    EXPECT_EQ(e.logits, b.logits);
  }
}

TEST_F(SimulatorTest, ThresholdAboveLnKExitsAtFirstLayer) {
  const double lnk = std::log(2.0);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto e = run_conventional_ee(*encoder, sentences[i], config(Policy::kConventionalEE, lnk + 1e-9, 1.0), hw);
    EXPECT_EQ(e.exit_layer, 1u);
  }
}

TEST_F(SimulatorTest, ExitLayerNonincreasingInThreshold) {
  for (const auto& s : sentences) {
    std::size_t prev = 13;
    for (double t = 0.0; t <= 0.75; t += 0.025) {
      const auto e = run_conventional_ee(*encoder, s, config(Policy::kConventionalEE, t, 1.0), hw);
      EXPECT_LE(e.exit_layer, prev);
      prev = e.exit_layer;
      // Stops at the first sub-threshold layer, never later.
      EXPECT_EQ(e.entropies.size(), e.exit_layer);
      for (std::size_t l = 0; l + 1 < e.entropies.size(); ++l) EXPECT_GE(e.entropies[l], t);
    }
  }
}

TEST_F(SimulatorTest, LatencyAwareExitsAtOneWithoutTransition) {
  const auto cfg = config(Policy::kLatencyAware, std::log(2.0) + 1e-9, 3 * base_latency);
  const auto r = run_latency_aware(*encoder, sentences[0], [](double) { return std::size_t{12}; }, cfg, hw);
  EXPECT_EQ(r.exit_layer, 1u);
  EXPECT_EQ(r.predicted_layer, 1u);
  EXPECT_EQ(r.ramp_back_s, 0.0);
  ASSERT_EQ(r.vf_schedule.size(), 1u);
  EXPECT_DOUBLE_EQ(r.vf_schedule[0].point.voltage, 0.8);
  const auto e = run_conventional_ee(*encoder, sentences[0], cfg, hw);
  EXPECT_EQ(r.energy_j, e.energy_j);
  EXPECT_EQ(r.latency_s, e.latency_s);
}

TEST_F(SimulatorTest, DegeneratePredictorRunsAllLayersAtReducedVoltage) {
  const auto cfg = config(Policy::kLatencyAware, 0.0, 3 * base_latency);
  const auto r = run_latency_aware(*encoder, sentences[2], [](double) { return std::size_t{12}; }, cfg, hw);
  const auto b = run_base(*encoder, sentences[2], cfg, hw);
  EXPECT_EQ(r.exit_layer, b.exit_layer);
  EXPECT_EQ(r.logits, b.logits);
  ASSERT_EQ(r.vf_schedule.size(), 2u);
  EXPECT_LT(r.vf_schedule[1].point.voltage, 0.8);
  EXPECT_GT(r.ramp_back_s, 0.0);
  EXPECT_TRUE(r.deadline_ok);
  EXPECT_TRUE(r.deadline_met);
  EXPECT_LT(r.energy_j, b.energy_j);
}

TEST_F(SimulatorTest, OracleLatencyAwareMatchesExitAndSavesEnergy) {
  const double T = 3 * base_latency;
  for (const auto& s : sentences) {
    const auto e = run_conventional_ee(*encoder, s, config(Policy::kConventionalEE, et, T), hw);
    const auto b = run_base(*encoder, s, config(Policy::kBase, et, T), hw);
    const std::size_t truth = e.exit_layer;
    const auto l = run_latency_aware(*encoder, s, [truth](double) { return truth; },
                                     config(Policy::kLatencyAware, et, T), hw);
    EXPECT_EQ(l.exit_layer, e.exit_layer);
    EXPECT_EQ(l.logits, e.logits);
    ASSERT_TRUE(l.deadline_ok);
    EXPECT_LE(l.energy_j, e.energy_j);
    EXPECT_LE(e.energy_j, b.energy_j);
    EXPECT_LE(l.latency_s, T);
  }
}

TEST_F(SimulatorTest, ExitNeverExceedsPrediction) {
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    for (std::size_t guess : {1u, 2u, 3u, 5u, 8u, 12u, 40u}) {
      const auto r = run_latency_aware(*encoder, sentences[i], [guess](double) { return guess; },
                                       config(Policy::kLatencyAware, et, 3 * base_latency), hw);
      EXPECT_LE(r.exit_layer, std::min<std::size_t>(guess, 12));
      EXPECT_LE(r.exit_layer, std::max<std::size_t>(r.predicted_layer, 1));
    }
  }
}

TEST_F(SimulatorTest, DeadlineHonouredWheneverFeasible) {
  for (double scale : {0.2, 0.5, 0.9, 1.0, 1.05, 1.5, 2.5, 10.0}) {
    const double T = scale * base_latency;
    for (const auto& s : sentences) {
      const auto r = run_latency_aware(*encoder, s, [](double) { return std::size_t{12}; },
                                       config(Policy::kLatencyAware, 0.0, T), hw);
      if (r.deadline_ok) EXPECT_LE(r.latency_s, T) << "scale " << scale;
      if (scale < 1.0) EXPECT_FALSE(r.deadline_ok);
    }
  }
}

TEST_F(SimulatorTest, InfeasibleDeadlineRunsAtNominalAndChargesLookup) {
  const auto& s = sentences[3];
  const auto e = run_conventional_ee(*encoder, s, config(Policy::kConventionalEE, 0.0, 1.0), hw);
  const auto r = run_latency_aware(*encoder, s, [](double) { return std::size_t{12}; },
                                   config(Policy::kLatencyAware, 0.0, 0.5 * base_latency), hw);
  EXPECT_FALSE(r.deadline_ok);
  EXPECT_FALSE(r.deadline_met);
  ASSERT_EQ(r.vf_schedule.size(), 1u);
  EXPECT_EQ(r.cycles, e.cycles + 1);  // one SFU cycle for the LUT lookup
  StageTrace lookup;
  lookup.lut_lookups = 1;
  EXPECT_NEAR(r.energy_j - e.energy_j, stage_energy(hw.energy, 0.8, lookup, 16), 1e-18);
}

TEST_F(SimulatorTest, OracleEnergyNonincreasingInDeadline) {
  for (std::size_t i = 0; i < 10; ++i) {
    const auto e = run_conventional_ee(*encoder, sentences[i], config(Policy::kConventionalEE, et, 1.0), hw);
    const std::size_t truth = e.exit_layer;
    double prev = INFINITY;
    for (double scale = 1.0; scale <= 6.0; scale += 0.1) {
      const auto r = run_latency_aware(*encoder, sentences[i], [truth](double) { return truth; },
                                       config(Policy::kLatencyAware, et, scale * base_latency), hw);
      EXPECT_LE(r.energy_j, prev * (1 + 1e-12)) << "sentence " << i << " scale " << scale;
      prev = r.energy_j;
    }
  }
}

TEST_F(SimulatorTest, SparseAndDenseRunsShareExitsAndCycles) {
  ForwardOptions dense;
  dense.zero_skip = false;
  const Encoder dense_encoder(bundle, dense);
  for (const auto& s : sentences) {
    const auto a = run_conventional_ee(*encoder, s, config(Policy::kConventionalEE, et, 1.0), hw);
    const auto b = run_conventional_ee(dense_encoder, s, config(Policy::kConventionalEE, et, 1.0), hw);
    EXPECT_EQ(a.exit_layer, b.exit_layer);
    EXPECT_EQ(a.cycles, b.cycles);
    EXPECT_EQ(a.entropies, b.entropies);
    EXPECT_LT(a.energy_j, b.energy_j);
  }
}

TEST_F(SimulatorTest, StreamAggregates) {
  const auto cfg = config(Policy::kConventionalEE, et, 3 * base_latency);
  const std::vector<std::vector<Token>> one{sentences[0]};
  const auto single = run_stream(*encoder, one, LayerPredictor{}, cfg, hw);
  const auto direct = run_conventional_ee(*encoder, sentences[0], cfg, hw);
  EXPECT_EQ(single.sentences[0].energy_j, direct.energy_j);
  EXPECT_EQ(single.mean_exit_layer, static_cast<double>(direct.exit_layer));
  EXPECT_NEAR(single.idle_energy_j, hw.energy.standby_leakage_w * (3 * base_latency - direct.latency_s), 1e-24);

  const auto rep = run_stream(*encoder, sentences, LayerPredictor{}, cfg, hw);
  double exits = 0, energy_sum = 0;
  for (const auto& r : rep.sentences) {
    exits += r.exit_layer;
    energy_sum += r.energy_j;
  }
  EXPECT_DOUBLE_EQ(rep.mean_exit_layer, exits / sentences.size());
  EXPECT_DOUBLE_EQ(rep.mean_energy_j, energy_sum / sentences.size());
  EXPECT_DOUBLE_EQ(rep.total_energy_j, energy_sum + rep.idle_energy_j);
  EXPECT_EQ(rep.deadline_miss_rate, 0.0);
}

TEST_F(SimulatorTest, StreamOracleEnergyOrdering) {
  const double T = 3 * base_latency;
  std::vector<std::size_t> truth;
  for (const auto& s : sentences)
    truth.push_back(run_conventional_ee(*encoder, s, config(Policy::kConventionalEE, et, T), hw).exit_layer);
  const StreamPredictor oracle_pred = [&](std::size_t i, double) { return truth[i]; };
  const auto base = run_stream(*encoder, sentences, LayerPredictor{}, config(Policy::kBase, et, T), hw);
  const auto ee = run_stream(*encoder, sentences, LayerPredictor{}, config(Policy::kConventionalEE, et, T), hw);
  const auto lai = run_stream(*encoder, sentences, oracle_pred, config(Policy::kLatencyAware, et, T), hw);
  EXPECT_LE(lai.mean_energy_j, ee.mean_energy_j);
  EXPECT_LE(ee.mean_energy_j, base.mean_energy_j);
  EXPECT_EQ(lai.mean_exit_layer, ee.mean_exit_layer);
}

TEST_F(SimulatorTest, LutPredictorPlugsIn) {
  std::vector<EntropyTrace> traces;
  for (const auto& s : make_sentences(bundle->config, 120, 5)) traces.push_back(entropy_trace(*encoder, s));
  PredictorHyper h;
  h.epochs = 30;
  const auto p = distill_lut(train_predictor(traces, et, 2, h), 256);
  const auto pred = lut_predictor(p);
  const auto r = run_latency_aware(*encoder, sentences[0], pred, config(Policy::kLatencyAware, et, 3 * base_latency), hw);
  EXPECT_GE(r.exit_layer, 1u);
  const auto trace = entropy_trace(*encoder, sentences[0]);
  if (trace[0] >= et) EXPECT_EQ(r.predicted_layer, predict_exit_layer(p, trace[0]));
  EXPECT_THROW(lut_predictor(ExitPredictor{}), InvalidInput);
}

TEST_F(SimulatorTest, ConfigurationErrors) {
  EXPECT_EQ(parse_policy("lai"), Policy::kLatencyAware);
  EXPECT_EQ(policy_name(parse_policy("ee")), "ee");
  EXPECT_THROW(parse_policy("fast"), ConfigError);
  auto cfg = config(Policy::kBase, et, 1.0);
  cfg.tile_n = 12;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.tile_n = 8;  // encoder was built for 16
  EXPECT_THROW(run_base(*encoder, sentences[0], cfg, hw), InvalidInput);
  EXPECT_THROW(run_latency_aware(*encoder, sentences[0], LayerPredictor{}, config(Policy::kLatencyAware, et, 1.0), hw),
               InvalidInput);
  EXPECT_THROW(run_stream(*encoder, {}, LayerPredictor{}, config(Policy::kBase, et, 1.0), hw), InvalidInput);
}
