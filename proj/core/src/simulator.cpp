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


#include "eesim/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "eesim/error.hpp"

namespace eesim {

namespace {

// Guard band above the transition cap so rounding cannot push latency past T.
constexpr double kReserveGuardS = 1e-9;

struct Run {
  const Encoder& encoder;
  const PolicyConfig& cfg;
  const HardwareConfig& hw;
  Encoder::State state;
  SentenceResult result;

  Run(const Encoder& e, std::span<const Token> tokens, const PolicyConfig& c, const HardwareConfig& h)
      : encoder(e), cfg(c), hw(h), state(e.begin(tokens)) {
    if (e.options().tile_n != c.tile_n) throw InvalidInput("encoder tile size differs from the policy tile size");
    result.policy = c.policy;
  }

  // Charges a stage to the current operating point.
  void charge(const StageTrace& stage, const VfPoint& point, double frequency) {
    const auto cyc = stage_cycles(stage, cfg.tile_n).total();
    const double t = static_cast<double>(cyc) / frequency;
    result.cycles += cyc;
    result.latency_s += t;
    result.energy_j += stage_energy(hw.energy, point.voltage, stage, cfg.tile_n) + hw.energy.active_leakage_w * t;
  }

  void segment(std::size_t first, std::size_t last, const VfPoint& p, double f) {
    if (!result.vf_schedule.empty()) {
      auto& back = result.vf_schedule.back();
      if (back.point == p && back.frequency == f && back.last_layer + 1 == first) {
        back.last_layer = last;
        return;
      }
    }
    result.vf_schedule.push_back({first, last, p, f});
  }

  // Runs the next layer plus off-ramp entropy; returns H.
  double layer(const VfPoint& p, double f) {
    auto out = encoder.step(state);
    auto& st = state.trace.layers.back();
    st.entropy_evals += 1;
    st.entropy_len = out.logits.size();
    const bool first = out.layer == 1;
    if (first) charge(state.trace.embedding, p, f);
    charge(st, p, f);
    segment(first ? 0 : out.layer, out.layer, p, f);
    const double h = entropy_stable(out.logits);
    result.entropies.push_back(h);
    result.logits = std::move(out.logits);
    result.exit_layer = out.layer;
    return h;
  }

  // One SFU cycle for the exit-layer table lookup, charged to the current layer.
  void lut_lookup(const VfPoint& p, double f) {
    StageTrace lookup;
    lookup.lut_lookups = 1;
    charge(lookup, p, f);
    state.trace.layers.back().lut_lookups += 1;
  }

  void finish() {
    result.deadline_met = result.latency_s <= cfg.latency_target_s;
  }
};

SentenceResult run_nominal(const Encoder& encoder, std::span<const Token> tokens, const PolicyConfig& cfg,
                           const HardwareConfig& hw, bool early_exit) {
  cfg.validate();
  Run run(encoder, tokens, cfg, hw);
  const auto& nom = hw.vf.nominal();
  const std::size_t layers = encoder.config().num_layers;
  for (std::size_t l = 1; l <= layers; ++l) {
    const double h = run.layer(nom, nom.max_frequency);
    if (early_exit && assess_exit(h, cfg.entropy_threshold)) break;
  }
  run.finish();
  return std::move(run.result);
}

}  // namespace

std::string policy_name(Policy p) {
  switch (p) {
    case Policy::kBase:
      return "base";
    case Policy::kConventionalEE:
      return "ee";
    case Policy::kLatencyAware:
      return "lai";
  }
  return "unknown";
}

Policy parse_policy(const std::string& name) {
  if (name == "base") return Policy::kBase;
  if (name == "ee") return Policy::kConventionalEE;
  if (name == "lai") return Policy::kLatencyAware;
  throw ConfigError("unknown policy '" + name + "' (expected base, ee or lai)");
}

void PolicyConfig::validate() const {
  if (tile_n != 2 && tile_n != 4 && tile_n != 8 && tile_n != 16 && tile_n != 32) {
    throw ConfigError("tile_n must be one of 2, 4, 8, 16, 32");
  }
  if (!(entropy_threshold >= 0.0)) throw ConfigError("entropy threshold must be non-negative");
  if (!(latency_target_s > 0.0)) throw ConfigError("latency target must be positive");
}

LayerPredictor lut_predictor(const ExitPredictor& p) {
  if (!p.has_lut()) throw InvalidInput("predictor has no distilled LUT");
  return [p](double h1) { return predict_exit_layer(p, h1); };
}

SentenceResult run_base(const Encoder& encoder, std::span<const Token> tokens, const PolicyConfig& cfg,
                        const HardwareConfig& hw) {
  return run_nominal(encoder, tokens, cfg, hw, false);
}

SentenceResult run_conventional_ee(const Encoder& encoder, std::span<const Token> tokens, const PolicyConfig& cfg,
                                   const HardwareConfig& hw) {
  return run_nominal(encoder, tokens, cfg, hw, true);
}

SentenceResult run_latency_aware(const Encoder& encoder, std::span<const Token> tokens, const LayerPredictor& predictor,
                                 const PolicyConfig& cfg, const HardwareConfig& hw) {
  cfg.validate();
  if (!predictor) throw InvalidInput("latency-aware policy requires a predictor");
  Run run(encoder, tokens, cfg, hw);
  auto& r = run.result;
  const auto& nom = hw.vf.nominal();
  const std::size_t layers = encoder.config().num_layers;
  const double T = cfg.latency_target_s;

  const double h1 = run.layer(nom, nom.max_frequency);
  if (assess_exit(h1, cfg.entropy_threshold)) {
    r.predicted_layer = 1;
    run.finish();
    return std::move(r);
  }

  // Layer cycles depend only on shapes, so layer 1 prices every later layer.
  const auto per_layer = stage_cycles(run.state.trace.layers.front(), cfg.tile_n).total();
  run.lut_lookup(nom, nom.max_frequency);
  const std::size_t predicted = std::clamp<std::size_t>(predictor(h1), 1, layers);
  r.predicted_layer = predicted;
  if (predicted > 1) {
    const std::uint64_t remaining = per_layer * (predicted - 1);
    const double reserve = hw.ldo.settle_cap_ns * 1e-9 + kReserveGuardS;

    VfPoint point = nom;
    double freq = nom.max_frequency;
    try {
      const auto sel = select_vf(hw.vf, required_frequency(remaining, T - reserve, r.latency_s));
      r.deadline_ok = sel.deadline_ok;
      if (sel.deadline_ok && !(sel.point == nom)) {
        point = sel.point;
        freq = sel.frequency;
      }
    } catch (const DeadlineMissed&) {
      r.deadline_ok = false;
    }

    if (!(point == nom)) {
      const auto down = transition(hw.ldo, nom, point);
      r.latency_s += down.time_ns * 1e-9;
      r.energy_j += down.energy_j;
    }
    for (std::size_t l = 2; l <= predicted; ++l) {
      const double h = run.layer(point, freq);
      if (assess_exit(h, cfg.entropy_threshold)) break;
    }
    if (!(point == nom)) {
      const auto up = transition(hw.ldo, point, nom);
      r.ramp_back_s = up.time_ns * 1e-9;
      r.energy_j += up.energy_j;
    }
  }
  run.finish();
  return std::move(r);
}

SentenceResult run_sentence(const Encoder& encoder, std::span<const Token> tokens, const LayerPredictor& predictor,
                            const PolicyConfig& cfg, const HardwareConfig& hw) {
  switch (cfg.policy) {
    case Policy::kBase:
      return run_base(encoder, tokens, cfg, hw);
    case Policy::kConventionalEE:
      return run_conventional_ee(encoder, tokens, cfg, hw);
    case Policy::kLatencyAware:
      return run_latency_aware(encoder, tokens, predictor, cfg, hw);
  }
  throw ConfigError("unknown policy");
}

EntropyTrace entropy_trace(const Encoder& encoder, std::span<const Token> tokens) {
  auto state = encoder.begin(tokens);
  EntropyTrace t;
  for (std::size_t l = 0; l < encoder.config().num_layers; ++l) t.push_back(entropy_stable(encoder.step(state).logits));
  return t;
}

StreamReport run_stream(const Encoder& encoder, const std::vector<std::vector<Token>>& sentences,
                        const LayerPredictor& predictor, const PolicyConfig& cfg, const HardwareConfig& hw) {
  StreamPredictor indexed;
  if (predictor) indexed = [&predictor](std::size_t, double h1) { return predictor(h1); };
  return run_stream(encoder, sentences, indexed, cfg, hw);
}

StreamReport run_stream(const Encoder& encoder, const std::vector<std::vector<Token>>& sentences,
                        const StreamPredictor& predictor, const PolicyConfig& cfg, const HardwareConfig& hw) {
  if (sentences.empty()) throw InvalidInput("sentence stream is empty");
  StreamReport rep;
  rep.config = cfg;
  double exits = 0.0, latency = 0.0, active = 0.0;
  std::size_t misses = 0;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    LayerPredictor per_sentence;
    if (predictor) per_sentence = [&predictor, i](double h1) { return predictor(i, h1); };
    auto res = run_sentence(encoder, sentences[i], per_sentence, cfg, hw);
    exits += static_cast<double>(res.exit_layer);
    latency += res.latency_s;
    active += res.energy_j;
    misses += res.deadline_met ? 0 : 1;
    const double idle = std::max(0.0, cfg.latency_target_s - res.latency_s - res.ramp_back_s);
    rep.idle_energy_j += hw.energy.standby_leakage_w * idle;
    rep.sentences.push_back(std::move(res));
  }
  const double n = static_cast<double>(sentences.size());
  rep.mean_exit_layer = exits / n;
  rep.mean_latency_s = latency / n;
  rep.mean_energy_j = active / n;
  rep.total_energy_j = active + rep.idle_energy_j;
  rep.deadline_miss_rate = static_cast<double>(misses) / n;
  return rep;
}

}  // namespace eesim
