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


#include "eesim/config_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "eesim/error.hpp"

namespace eesim {

namespace {

// Reads optional fields from an object and rejects keys nobody asked for.
class Fields {
 public:
  Fields(const json& j, std::string what) : j_(j), what_(std::move(what)) {
    if (!j_.is_object()) throw ConfigError(what_ + " must be a JSON object");
    seen_.insert("calibrated");
  }

  template <class T>
  bool get(const std::string& key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return false;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(what_ + "." + key + ": " + e.what());
    }
    return true;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(what_ + ": unknown key '" + item.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string what_;
  std::set<std::string> seen_;
};

CellConfig named_cell(const std::string& name) {
  if (name == "SLC") return CellConfig::slc();
  if (name == "MLC2") return CellConfig::mlc2();
  if (name == "MLC3") return CellConfig::mlc3();
  throw ConfigError("unknown cell configuration '" + name + "' (expected SLC, MLC2 or MLC3)");
}

}  // namespace

void to_json(json& j, const EncoderConfig& c) {
  j = json{{"num_layers", c.num_layers},   {"num_heads", c.num_heads},       {"hidden_dim", c.hidden_dim},
           {"embed_dim", c.embed_dim},     {"ffn_dim", c.ffn_dim},           {"seq_len", c.seq_len},
           {"num_classes", c.num_classes}, {"vocab_size", c.vocab_size},     {"exponent_bits", c.exponent_bits},
           {"layer_norm_eps", c.layer_norm_eps}};
}

void from_json(const json& j, EncoderConfig& c) {
  Fields f(j, "encoder");
  f.get("num_layers", c.num_layers);
  f.get("num_heads", c.num_heads);
  f.get("hidden_dim", c.hidden_dim);
  f.get("embed_dim", c.embed_dim);
  f.get("ffn_dim", c.ffn_dim);
  f.get("seq_len", c.seq_len);
  f.get("num_classes", c.num_classes);
  f.get("vocab_size", c.vocab_size);
  f.get("exponent_bits", c.exponent_bits);
  f.get("layer_norm_eps", c.layer_norm_eps);
  f.finish();
  c.validate();
}

void to_json(json& j, const VfPoint& p) { j = json{{"voltage", p.voltage}, {"max_frequency_hz", p.max_frequency}}; }

void from_json(const json& j, VfPoint& p) {
  Fields f(j, "vf point");
  f.get("voltage", p.voltage);
  f.get("max_frequency_hz", p.max_frequency);
  f.finish();
}

void to_json(json& j, const VfTable& t) {
  j = json{{"calibrated", true},
           {"points", t.points},
           {"standby_voltage", t.standby_voltage},
           {"nominal_voltage", t.nominal_voltage}};
}

void from_json(const json& j, VfTable& t) {
  t = VfTable::default_table();
  Fields f(j, "vf_table");
  f.get("points", t.points);
  f.get("standby_voltage", t.standby_voltage);
  f.get("nominal_voltage", t.nominal_voltage);
  f.finish();
  t.validate();
}

void to_json(json& j, const LdoAdpllModel& m) {
  j = json{{"calibrated", true},
           {"ldo_step_ns", m.ldo_step_ns},
           {"ldo_step_volts", m.ldo_step_volts},
           {"adpll_relock_ns", m.adpll_relock_ns},
           {"settle_cap_ns", m.settle_cap_ns},
           {"adpll_power_w", m.adpll_power_w},
           {"ldo_peak_efficiency", m.ldo_peak_efficiency},
           {"ldo_step_energy_j", m.ldo_step_energy_j}};
}

void from_json(const json& j, LdoAdpllModel& m) {
  Fields f(j, "ldo_adpll");
  f.get("ldo_step_ns", m.ldo_step_ns);
  f.get("ldo_step_volts", m.ldo_step_volts);
  f.get("adpll_relock_ns", m.adpll_relock_ns);
  f.get("settle_cap_ns", m.settle_cap_ns);
  f.get("adpll_power_w", m.adpll_power_w);
  f.get("ldo_peak_efficiency", m.ldo_peak_efficiency);
  f.get("ldo_step_energy_j", m.ldo_step_energy_j);
  f.finish();
  if (!(m.ldo_step_volts > 0.0) || !(m.settle_cap_ns >= 0.0) || !(m.ldo_step_ns >= 0.0) ||
      !(m.adpll_relock_ns >= 0.0) || !(m.adpll_power_w >= 0.0) || !(m.ldo_step_energy_j >= 0.0)) {
    throw ConfigError("ldo_adpll constants must be non-negative (step volts positive)");
  }
}

void to_json(json& j, const EnergyModel& m) {
  j = json{{"calibrated", true},
           {"alpha", m.alpha},
           {"cap_per_lane_f", m.cap_per_lane},
           {"mac_energy_j", m.mac_energy},
           {"skip_fraction", m.skip_fraction},
           {"softmax_element_j", m.softmax_element},
           {"layernorm_element_j", m.layernorm_element},
           {"elementwise_op_j", m.elementwise_op},
           {"entropy_element_j", m.entropy_element},
           {"lut_lookup_j", m.lut_lookup},
           {"memory_byte_j", m.memory_byte},
           {"active_leakage_w", m.active_leakage_w},
           {"standby_leakage_w", m.standby_leakage_w}};
}

void from_json(const json& j, EnergyModel& m) {
  Fields f(j, "energy_model");
  f.get("alpha", m.alpha);
  f.get("cap_per_lane_f", m.cap_per_lane);
  f.get("mac_energy_j", m.mac_energy);
  f.get("skip_fraction", m.skip_fraction);
  f.get("softmax_element_j", m.softmax_element);
  f.get("layernorm_element_j", m.layernorm_element);
  f.get("elementwise_op_j", m.elementwise_op);
  f.get("entropy_element_j", m.entropy_element);
  f.get("lut_lookup_j", m.lut_lookup);
  f.get("memory_byte_j", m.memory_byte);
  f.get("active_leakage_w", m.active_leakage_w);
  f.get("standby_leakage_w", m.standby_leakage_w);
  f.finish();
  m.validate();
}

void to_json(json& j, const HardwareConfig& h) {
  j = json{{"vf_table", h.vf}, {"ldo_adpll", h.ldo}, {"energy_model", h.energy}};
}

void from_json(const json& j, HardwareConfig& h) {
  Fields f(j, "hardware");
  f.get("vf_table", h.vf);
  f.get("ldo_adpll", h.ldo);
  f.get("energy_model", h.energy);
  f.finish();
}

void to_json(json& j, const CellConfig& c) {
  j = json{{"calibrated", true},
           {"name", c.name},
           {"bits_per_cell", c.bits_per_cell},
           {"level_sigma", c.level_sigma},
           {"misread_probability", misread_probability(c.bits_per_cell, c.level_sigma)},
           {"area_density_mm2_per_mb", c.area_density_mm2_per_mb},
           {"read_latency_ns", c.read_latency_ns},
           {"read_energy_j_per_bit", c.read_energy_j_per_bit}};
}

void from_json(const json& j, CellConfig& c) {
  if (j.is_string()) {
    c = named_cell(j.get<std::string>());
    return;
  }
  if (!j.is_object()) throw ConfigError("cell configuration must be a name or an object");
  if (j.contains("name")) {
    c = named_cell(j.at("name").get<std::string>());
  } else if (j.contains("bits_per_cell")) {
    const int bits = j.at("bits_per_cell").get<int>();
    c = bits == 1 ? CellConfig::slc() : bits == 2 ? CellConfig::mlc2() : CellConfig::mlc3();
  }
  Fields f(j, "cell");
  std::string name;
  f.get("name", name);
  f.get("bits_per_cell", c.bits_per_cell);
  f.get("level_sigma", c.level_sigma);
  double misread = -1.0;
  if (f.get("misread_probability", misread) && !j.contains("level_sigma")) {
    c.level_sigma = misread == 0.0 ? 0.0 : sigma_for_misread(c.bits_per_cell, misread);
  }
  f.get("area_density_mm2_per_mb", c.area_density_mm2_per_mb);
  f.get("read_latency_ns", c.read_latency_ns);
  f.get("read_energy_j_per_bit", c.read_energy_j_per_bit);
  f.finish();
  try {
    c.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
}

void to_json(json& j, const ConventionalMemoryModel& m) {
  j = json{{"calibrated", true},
           {"dram_read_ns_per_byte", m.dram_read_ns_per_byte},
           {"sram_write_ns_per_byte", m.sram_write_ns_per_byte},
           {"sram_read_ns_per_byte", m.sram_read_ns_per_byte},
           {"dram_read_j_per_byte", m.dram_read_j_per_byte},
           {"sram_write_j_per_byte", m.sram_write_j_per_byte},
           {"sram_read_j_per_byte", m.sram_read_j_per_byte},
           {"envm_read_width_bytes", m.envm_read_width_bytes}};
}

void from_json(const json& j, ConventionalMemoryModel& m) {
  Fields f(j, "conventional_memory");
  f.get("dram_read_ns_per_byte", m.dram_read_ns_per_byte);
  f.get("sram_write_ns_per_byte", m.sram_write_ns_per_byte);
  f.get("sram_read_ns_per_byte", m.sram_read_ns_per_byte);
  f.get("dram_read_j_per_byte", m.dram_read_j_per_byte);
  f.get("sram_write_j_per_byte", m.sram_write_j_per_byte);
  f.get("sram_read_j_per_byte", m.sram_read_j_per_byte);
  f.get("envm_read_width_bytes", m.envm_read_width_bytes);
  f.finish();
  m.validate();
}

void to_json(json& j, const PredictorHyper& h) {
  j = json{{"depth", h.depth == MlpDepth::kWeightLayers ? "weight_layers" : "neuron_layers"},
           {"hidden_width", h.hidden_width},
           {"epochs", h.epochs},
           {"batch_size", h.batch_size},
           {"learning_rate", h.learning_rate},
           {"seed", h.seed}};
}

void from_json(const json& j, PredictorHyper& h) {
  Fields f(j, "predictor");
  std::string depth;
  if (f.get("depth", depth)) {
    if (depth == "weight_layers") {
      h.depth = MlpDepth::kWeightLayers;
    } else if (depth == "neuron_layers") {
      h.depth = MlpDepth::kNeuronLayers;
    } else {
      throw ConfigError("predictor.depth must be weight_layers or neuron_layers");
    }
  }
  f.get("hidden_width", h.hidden_width);
  f.get("epochs", h.epochs);
  f.get("batch_size", h.batch_size);
  f.get("learning_rate", h.learning_rate);
  f.get("seed", h.seed);
  f.finish();
}

void to_json(json& j, const PolicyConfig& c) {
  j = json{{"policy", policy_name(c.policy)},
           {"entropy_threshold", c.entropy_threshold},
           {"latency_target_ms", c.latency_target_s * 1e3},
           {"tile_n", c.tile_n}};
}

void from_json(const json& j, PolicyConfig& c) {
  Fields f(j, "policy");
  std::string name;
  if (f.get("policy", name)) c.policy = parse_policy(name);
  f.get("entropy_threshold", c.entropy_threshold);
  double ms = c.latency_target_s * 1e3;
  if (f.get("latency_target_ms", ms)) c.latency_target_s = ms * 1e-3;
  f.get("tile_n", c.tile_n);
  f.finish();
  c.validate();
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace eesim
