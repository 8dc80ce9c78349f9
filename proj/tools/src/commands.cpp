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


#include "commands.hpp"

#include <CLI11/CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "eesim/bundle_io.hpp"
#include "eesim/config_io.hpp"
#include "eesim/error.hpp"
#include "eesim/simulator.hpp"

namespace eesim::cli {

namespace fs = std::filesystem;

namespace {

constexpr int kReportSchemaVersion = 1;
constexpr std::size_t kDefaultTrainingSentences = 300;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Writes to --out when given, else to the stream.
void emit(const GlobalOptions& g, std::ostream& out, const std::string& text) {
  if (g.out.empty()) {
    out << text;
  } else {
    write_text_file(g.out, text);
  }
}

// Objects inline, strings name a file relative to base.
template <class T>
T load_section(const json& j, const fs::path& base) {
  if (j.is_string()) return read_json_file(base / j.get<std::string>()).get<T>();
  return j.get<T>();
}

EncoderConfig preset(const std::string& name) {
  if (name == "toy") return EncoderConfig::toy();
  if (name == "albert_base") return EncoderConfig::albert_base();
  throw ConfigError("unknown encoder preset '" + name + "' (expected toy or albert_base)");
}

EncoderConfig encoder_from(const json& j) {
  if (j.is_string()) return preset(j.get<std::string>());
  EncoderConfig c;
  json rest = j;
  if (rest.contains("preset")) {
    c = preset(rest.at("preset").get<std::string>());
    rest.erase("preset");
  }
  json merged = c;
  merged.update(rest);
  return merged.get<EncoderConfig>();
}

SyntheticBundleOptions synthetic_from(const json& j, std::uint64_t default_seed) {
  SyntheticBundleOptions o;
  o.seed = default_seed;
  if (j.is_null()) return o;
  if (!j.is_object()) throw ConfigError("synthetic options must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "seed") {
      o.seed = value.get<std::uint64_t>();
    } else if (key == "embedding_density") {
      o.embedding_density = value.get<double>();
    } else if (key == "encoder_density") {
      o.encoder_density = value.get<double>();
    } else if (key == "ramp_gain") {
      o.ramp_gain = value.get<double>();
    } else if (key == "ramp_growth") {
      o.ramp_growth = value.get<double>();
    } else if (key == "ramp_noise") {
      o.ramp_noise = value.get<double>();
    } else if (key == "attention_spans") {
      o.spans = value.get<std::vector<std::size_t>>();
    } else {
      throw ConfigError("synthetic: unknown key '" + key + "'");
    }
  }
  return o;
}

json synthetic_to_json(const SyntheticBundleOptions& o) {
  return json{{"seed", o.seed},
              {"embedding_density", o.embedding_density},
              {"encoder_density", o.encoder_density},
              {"ramp_gain", o.ramp_gain},
              {"ramp_growth", o.ramp_growth},
              {"ramp_noise", o.ramp_noise},
              {"attention_spans", o.spans}};
}

// ---------------------------------------------------------------- run

struct SweepPoint {
  PolicyConfig policy;
};

struct PredictorSpec {
  enum class Kind { kTrained, kLut, kOracle } kind = Kind::kTrained;
  fs::path lut_path;
  std::size_t train_sentences = kDefaultTrainingSentences;
  std::size_t bins = 256;
  PredictorHyper hyper;
  bool hyper_seed_set = false;
};

PredictorSpec predictor_from(const json& j, const fs::path& base) {
  PredictorSpec p;
  if (j.is_null()) return p;
  if (!j.is_object()) throw ConfigError("predictor must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "lut") {
      p.kind = PredictorSpec::Kind::kLut;
      p.lut_path = base / value.get<std::string>();
    } else if (key == "oracle") {
      if (value.get<bool>()) p.kind = PredictorSpec::Kind::kOracle;
    } else if (key == "train_sentences") {
      p.train_sentences = value.get<std::size_t>();
    } else if (key == "bins") {
      p.bins = value.get<std::size_t>();
    } else if (key == "hyper") {
      p.hyper = value.get<PredictorHyper>();
      p.hyper_seed_set = value.contains("seed");
    } else {
      throw ConfigError("predictor: unknown key '" + key + "'");
    }
  }
  return p;
}

json sentence_row(std::size_t id, const SentenceResult& r, const PolicyConfig& p) {
  return json{{"sentence_id", id},
              {"policy", policy_name(p.policy)},
              {"n", p.tile_n},
              {"T_ms", p.latency_target_s * 1e3},
              {"E_T", p.entropy_threshold},
              {"exit_layer", r.exit_layer},
              {"predicted_layer", r.predicted_layer},
              {"latency_ms", r.latency_s * 1e3},
              {"energy", r.energy_j},
              {"deadline_met", r.deadline_met}};
}

const char* kCsvHeader = "sentence_id,policy,n,T_ms,E_T,exit_layer,predicted_layer,latency_ms,energy,deadline_met\n";

std::string csv_row(std::size_t id, const SentenceResult& r, const PolicyConfig& p) {
  std::ostringstream s;
  s << id << ',' << policy_name(p.policy) << ',' << p.tile_n << ',' << num(p.latency_target_s * 1e3) << ','
    << num(p.entropy_threshold) << ',' << r.exit_layer << ',' << r.predicted_layer << ',' << num(r.latency_s * 1e3)
    << ',' << num(r.energy_j) << ',' << (r.deadline_met ? "true" : "false") << '\n';
  return s.str();
}

json aggregate_json(const StreamReport& rep) {
  return json{{"sentences", rep.sentences.size()},
              {"mean_exit_layer", rep.mean_exit_layer},
              {"mean_latency_ms", rep.mean_latency_s * 1e3},
              {"mean_energy", rep.mean_energy_j},
              {"idle_energy", rep.idle_energy_j},
              {"total_energy", rep.total_energy_j},
              {"deadline_miss_rate", rep.deadline_miss_rate}};
}

int cmd_run(const GlobalOptions& g, const std::string& scenario_path, std::ostream& out) {
  const fs::path path(scenario_path);
  const json sc = read_json_file(path);
  if (!sc.is_object()) throw ConfigError("scenario must be a JSON object");
  const fs::path base = path.parent_path();
  static const std::vector<std::string> known{"name",     "seed",       "bundle", "synthetic_bundle", "hardware",
                                              "sentences", "policies",  "sweep",  "predictor"};
  for (const auto& item : sc.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw ConfigError("scenario: unknown key '" + item.key() + "'");
    }
  }

  const std::string name = sc.value("name", path.stem().string());
  const std::uint64_t seed = g.seed ? *g.seed : sc.value("seed", std::uint64_t{1});

  json bundle_info;
  std::shared_ptr<const EncoderBundle> bundle;
  if (sc.contains("bundle")) {
    const fs::path dir = base / sc.at("bundle").get<std::string>();
    bundle = std::make_shared<const EncoderBundle>(load_bundle(dir));
    bundle_info = json{{"path", sc.at("bundle")}};
  } else if (sc.contains("synthetic_bundle")) {
    const auto& sb = sc.at("synthetic_bundle");
    const auto cfg = encoder_from(sb.value("encoder", json("toy")));
    const auto opts = synthetic_from(sb.value("options", json()), seed);
    bundle = std::make_shared<const EncoderBundle>(make_synthetic_bundle(cfg, opts));
    bundle_info = json{{"synthetic", synthetic_to_json(opts)}};
  } else {
    throw ConfigError("scenario needs either 'bundle' or 'synthetic_bundle'");
  }
  const auto& ecfg = bundle->config;
  bundle_info["encoder"] = ecfg;

  HardwareConfig hw;
  if (sc.contains("hardware")) {
    const auto& h = sc.at("hardware");
    if (!h.is_object()) throw ConfigError("hardware must be an object");
    for (const auto& [key, value] : h.items()) {
      if (key == "vf_table") {
        hw.vf = load_section<VfTable>(value, base);
      } else if (key == "energy_model") {
        hw.energy = load_section<EnergyModel>(value, base);
      } else if (key == "ldo_adpll") {
        hw.ldo = load_section<LdoAdpllModel>(value, base);
      } else {
        throw ConfigError("hardware: unknown key '" + key + "'");
      }
    }
  }

  const json sent = sc.value("sentences", json::object());
  const std::size_t count = sent.value("count", std::size_t{100});
  const std::uint64_t sentence_seed = sent.value("seed", seed + 1);
  if (count == 0) throw ConfigError("sentences.count must be positive");
  const auto sentences = make_sentences(ecfg, count, sentence_seed);

  if (!sc.contains("policies") || !sc.at("policies").is_array() || sc.at("policies").empty()) {
    throw ConfigError("scenario needs a non-empty 'policies' array");
  }
  std::vector<PolicyConfig> policies;
  for (const auto& p : sc.at("policies")) policies.push_back(p.get<PolicyConfig>());

  std::vector<std::size_t> tiles;
  std::vector<double> targets_ms, thresholds;
  if (sc.contains("sweep")) {
    const auto& sw = sc.at("sweep");
    for (const auto& item : sw.items()) {
      if (item.key() == "tile_n") {
        tiles = item.value().get<std::vector<std::size_t>>();
      } else if (item.key() == "latency_target_ms") {
        targets_ms = item.value().get<std::vector<double>>();
      } else if (item.key() == "entropy_threshold") {
        thresholds = item.value().get<std::vector<double>>();
      } else {
        throw ConfigError("sweep: unknown axis '" + item.key() + "'");
      }
      if (item.value().empty()) throw ConfigError("sweep axis '" + item.key() + "' is empty");
    }
  }

  std::vector<PolicyConfig> points;
  for (const auto& p : policies) {
    const auto tl = tiles.empty() ? std::vector<std::size_t>{p.tile_n} : tiles;
    const auto tm = targets_ms.empty() ? std::vector<double>{p.latency_target_s * 1e3} : targets_ms;
    const auto et = thresholds.empty() ? std::vector<double>{p.entropy_threshold} : thresholds;
    for (auto t : tl)
      for (auto ms : tm)
        for (auto e : et) {
          PolicyConfig q = p;
          q.tile_n = t;
          q.latency_target_s = ms * 1e-3;
          q.entropy_threshold = e;
          q.validate();
          points.push_back(q);
        }
  }

  const PredictorSpec pspec = predictor_from(sc.value("predictor", json()), base);
  std::map<std::size_t, std::unique_ptr<Encoder>> encoders;
  auto encoder_for = [&](std::size_t tile) -> const Encoder& {
    auto& e = encoders[tile];
    if (!e) {
      ForwardOptions fo;
      fo.tile_n = tile;
      e = std::make_unique<Encoder>(bundle, fo);
    }
    return *e;
  };

  const bool needs_lai = std::any_of(points.begin(), points.end(),
                                     [](const PolicyConfig& p) { return p.policy == Policy::kLatencyAware; });
  std::vector<EntropyTrace> train_traces, stream_traces;
  json predictor_info;
  std::map<double, ExitPredictor> trained;
  if (needs_lai) {
    if (pspec.kind == PredictorSpec::Kind::kTrained) {
      const auto train_sents = make_sentences(ecfg, pspec.train_sentences, seed + 2);
      for (const auto& s : train_sents) train_traces.push_back(entropy_trace(encoder_for(16), s));
      predictor_info = json{{"kind", "trained"},
                            {"train_sentences", pspec.train_sentences},
                            {"train_sentence_seed", seed + 2},
                            {"bins", pspec.bins}};
    } else if (pspec.kind == PredictorSpec::Kind::kOracle) {
      for (const auto& s : sentences) stream_traces.push_back(entropy_trace(encoder_for(16), s));
      predictor_info = json{{"kind", "oracle"}};
    } else {
      predictor_info = json{{"kind", "lut"}, {"path", pspec.lut_path.generic_string()}};
    }
  }
  auto predictor_for = [&](const PolicyConfig& p) -> StreamPredictor {
    if (p.policy != Policy::kLatencyAware) return {};
    if (pspec.kind == PredictorSpec::Kind::kOracle) {
      return [&stream_traces, et = p.entropy_threshold](std::size_t i, double) {
        return true_exit_layer(stream_traces[i], et);
      };
    }
    auto it = trained.find(p.entropy_threshold);
    if (it == trained.end()) {
      ExitPredictor pred;
      if (pspec.kind == PredictorSpec::Kind::kLut) {
        pred = lut_from_json(read_json_file(pspec.lut_path), p.entropy_threshold, ecfg.num_layers);
      } else {
        PredictorHyper h = pspec.hyper;
        if (!pspec.hyper_seed_set) h.seed = seed + 3;
        pred = distill_lut(train_predictor(train_traces, p.entropy_threshold, ecfg.num_classes, h), pspec.bins);
        predictor_info["hyper"] = h;
      }
      it = trained.emplace(p.entropy_threshold, std::move(pred)).first;
    }
    const ExitPredictor* pred = &it->second;
    return [pred](std::size_t, double h1) { return predict_exit_layer(*pred, h1); };
  };

  json summary{{"schema_version", kReportSchemaVersion},
               {"command", "run"},
               {"scenario", name},
               {"seed", seed},
               {"bundle", bundle_info},
               {"hardware", hw},
               {"sentences", {{"count", count}, {"seed", sentence_seed}}},
               {"points", json::array()}};
  std::string csv = kCsvHeader;

  for (std::size_t idx = 0; idx < points.size(); ++idx) {
    const auto& p = points[idx];
    const auto rep = run_stream(encoder_for(p.tile_n), sentences, predictor_for(p), p, hw);
    json point{{"index", idx}, {"policy", p}, {"aggregate", aggregate_json(rep)}};
    if (p.policy == Policy::kLatencyAware) point["predictor"] = predictor_info;

    json rows = json::array();
    std::string point_csv = kCsvHeader;
    for (std::size_t i = 0; i < rep.sentences.size(); ++i) {
      rows.push_back(sentence_row(i, rep.sentences[i], p));
      const auto line = csv_row(i, rep.sentences[i], p);
      point_csv += line;
      csv += line;
    }
    if (!g.out.empty()) {
      const std::string stem = "point_" + std::to_string(idx) + "_" + policy_name(p.policy);
      const fs::path dir(g.out);
      if (g.format == "csv") {
        write_text_file(dir / (stem + ".csv"), point_csv);
      } else {
        json full = point;
        full["schema_version"] = kReportSchemaVersion;
        full["scenario"] = name;
        full["sentences"] = rows;
        write_text_file(dir / (stem + ".json"), dump(full));
      }
      point["report"] = stem + (g.format == "csv" ? ".csv" : ".json");
    } else if (g.format == "json") {
      point["sentences"] = rows;
    }
    summary["points"].push_back(point);
  }

  if (!g.out.empty()) {
    write_text_file(fs::path(g.out) / "summary.json", dump(summary));
    out << dump(summary);
  } else if (g.format == "csv") {
    out << csv;
  } else {
    out << dump(summary);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- train-predictor

int cmd_train_predictor(const GlobalOptions& g, const std::string& traces_path, double threshold,
                        std::optional<std::size_t> num_classes_flag, std::size_t bins, const std::string& hyper_path,
                        std::ostream& out) {
  const json doc = read_json_file(traces_path);
  std::size_t num_classes = 2;
  json arr = doc;
  if (doc.is_object()) {
    if (!doc.contains("traces")) throw ConfigError("traces file needs a 'traces' array");
    arr = doc.at("traces");
    num_classes = doc.value("num_classes", std::size_t{2});
  }
  if (num_classes_flag) num_classes = *num_classes_flag;
  std::vector<EntropyTrace> traces;
  try {
    traces = arr.get<std::vector<EntropyTrace>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed traces file: ") + e.what());
  }

  PredictorHyper hyper;
  if (!hyper_path.empty()) hyper = read_json_file(hyper_path).get<PredictorHyper>();
  if (g.seed) hyper.seed = *g.seed;
  const auto pred = distill_lut(train_predictor(traces, threshold, num_classes, hyper), bins);

  std::size_t exact = 0;
  for (const auto& t : traces) exact += predict_exit_layer(pred, t.front()) == true_exit_layer(t, threshold);

  std::string lut_text;
  if (g.format == "csv") {
    lut_text = "bin_upper_edge,predicted_layer\n";
    for (std::size_t i = 0; i < pred.lut_layers.size(); ++i) {
      lut_text += num(pred.lut_edges[i]) + "," + std::to_string(pred.lut_layers[i]) + "\n";
    }
  } else {
    lut_text = lut_to_json(pred).dump() + "\n";
  }
  if (g.out.empty()) {
    out << lut_text;
    return kExitOk;
  }
  write_text_file(g.out, lut_text);
  json summary{{"schema_version", kReportSchemaVersion},
               {"command", "train-predictor"},
               {"entropy_threshold", threshold},
               {"num_classes", num_classes},
               {"num_traces", traces.size()},
               {"num_layers", pred.num_layers},
               {"bins", bins},
               {"hyper", hyper},
               {"initial_loss", pred.loss_history.empty() ? 0.0 : pred.loss_history.front()},
               {"final_loss", pred.loss_history.empty() ? 0.0 : pred.loss_history.back()},
               {"train_exact_match", static_cast<double>(exact) / static_cast<double>(traces.size())},
               {"lut", g.out}};
  out << dump(summary);
  return kExitOk;
}

// ---------------------------------------------------------------- envm-trials

// Fraction of sentences whose final-layer class matches the fault-free model.
// Only sentences touching a changed embedding row are re-run.
AccuracyFn agreement_closure(const EncoderBundle& bundle, std::vector<std::vector<Token>> sentences) {
  auto ref_bundle = std::make_shared<const EncoderBundle>(bundle);
  auto classify = [](const Encoder& enc, const std::vector<Token>& s) {
    auto st = enc.begin(s);
    std::vector<double> logits;
    for (std::size_t l = 0; l < enc.config().num_layers; ++l) logits = enc.step(st).logits;
    return static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
  };
  auto reference = std::make_shared<std::vector<std::size_t>>();
  {
    const Encoder enc(ref_bundle);
    for (const auto& s : sentences) reference->push_back(classify(enc, s));
  }
  const auto ref_codes = std::make_shared<const QuantTensor>(decode_bitmask(bundle.embedding));
  auto shared_sentences = std::make_shared<const std::vector<std::vector<Token>>>(std::move(sentences));
  return [=](const BitmaskTensor& emb) {
    const auto codes = decode_bitmask(emb);
    const std::size_t e = ref_bundle->config.embed_dim;
    std::vector<bool> changed(ref_bundle->config.vocab_size, false);
    bool any = false;
    for (std::size_t i = 0; i < codes.codes.size(); ++i) {
      if (codes.codes[i] != ref_codes->codes[i]) {
        changed[i / e] = true;
        any = true;
      }
    }
    if (!any) return 1.0;
    auto faulty = std::make_shared<EncoderBundle>(*ref_bundle);
    faulty->embedding = emb;
    const Encoder enc(faulty);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < shared_sentences->size(); ++i) {
      const auto& s = (*shared_sentences)[i];
      const bool touched = std::any_of(s.begin(), s.end(), [&](Token t) { return changed[t]; }) ||
                           (s.size() < ref_bundle->config.seq_len && changed[kPadToken]);
      agree += !touched || classify(enc, s) == (*reference)[i];
    }
    return static_cast<double>(agree) / static_cast<double>(shared_sentences->size());
  };
}

int cmd_envm_trials(const GlobalOptions& g, const std::string& tensor_path, const std::string& config_path,
                    std::optional<std::size_t> trials_flag, std::ostream& out) {
  json cfg = config_path.empty() ? json::object() : read_json_file(config_path);
  if (!cfg.is_object()) throw ConfigError("envm config must be an object");
  CellConfig data = CellConfig::mlc2(), mask = CellConfig::slc();
  ConventionalMemoryModel conv;
  std::size_t trials = 100, sentence_count = 100, power_cycles = 1;
  for (const auto& [key, value] : cfg.items()) {
    if (key == "data_cells") {
      data = value.get<CellConfig>();
    } else if (key == "mask_cells") {
      mask = value.get<CellConfig>();
    } else if (key == "trials") {
      trials = value.get<std::size_t>();
    } else if (key == "sentences") {
      sentence_count = value.get<std::size_t>();
    } else if (key == "conventional_memory") {
      conv = value.get<ConventionalMemoryModel>();
    } else if (key == "power_cycles") {
      power_cycles = value.get<std::size_t>();
    } else {
      throw ConfigError("envm config: unknown key '" + key + "'");
    }
  }
  if (trials_flag) trials = *trials_flag;
  const std::uint64_t seed = g.seed ? *g.seed : 1;

  const fs::path tp(tensor_path);
  BitmaskTensor tensor;
  AccuracyFn evaluate;
  std::string metric;
  if (fs::is_directory(tp)) {
    const auto bundle = load_bundle(tp);
    tensor = bundle.embedding;
    evaluate = agreement_closure(bundle, make_sentences(bundle.config, sentence_count, seed + 1));
    metric = "model_agreement";
  } else {
    tensor = read_bitmask_file(tp);
    const auto source = tensor.payload;
    evaluate = [source](const BitmaskTensor& t) {
      if (source.empty()) return 1.0;
      std::size_t same = 0;
      for (std::size_t i = 0; i < std::min(source.size(), t.payload.size()); ++i) same += source[i] == t.payload[i];
      return static_cast<double>(same) / static_cast<double>(source.size());
    };
    metric = "payload_fidelity";
  }

  const auto stats = run_trials(tensor, data, mask, evaluate, trials, seed);
  const auto fp = storage_footprint(tensor);
  const double mb = static_cast<double>(fp.total) / (1024.0 * 1024.0);
  const auto cost = power_on_cost(tensor, data, mask, conv, power_cycles);

  if (g.format == "csv") {
    std::string text = "trial,seed,cell_flips,mask_bit_flips,weight_flips,corrupted,accuracy\n";
    for (std::size_t i = 0; i < stats.records.size(); ++i) {
      const auto& r = stats.records[i];
      text += std::to_string(i) + "," + std::to_string(r.seed) + "," + std::to_string(r.cell_flips) + "," +
              std::to_string(r.mask_bit_flips) + "," + std::to_string(r.weight_flips) + "," +
              (r.corrupted ? "true" : "false") + "," + num(r.accuracy) + "\n";
    }
    emit(g, out, text);
    return kExitOk;
  }

  json records = json::array();
  for (const auto& r : stats.records) {
    records.push_back({{"seed", r.seed},
                       {"cell_flips", r.cell_flips},
                       {"mask_bit_flips", r.mask_bit_flips},
                       {"weight_flips", r.weight_flips},
                       {"corrupted", r.corrupted},
                       {"accuracy", r.accuracy}});
  }
  const auto data_geo = envm_geometry(data, static_cast<double>(fp.payload_bytes) / (1024.0 * 1024.0));
  const auto mask_geo = envm_geometry(mask, static_cast<double>(fp.mask_bytes) / (1024.0 * 1024.0));
  json report{{"schema_version", kReportSchemaVersion},
              {"command", "envm-trials"},
              {"tensor", tensor_path},
              {"seed", seed},
              {"metric", metric},
              {"data_cells", data},
              {"mask_cells", mask},
              {"footprint", {{"payload_bytes", fp.payload_bytes}, {"mask_bytes", fp.mask_bytes}, {"total_bytes", fp.total},
                             {"megabytes", mb}}},
              {"geometry", {{"data_area_mm2", data_geo.area_mm2},
                            {"data_read_latency_ns", data_geo.read_latency_ns},
                            {"mask_area_mm2", mask_geo.area_mm2},
                            {"mask_read_latency_ns", mask_geo.read_latency_ns}}},
              {"trials", {{"count", stats.trials},
                          {"fault_free_accuracy", stats.fault_free_accuracy},
                          {"mean_accuracy", stats.mean_accuracy},
                          {"min_accuracy", stats.min_accuracy},
                          {"records", records}}},
              {"power_on", {{"calibrated", true},
                            {"conventional_memory", conv},
                            {"power_cycles", cost.power_cycles},
                            {"envm_latency_ns", cost.envm.latency_ns},
                            {"envm_energy_j", cost.envm.energy_j},
                            {"conventional_latency_ns", cost.conventional.latency_ns},
                            {"conventional_energy_j", cost.conventional.energy_j},
                            {"latency_ratio", cost.latency_ratio},
                            {"energy_ratio", cost.energy_ratio},
                            {"energy_saved_j", cost.energy_saved_j}}}};
  emit(g, out, dump(report));
  return kExitOk;
}

// ---------------------------------------------------------------- flops

int cmd_flops(const GlobalOptions& g, const std::string& spans_path, const std::string& config_path,
              std::ostream& out) {
  const json doc = read_json_file(spans_path);
  EncoderConfig cfg = EncoderConfig::albert_base();
  json spans_json = doc;
  if (doc.is_object()) {
    if (!doc.contains("spans")) throw ConfigError("spans file needs a 'spans' array");
    spans_json = doc.at("spans");
    if (doc.contains("encoder")) cfg = encoder_from(doc.at("encoder"));
  }
  if (!config_path.empty()) cfg = encoder_from(read_json_file(config_path));
  AttentionSpans spans;
  try {
    spans.spans = spans_json.get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed spans: ") + e.what());
  }
  const auto r = flops_count(spans, cfg);
  if (g.format == "csv") {
    emit(g, out,
         "dense_flops,predicated_flops,ratio,active_heads\n" + num(r.dense_flops) + "," + num(r.predicated_flops) +
             "," + num(r.ratio) + "," + std::to_string(spans.active_heads()) + "\n");
    return kExitOk;
  }
  json report{{"schema_version", kReportSchemaVersion},
              {"command", "flops"},
              {"encoder", cfg},
              {"spans", spans.spans},
              {"active_heads", spans.active_heads()},
              {"dense_flops", r.dense_flops},
              {"predicated_flops", r.predicated_flops},
              {"ratio", r.ratio}};
  emit(g, out, dump(report));
  return kExitOk;
}

// ---------------------------------------------------------------- gen-bundle / gen-traces

int cmd_gen_bundle(const GlobalOptions& g, const std::string& config_path, std::ostream& out) {
  if (g.out.empty()) throw ConfigError("gen-bundle requires --out <directory>");
  json cfg = config_path.empty() ? json::object() : read_json_file(config_path);
  if (!cfg.is_object()) throw ConfigError("bundle config must be an object");
  for (const auto& item : cfg.items()) {
    if (item.key() != "encoder" && item.key() != "options") {
      throw ConfigError("bundle config: unknown key '" + item.key() + "'");
    }
  }
  const auto ecfg = encoder_from(cfg.value("encoder", json("toy")));
  auto opts = synthetic_from(cfg.value("options", json()), 1);
  if (g.seed) opts.seed = *g.seed;
  const auto bundle = make_synthetic_bundle(ecfg, opts);
  save_bundle(g.out, bundle);
  const auto fp = storage_footprint(bundle.embedding);
  out << dump(json{{"schema_version", kReportSchemaVersion},
                   {"command", "gen-bundle"},
                   {"bundle", g.out},
                   {"encoder", ecfg},
                   {"options", synthetic_to_json(opts)},
                   {"embedding", {{"payload_bytes", fp.payload_bytes},
                                  {"mask_bytes", fp.mask_bytes},
                                  {"density", sparsity(bundle.embedding).density}}}});
  return kExitOk;
}

int cmd_gen_traces(const GlobalOptions& g, const std::string& bundle_path, std::size_t count, std::ostream& out) {
  const auto bundle = std::make_shared<const EncoderBundle>(load_bundle(bundle_path));
  const Encoder enc(bundle);
  const std::uint64_t seed = g.seed ? *g.seed : 1;
  const auto sentences = make_sentences(bundle->config, count, seed);
  if (g.format == "csv") {
    std::string text = "sentence_id";
    for (std::size_t l = 1; l <= bundle->config.num_layers; ++l) text += ",H" + std::to_string(l);
    text += "\n";
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      text += std::to_string(i);
      for (double h : entropy_trace(enc, sentences[i])) text += "," + num(h);
      text += "\n";
    }
    emit(g, out, text);
    return kExitOk;
  }
  json traces = json::array();
  for (const auto& s : sentences) traces.push_back(entropy_trace(enc, s));
  emit(g, out,
       dump(json{{"schema_version", kReportSchemaVersion},
                 {"num_classes", bundle->config.num_classes},
                 {"num_layers", bundle->config.num_layers},
                 {"sentence_seed", seed},
                 {"traces", traces}}));
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"eesim: early-exit transformer accelerator simulator", "eesim"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Master seed");
  app.add_option("--out", g.out, "Output file (or directory for run/gen-bundle)");
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"json", "csv"}));

  std::string scenario;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario (policies x sweep points)");
  run_cmd->add_option("scenario", scenario, "Scenario JSON file")->required();

  std::string traces_path, hyper_path;
  double threshold = 0.0;
  std::size_t bins = 256, num_classes = 2;
  auto* train_cmd = app.add_subcommand("train-predictor", "Train the exit predictor and write its LUT");
  train_cmd->add_option("traces", traces_path, "Entropy traces JSON")->required();
  train_cmd->add_option("--threshold", threshold, "Entropy threshold E_T")->required();
  auto* classes_opt = train_cmd->add_option("--num-classes", num_classes, "Override the class count K");
  train_cmd->add_option("--bins", bins, "LUT bins")->check(CLI::PositiveNumber);
  train_cmd->add_option("--hyper", hyper_path, "Predictor hyper-parameter JSON");

  std::string tensor_path, envm_config;
  std::size_t trials = 100;
  auto* envm_cmd = app.add_subcommand("envm-trials", "Fault-injection campaign on an embedding tensor or bundle");
  envm_cmd->add_option("tensor", tensor_path, "Bitmask tensor file or bundle directory")->required();
  envm_cmd->add_option("--config", envm_config, "eNVM campaign JSON");
  auto* trials_opt = envm_cmd->add_option("--trials", trials, "Trial count")->check(CLI::PositiveNumber);

  std::string spans_path, encoder_config;
  auto* flops_cmd = app.add_subcommand("flops", "FLOPs with and without span predication");
  flops_cmd->add_option("spans", spans_path, "Attention spans JSON")->required();
  flops_cmd->add_option("--config", encoder_config, "Encoder config JSON (default ALBERT-base)");

  std::string bundle_config;
  auto* gen_cmd = app.add_subcommand("gen-bundle", "Write a synthetic encoder bundle");
  gen_cmd->add_option("config", bundle_config, "Bundle generation JSON");

  std::string bundle_path;
  std::size_t count = 300;
  auto* traces_cmd = app.add_subcommand("gen-traces", "Write per-layer entropy traces for random sentences");
  traces_cmd->add_option("bundle", bundle_path, "Bundle directory")->required();
  traces_cmd->add_option("--count", count, "Sentence count")->check(CLI::PositiveNumber);

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  if (seed_opt->count() > 0) g.seed = seed_value;

  try {
    if (run_cmd->parsed()) return cmd_run(g, scenario, out);
    if (train_cmd->parsed()) {
      return cmd_train_predictor(g, traces_path, threshold,
                                 classes_opt->count() ? std::optional<std::size_t>(num_classes) : std::nullopt, bins,
                                 hyper_path, out);
    }
    if (envm_cmd->parsed()) {
      return cmd_envm_trials(g, tensor_path, envm_config,
                             trials_opt->count() ? std::optional<std::size_t>(trials) : std::nullopt, out);
    }
    if (flops_cmd->parsed()) return cmd_flops(g, spans_path, encoder_config, out);
    if (gen_cmd->parsed()) return cmd_gen_bundle(g, bundle_config, out);
    if (traces_cmd->parsed()) return cmd_gen_traces(g, bundle_path, count, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const IoError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace eesim::cli
