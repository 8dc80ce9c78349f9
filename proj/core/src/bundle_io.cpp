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


#include "eesim/bundle_io.hpp"

#include <fstream>
#include <string>

#include "eesim/config_io.hpp"
#include "eesim/error.hpp"

namespace eesim {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kEmbeddingFile = "embedding.bmt";

json tensor_entry(const std::string& file, const QuantTensor& q) {
  return json{{"file", file},
              {"shape", q.shape},
              {"exponent_bits", q.format.exponent_bits},
              {"exponent_bias", q.format.exponent_bias}};
}

void write_codes(const fs::path& path, const QuantTensor& q) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(q.codes.data()), static_cast<std::streamsize>(q.codes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

QuantTensor read_tensor(const fs::path& dir, const json& entry, const std::string& name) {
  try {
    const auto file = entry.at("file").get<std::string>();
    Shape shape = entry.at("shape").get<Shape>();
    FloatFormat fmt{entry.at("exponent_bits").get<int>(), entry.at("exponent_bias").get<int>()};
    fmt.validate();
    const fs::path path = dir / file;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> codes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (codes.size() != element_count(shape)) throw ConfigError(path.string() + " has the wrong size for its shape");
    return QuantTensor(std::move(shape), std::move(codes), fmt);
  } catch (const json::exception& e) {
    throw ConfigError("manifest entry '" + name + "': " + e.what());
  } catch (const InvalidInput& e) {
    throw ConfigError("manifest entry '" + name + "': " + e.what());
  }
}

}  // namespace

void save_bundle(const fs::path& dir, const EncoderBundle& b) {
  b.validate();
  fs::create_directories(dir);
  json tensors = json::object();
  auto dense = [&](const std::string& name, const QuantTensor& q) {
    const std::string file = name + ".q8";
    write_codes(dir / file, q);
    tensors[name] = tensor_entry(file, q);
  };
  dense("embed_proj", b.embed_proj);
  dense("wq", b.wq);
  dense("wk", b.wk);
  dense("wv", b.wv);
  dense("wo", b.wo);
  dense("ffn_in", b.ffn_in);
  dense("ffn_out", b.ffn_out);
  json ramps = json::array();
  for (std::size_t l = 0; l < b.off_ramps.size(); ++l) {
    const std::string file = "off_ramp_" + std::to_string(l + 1) + ".q8";
    write_codes(dir / file, b.off_ramps[l]);
    ramps.push_back(tensor_entry(file, b.off_ramps[l]));
  }
  write_bitmask_file(dir / kEmbeddingFile, b.embedding);

  json manifest{{"format_version", kBundleFormatVersion},
                {"config", b.config},
                {"attention_spans", b.spans.spans},
                {"embedding", kEmbeddingFile},
                {"tensors", tensors},
                {"off_ramps", ramps},
                {"attn_norm", {{"gamma", b.attn_norm.gamma}, {"beta", b.attn_norm.beta}}},
                {"ffn_norm", {{"gamma", b.ffn_norm.gamma}, {"beta", b.ffn_norm.beta}}}};
  write_text_file(dir / kManifest, manifest.dump(2) + "\n");
}

EncoderBundle load_bundle(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("bundle directory " + dir.string() + " does not exist");
  const json m = read_json_file(dir / kManifest);
  EncoderBundle b;
  try {
    if (m.at("format_version").get<int>() != kBundleFormatVersion) throw ConfigError("unsupported bundle version");
    b.config = m.at("config").get<EncoderConfig>();
    b.spans.spans = m.at("attention_spans").get<std::vector<std::size_t>>();
    b.embedding = read_bitmask_file(dir / m.at("embedding").get<std::string>());
    const auto& t = m.at("tensors");
    b.embed_proj = read_tensor(dir, t.at("embed_proj"), "embed_proj");
    b.wq = read_tensor(dir, t.at("wq"), "wq");
    b.wk = read_tensor(dir, t.at("wk"), "wk");
    b.wv = read_tensor(dir, t.at("wv"), "wv");
    b.wo = read_tensor(dir, t.at("wo"), "wo");
    b.ffn_in = read_tensor(dir, t.at("ffn_in"), "ffn_in");
    b.ffn_out = read_tensor(dir, t.at("ffn_out"), "ffn_out");
    for (const auto& r : m.at("off_ramps")) b.off_ramps.push_back(read_tensor(dir, r, "off_ramp"));
    b.attn_norm.gamma = m.at("attn_norm").at("gamma").get<std::vector<double>>();
    b.attn_norm.beta = m.at("attn_norm").at("beta").get<std::vector<double>>();
    b.ffn_norm.gamma = m.at("ffn_norm").at("gamma").get<std::vector<double>>();
    b.ffn_norm.beta = m.at("ffn_norm").at("beta").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ConfigError("bundle manifest: " + std::string(e.what()));
  }
  b.validate();
  return b;
}

}  // namespace eesim
