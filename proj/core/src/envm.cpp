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


#include "eesim/envm.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "eesim/error.hpp"

namespace eesim {

namespace {

double gaussian_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

CellConfig make_cell(const char* name, int bits, double misread, double density, double latency) {
  CellConfig c;
  c.name = name;
  c.bits_per_cell = bits;
  c.level_sigma = sigma_for_misread(bits, misread);
  c.area_density_mm2_per_mb = density;
  c.read_latency_ns = latency;
  return c;
}

void perturb(std::vector<std::uint8_t>& cells, const CellConfig& cfg, std::mt19937_64& rng,
             std::vector<double>* analog) {
  const double top = static_cast<double>(cfg.levels() - 1);
  if (cfg.level_sigma == 0.0) {
    if (analog) analog->insert(analog->end(), cells.begin(), cells.end());
    return;
  }
  std::normal_distribution<double> noise(0.0, cfg.level_sigma);
  for (auto& c : cells) {
    const double v = static_cast<double>(c) + noise(rng);
    if (analog) analog->push_back(v);
    c = static_cast<std::uint8_t>(std::clamp(std::nearbyint(v), 0.0, top));
  }
}

std::size_t count_differences(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  std::size_t n = std::max(a.size(), b.size()) - std::min(a.size(), b.size());
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) n += a[i] != b[i];
  return n;
}

}  // namespace

CellConfig CellConfig::slc() { return make_cell("SLC", 1, kSlcMisreadTarget, 0.28, 1.21); }
CellConfig CellConfig::mlc2() { return make_cell("MLC2", 2, kMlc2MisreadTarget, 0.08, 1.54); }
CellConfig CellConfig::mlc3() { return make_cell("MLC3", 3, kMlc3MisreadTarget, 0.04, 2.96); }

void CellConfig::validate() const {
  if (bits_per_cell < 1 || bits_per_cell > 3) throw InvalidInput("bits_per_cell must be 1, 2 or 3");
  if (!(level_sigma >= 0.0) || !std::isfinite(level_sigma)) throw InvalidInput("level_sigma must be >= 0");
  if (!(area_density_mm2_per_mb >= 0.0) || !(read_latency_ns >= 0.0) || !(read_energy_j_per_bit >= 0.0)) {
    throw InvalidInput("cell geometry and energy figures must be non-negative");
  }
}

double misread_probability(int bits_per_cell, double sigma) {
  if (bits_per_cell < 1) throw InvalidInput("bits_per_cell must be positive");
  if (sigma <= 0.0) return 0.0;
  const double levels = static_cast<double>(1 << bits_per_cell);
  return 2.0 * (levels - 1.0) / levels * gaussian_tail(0.5 / sigma);
}

double sigma_for_misread(int bits_per_cell, double probability) {
  const double levels = static_cast<double>(1 << bits_per_cell);
  if (!(probability > 0.0 && probability < (levels - 1.0) / levels)) {
    throw InvalidInput("target misread probability out of range");
  }
  double lo = 1e-6, hi = 1e3;
  for (int i = 0; i < 200; ++i) {
    const double mid = std::sqrt(lo * hi);
    (misread_probability(bits_per_cell, mid) < probability ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

EnvmImage pack_embeddings(const BitmaskTensor& s, const CellConfig& data_cfg, const CellConfig& mask_cfg) {
  data_cfg.validate();
  mask_cfg.validate();
  if (mask_cfg.bits_per_cell != 1) throw InvalidInput("mask cells must be single-level");
  if (s.mask.size() != (s.size() + 7) / 8) throw InvalidInput("bitmask length does not match the shape");

  EnvmImage img;
  img.shape = s.shape;
  img.format = s.format;
  img.payload_length = s.payload.size();
  img.mask_config = mask_cfg;
  img.data_config = data_cfg;

  const std::size_t n = s.size();
  img.mask_cells.resize(n);
  for (std::size_t i = 0; i < n; ++i) img.mask_cells[i] = s.mask_bit(i) ? 1 : 0;

  const int b = data_cfg.bits_per_cell, per = data_cfg.cells_per_byte();
  const unsigned cell_mask = (1u << b) - 1u;
  img.data_cells.reserve(s.payload.size() * static_cast<std::size_t>(per));
  for (std::uint8_t byte : s.payload) {
    for (int c = 0; c < per; ++c) img.data_cells.push_back(static_cast<std::uint8_t>((byte >> (c * b)) & cell_mask));
  }
  return img;
}

EnvmImage inject_faults(const EnvmImage& img, std::uint64_t seed, std::vector<double>* analog) {
  EnvmImage out = img;
  if (analog) analog->clear();
  std::seed_seq mask_seq{seed, std::uint64_t{0}};
  std::seed_seq data_seq{seed, std::uint64_t{1}};
  std::mt19937_64 mask_rng(mask_seq), data_rng(data_seq);
  perturb(out.mask_cells, out.mask_config, mask_rng, analog);
  perturb(out.data_cells, out.data_config, data_rng, analog);
  return out;
}

ReadoutResult readout(const EnvmImage& img) {
  ReadoutResult r;
  auto& s = r.tensor;
  s.shape = img.shape;
  s.format = img.format;
  s.mask.assign((img.mask_cells.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < img.mask_cells.size(); ++i) {
    if (img.mask_cells[i] & 1u) s.mask[i / 8] = static_cast<std::uint8_t>(s.mask[i / 8] | (1u << (i % 8)));
  }

  const int b = img.data_config.bits_per_cell, per = img.data_config.cells_per_byte();
  const std::size_t stored = img.data_cells.size() / static_cast<std::size_t>(per);
  s.payload.resize(stored);
  for (std::size_t k = 0; k < stored; ++k) {
    unsigned v = 0;
    for (int c = 0; c < per; ++c) v |= static_cast<unsigned>(img.data_cells[k * per + c]) << (c * b);
    s.payload[k] = static_cast<std::uint8_t>(v & 0xFFu);
  }

  const std::size_t expected = popcount(s.mask);
  if (expected != s.payload.size() || stored != img.payload_length) {
    r.corrupted = true;
    s.payload.resize(expected, kZeroCode);
  }
  return r;
}

TrialStats run_trials(const BitmaskTensor& s, const CellConfig& data_cfg, const CellConfig& mask_cfg,
                      const AccuracyFn& evaluate, std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw InvalidInput("run_trials requires at least one trial");
  if (!evaluate) throw InvalidInput("run_trials requires an evaluation closure");
  const EnvmImage clean = pack_embeddings(s, data_cfg, mask_cfg);

  TrialStats st;
  st.trials = trials;
  st.fault_free_accuracy = evaluate(s);
  st.min_accuracy = 1e300;
  double sum = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    TrialRecord rec;
    rec.seed = seed + i;
    const EnvmImage faulty = inject_faults(clean, rec.seed);
    rec.cell_flips = count_differences(clean.mask_cells, faulty.mask_cells) +
                     count_differences(clean.data_cells, faulty.data_cells);
    rec.mask_bit_flips = count_differences(clean.mask_cells, faulty.mask_cells);
    const auto out = readout(faulty);
    rec.corrupted = out.corrupted;
    rec.weight_flips = count_differences(s.payload, out.tensor.payload);
    rec.accuracy = rec.cell_flips == 0 ? st.fault_free_accuracy : evaluate(out.tensor);
    sum += rec.accuracy;
    st.min_accuracy = std::min(st.min_accuracy, rec.accuracy);
    st.records.push_back(rec);
  }
  st.mean_accuracy = sum / static_cast<double>(trials);
  // Guard the invariant against accumulated rounding in the mean.
  if (st.mean_accuracy < st.min_accuracy) st.mean_accuracy = st.min_accuracy;
  return st;
}

Geometry envm_geometry(const CellConfig& cfg, double megabytes) {
  if (!(megabytes >= 0.0)) throw InvalidInput("megabytes must be non-negative");
  return Geometry{cfg.area_density_mm2_per_mb * megabytes, cfg.read_latency_ns};
}

void ConventionalMemoryModel::validate() const {
  for (double v : {dram_read_ns_per_byte, sram_write_ns_per_byte, sram_read_ns_per_byte, dram_read_j_per_byte,
                   sram_write_j_per_byte, sram_read_j_per_byte}) {
    if (!(v >= 0.0)) throw ConfigError("memory cost constants must be non-negative");
  }
  if (!(envm_read_width_bytes > 0.0)) throw ConfigError("eNVM read width must be positive");
}

PowerOnReport power_on_cost(const BitmaskTensor& s, const CellConfig& data_cfg, const CellConfig& mask_cfg,
                            const ConventionalMemoryModel& conv, std::size_t power_cycles) {
  conv.validate();
  const auto fp = storage_footprint(s);
  const double mask = static_cast<double>(fp.mask_bytes), payload = static_cast<double>(fp.payload_bytes);
  const double bytes = mask + payload;
  const double cycles = static_cast<double>(power_cycles);

  PowerOnReport r;
  r.power_cycles = power_cycles;
  r.bytes = fp.total;
  auto accesses = [&](double b) { return std::ceil(b / conv.envm_read_width_bytes); };
  r.envm.latency_ns = cycles * (accesses(mask) * mask_cfg.read_latency_ns + accesses(payload) * data_cfg.read_latency_ns);
  r.envm.energy_j = cycles * 8.0 * (mask * mask_cfg.read_energy_j_per_bit + payload * data_cfg.read_energy_j_per_bit);
  r.conventional.latency_ns =
      cycles * bytes * (conv.dram_read_ns_per_byte + conv.sram_write_ns_per_byte + conv.sram_read_ns_per_byte);
  r.conventional.energy_j =
      cycles * bytes * (conv.dram_read_j_per_byte + conv.sram_write_j_per_byte + conv.sram_read_j_per_byte);
  if (r.envm.latency_ns > 0.0) r.latency_ratio = r.conventional.latency_ns / r.envm.latency_ns;
  if (r.envm.energy_j > 0.0) r.energy_ratio = r.conventional.energy_j / r.envm.energy_j;
  r.energy_saved_j = r.conventional.energy_j - r.envm.energy_j;
  return r;
}

}  // namespace eesim
