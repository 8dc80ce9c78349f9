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

#include "eesim/sparse.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>

#include "eesim/error.hpp"

namespace eesim {

namespace {

constexpr char kMagic[4] = {'E', 'B', 'M', 'K'};
constexpr std::size_t kHeaderBytes = 16;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return v;
}

}  // namespace

std::size_t popcount(std::span<const std::uint8_t> bytes) {
  std::size_t n = 0;
  for (auto b : bytes) n += static_cast<std::size_t>(std::popcount(b));
  return n;
}

BitmaskTensor encode_bitmask(const QuantTensor& x) {
  BitmaskTensor s;
  s.shape = x.shape;
  s.format = x.format;
  s.mask.assign((x.codes.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < x.codes.size(); ++i) {
    if (x.codes[i] != kZeroCode) {
      s.mask[i / 8] = static_cast<std::uint8_t>(s.mask[i / 8] | (1u << (i % 8)));
      s.payload.push_back(x.codes[i]);
    }
  }
  return s;
}

QuantTensor decode_bitmask(const BitmaskTensor& s) {
  const std::size_t n = s.size();
  if (s.mask.size() != (n + 7) / 8) throw ConfigError("bitmask length does not match the tensor shape");
  if (popcount(s.mask) != s.payload.size()) {
    throw ConfigError("bitmask popcount " + std::to_string(popcount(s.mask)) + " differs from payload length " +
                      std::to_string(s.payload.size()));
  }
  std::vector<std::uint8_t> codes(n, kZeroCode);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (s.mask_bit(i)) codes[i] = s.payload[next++];
  }
  return QuantTensor(s.shape, std::move(codes), s.format);
}

SparsityStats sparsity(const BitmaskTensor& s) {
  SparsityStats st;
  st.total = s.size();
  st.nonzero = s.payload.size();
  st.density = st.total == 0 ? 0.0 : static_cast<double>(st.nonzero) / static_cast<double>(st.total);
  return st;
}

SparsityStats sparsity(const QuantTensor& q) {
  SparsityStats st;
  st.total = q.codes.size();
  st.nonzero = static_cast<std::size_t>(std::count_if(q.codes.begin(), q.codes.end(),
                                                      [](std::uint8_t c) { return c != kZeroCode; }));
  st.density = st.total == 0 ? 0.0 : static_cast<double>(st.nonzero) / static_cast<double>(st.total);
  return st;
}

RealTensor magnitude_prune(const RealTensor& x, double target_density) {
  if (!(target_density > 0.0 && target_density <= 1.0)) {
    throw InvalidInput("target density must lie in (0, 1]");
  }
  const std::size_t n = x.data.size();
  // Guard against (1 - d) * N landing a hair above an integer.
  const double raw = (1.0 - target_density) * static_cast<double>(n);
  const auto to_zero = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::fabs(x.data[a]) < std::fabs(x.data[b]); });

  RealTensor out = x;
  for (std::size_t i = 0; i < std::min(to_zero, n); ++i) out.data[order[i]] = 0.0;
  return out;
}

StorageFootprint storage_footprint(const BitmaskTensor& s) {
  StorageFootprint f;
  f.payload_bytes = s.payload.size();
  f.mask_bytes = (s.size() + 7) / 8;
  if (s.shape.empty() || s.size() == 0) f.mask_bytes = 0;
  f.total = f.payload_bytes + f.mask_bytes;
  return f;
}

std::vector<std::uint8_t> serialize(const BitmaskTensor& s) {
  if (s.format.exponent_bias < -128 || s.format.exponent_bias > 127) {
    throw InvalidInput("exponent bias does not fit the on-disk i8 field");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + 4 * s.shape.size() + s.mask.size() + s.payload.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u16(out, kBitmaskFormatVersion);
  put_u16(out, static_cast<std::uint16_t>(s.shape.size()));
  out.push_back(static_cast<std::uint8_t>(s.format.exponent_bits));
  out.push_back(static_cast<std::uint8_t>(static_cast<std::int8_t>(s.format.exponent_bias)));
  put_u16(out, 0);
  put_u32(out, static_cast<std::uint32_t>(s.payload.size()));
  for (auto d : s.shape) put_u32(out, static_cast<std::uint32_t>(d));
  out.insert(out.end(), s.mask.begin(), s.mask.end());
  out.insert(out.end(), s.payload.begin(), s.payload.end());
  return out;
}

BitmaskTensor deserialize_bitmask(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ConfigError("not a bitmask tensor file (bad magic)");
  }
  if (get_u16(bytes, 4) != kBitmaskFormatVersion) throw ConfigError("unsupported bitmask tensor version");
  const std::size_t rank = get_u16(bytes, 6);
  BitmaskTensor s;
  s.format.exponent_bits = bytes[8];
  s.format.exponent_bias = static_cast<std::int8_t>(bytes[9]);
  s.format.validate();
  const std::size_t payload_len = get_u32(bytes, 12);

  std::size_t at = kHeaderBytes;
  if (bytes.size() < at + 4 * rank) throw ConfigError("truncated bitmask tensor header");
  for (std::size_t i = 0; i < rank; ++i, at += 4) s.shape.push_back(get_u32(bytes, at));
  const std::size_t mask_len = (element_count(s.shape) + 7) / 8;
  if (bytes.size() != at + mask_len + payload_len) throw ConfigError("bitmask tensor file has the wrong length");
  s.mask.assign(bytes.begin() + static_cast<std::ptrdiff_t>(at), bytes.begin() + static_cast<std::ptrdiff_t>(at + mask_len));
  at += mask_len;
  s.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(at), bytes.end());
  if (popcount(s.mask) != s.payload.size()) throw ConfigError("bitmask popcount does not match payload length");
  return s;
}

void write_bitmask_file(const std::filesystem::path& path, const BitmaskTensor& s) {
  const auto bytes = serialize(s);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

BitmaskTensor read_bitmask_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_bitmask(bytes);
}

}  // namespace eesim
