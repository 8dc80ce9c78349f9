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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "eesim/numerics.hpp"

namespace eesim {

// Bitmask-compressed tensor. The mask holds one bit per element in row-major
// order, LSB-first within each byte; a set bit marks a payload entry. Only the
// +0 code (0x00) is treated as zero.
struct BitmaskTensor {
  Shape shape;
  std::vector<std::uint8_t> mask;     // ceil(N / 8) bytes
  std::vector<std::uint8_t> payload;  // codes of nonzero elements in mask order
  FloatFormat format;

  std::size_t size() const { return element_count(shape); }
  bool mask_bit(std::size_t i) const { return (mask[i / 8] >> (i % 8)) & 1u; }

  bool operator==(const BitmaskTensor&) const = default;
};

struct SparsityStats {
  std::size_t total = 0;
  std::size_t nonzero = 0;
  double density = 0.0;
};

struct StorageFootprint {
  std::size_t payload_bytes = 0;
  std::size_t mask_bytes = 0;
  std::size_t total = 0;
};

std::size_t popcount(std::span<const std::uint8_t> bytes);

BitmaskTensor encode_bitmask(const QuantTensor& x);

// Throws ConfigError if popcount(mask) differs from the payload length or the
// mask length does not match the shape.
QuantTensor decode_bitmask(const BitmaskTensor& s);

SparsityStats sparsity(const BitmaskTensor& s);
SparsityStats sparsity(const QuantTensor& q);

// Zeroes the ceil((1 - d) * N) smallest-magnitude elements; ties go to the
// lower flat index first. Throws InvalidInput unless 0 < d <= 1.
RealTensor magnitude_prune(const RealTensor& x, double target_density);

StorageFootprint storage_footprint(const BitmaskTensor& s);

// Binary layout (little-endian):
//   0  char[4] magic "EBMK"
//   4  u16     version (1)
//   6  u16     rank
//   8  u8      exponent_bits
//   9  i8      exponent_bias
//  10  u16     reserved (0)
//  12  u32     payload length
//  16  u32     dims[rank]
//      u8      mask[ceil(N / 8)]
//      u8      payload[payload length]
inline constexpr std::uint16_t kBitmaskFormatVersion = 1;

std::vector<std::uint8_t> serialize(const BitmaskTensor& s);
BitmaskTensor deserialize_bitmask(std::span<const std::uint8_t> bytes);

void write_bitmask_file(const std::filesystem::path& path, const BitmaskTensor& s);
BitmaskTensor read_bitmask_file(const std::filesystem::path& path);

}  // namespace eesim
