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

// Adaptive 8-bit floating point and the fixed-point vector MAC datapath.
//
// Code layout: [sign | exponent field (e bits) | mantissa (7 - e bits)].
// The value of a nonzero magnitude is (1 + mant / 2^m) * 2^(exp_field + bias).
// Magnitude bits 0 encode zero (0x00 = +0, 0x80 = -0); there are no
// subnormals and no inf/NaN codes.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace eesim {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);

struct FloatFormat {
  static constexpr int kTotalBits = 8;

  int exponent_bits = 4;
  int exponent_bias = 0;

  int mantissa_bits() const { return kTotalBits - 1 - exponent_bits; }

  // Throws InvalidInput unless 1 <= exponent_bits <= 6.
  void validate() const;

  double max_value() const;
  double min_positive() const;

  bool operator==(const FloatFormat&) const = default;
};

inline constexpr std::uint8_t kZeroCode = 0x00;
inline constexpr std::uint8_t kNegZeroCode = 0x80;

inline bool is_zero_code(std::uint8_t code) { return (code & 0x7F) == 0; }

double decode(std::uint8_t code, const FloatFormat& fmt);

// Round-to-nearest-even onto the code grid, saturating at max_value().
// Exact -0.0 keeps its sign; magnitudes that round to zero become +0.
std::uint8_t encode(double value, const FloatFormat& fmt);

// Decode table for all 256 codes.
std::array<double, 256> decode_table(const FloatFormat& fmt);

// Dense real-valued tensor, row-major.
struct RealTensor {
  Shape shape;
  std::vector<double> data;

  RealTensor() = default;
  RealTensor(Shape s, std::vector<double> d);
  static RealTensor zeros(Shape s);
};

struct QuantTensor {
  Shape shape;
  std::vector<std::uint8_t> codes;
  FloatFormat format;

  QuantTensor() = default;
  QuantTensor(Shape s, std::vector<std::uint8_t> c, FloatFormat f);

  std::size_t rows() const;  // shape[0] for rank-2 tensors
  std::size_t cols() const;  // shape[1] for rank-2 tensors

  bool operator==(const QuantTensor&) const = default;
};

// Smallest bias for which max(|values|) does not overflow the format.
// All-zero input yields 0; non-finite input throws InvalidInput.
int fit_exponent_bias(std::span<const double> values, const FloatFormat& fmt);

QuantTensor quantize(const RealTensor& values, const FloatFormat& fmt);

// Fits the per-tensor bias, then quantizes.
QuantTensor quantize_fitted(const RealTensor& values, int exponent_bits);

RealTensor dequantize(const QuantTensor& q);

// Saturating signed fixed-point accumulator (32 bits total).
struct Accumulator {
  std::int32_t raw = 0;
  int integer_bits = 16;
  int fractional_bits = 16;

  double value() const;
  Accumulator with_raw(std::int64_t wide) const;  // saturates into 32 bits

  bool operator==(const Accumulator&) const = default;
};

struct VmacResult {
  Accumulator acc;
  bool skipped = false;
};

// acc + sum(a_i * b_i). Each product is rounded (nearest-even) to the
// accumulator LSB, the vector sum is added to acc with saturation.
// skipped is true iff either operand is all zero codes; acc is then unchanged.
VmacResult vmac(std::span<const std::uint8_t> a, const FloatFormat& fa,
                std::span<const std::uint8_t> b, const FloatFormat& fb,
                Accumulator acc);

struct MatmulOptions {
  std::size_t tile_n = 16;
  int fractional_bits = 16;  // accumulator split is 32 - f . f
  bool zero_skip = true;     // when false every VMAC is charged as executed
};

struct MatmulStats {
  std::uint64_t cycles = 0;
  std::uint64_t vmac_invocations = 0;
  std::uint64_t vmac_skipped = 0;
};

struct MatmulResult {
  QuantTensor output;             // accumulators re-quantized with a fitted bias
  std::vector<double> accumulated;  // accumulator values before re-quantization
  MatmulStats stats;
};

// Tiled PU matmul of A (m x k) by B (k x n). Dimensions are zero-padded up to
// multiples of tile_n. cycles = (M/t)(N/t)(K/t) * t on the padded dims.
MatmulResult matmul_tiled(const QuantTensor& a, const QuantTensor& b, const MatmulOptions& opts = {});

// Closed-form PU cycle count for an m x k by k x n product.
std::uint64_t matmul_cycles(std::size_t m, std::size_t k, std::size_t n, std::size_t tile_n);

QuantTensor transpose(const QuantTensor& q);

}  // namespace eesim
