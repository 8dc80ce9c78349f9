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

#include "eesim/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>
#include <tuple>

#include "eesim/error.hpp"

namespace eesim {

namespace {

constexpr int kMinBias = -128;
constexpr int kMaxBias = 127;

// Products are clamped well inside int64 so a tile-wide sum cannot overflow.
constexpr double kProductClamp = 72057594037927936.0;  // 2^56

// Magnitudes of codes 0..127 in increasing order (code 0 is zero).
std::array<double, 128> magnitude_table(const FloatFormat& fmt) {
  std::array<double, 128> mags{};
  for (int c = 0; c < 128; ++c) mags[c] = decode(static_cast<std::uint8_t>(c), fmt);
  return mags;
}

// Rounds an already-scaled product (value * 2^frac) to the accumulator LSB.
std::int64_t round_scaled(double scaled) {
  scaled = std::clamp(scaled, -kProductClamp, kProductClamp);
  return static_cast<std::int64_t>(std::nearbyint(scaled));
}

std::int64_t to_fixed(double product, int fractional_bits) {
  return round_scaled(std::ldexp(product, fractional_bits));
}

// Fixed-point product table for one (exponent_bits, bias_a + bias_b, frac) triple.
using ProductTable = std::vector<std::int64_t>;

std::shared_ptr<const ProductTable> product_table(int exponent_bits, int bias_sum, int fractional_bits) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, std::shared_ptr<const ProductTable>> cache;

  const auto key = std::make_tuple(exponent_bits, bias_sum, fractional_bits);
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  FloatFormat unbiased{exponent_bits, 0};
  const auto values = decode_table(unbiased);
  auto table = std::make_shared<ProductTable>(256 * 256);
  const double scale = std::ldexp(1.0, bias_sum + fractional_bits);
  for (int a = 0; a < 256; ++a) {
    for (int b = 0; b < 256; ++b) {
      // Exact in double: each operand carries at most 7 significant bits.
      (*table)[(a << 8) | b] = round_scaled(values[a] * values[b] * scale);
    }
  }
  cache.emplace(key, table);
  return table;
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

void require_matrix(const QuantTensor& q, const char* what) {
  if (q.shape.size() != 2) throw ShapeMismatch(std::string(what) + " must be rank 2");
}

}  // namespace

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void FloatFormat::validate() const {
  if (exponent_bits < 1 || exponent_bits > 6) {
    throw InvalidInput("exponent_bits must be in [1, 6], got " + std::to_string(exponent_bits));
  }
}

double FloatFormat::max_value() const {
  const int m = mantissa_bits();
  const int max_exp = (1 << exponent_bits) - 1;
  return std::ldexp(2.0 - std::ldexp(1.0, -m), max_exp + exponent_bias);
}

double FloatFormat::min_positive() const {
  return std::ldexp(1.0 + std::ldexp(1.0, -mantissa_bits()), exponent_bias);
}

double decode(std::uint8_t code, const FloatFormat& fmt) {
  const bool negative = (code & 0x80) != 0;
  const int mag = code & 0x7F;
  if (mag == 0) return negative ? -0.0 : 0.0;
  const int m = fmt.mantissa_bits();
  const int exp_field = mag >> m;
  const int mant = mag & ((1 << m) - 1);
  const double v = std::ldexp(1.0 + std::ldexp(static_cast<double>(mant), -m), exp_field + fmt.exponent_bias);
  return negative ? -v : v;
}

std::array<double, 256> decode_table(const FloatFormat& fmt) {
  fmt.validate();
  std::array<double, 256> table{};
  for (int c = 0; c < 256; ++c) table[c] = decode(static_cast<std::uint8_t>(c), fmt);
  return table;
}

namespace {

struct Grid {
  std::array<double, 128> mags;
  int mantissa_bits;
  int exponent_bias;
};

Grid make_grid(const FloatFormat& fmt) { return Grid{magnitude_table(fmt), fmt.mantissa_bits(), fmt.exponent_bias}; }

std::uint8_t encode_with(double value, const Grid& grid) {
  if (!std::isfinite(value)) throw InvalidInput("cannot quantize a non-finite value");
  const bool negative = std::signbit(value);
  const double a = std::fabs(value);
  if (a == 0.0) return negative ? kNegZeroCode : kZeroCode;

  const auto& mags = grid.mags;
  const int m = grid.mantissa_bits;
  int e = 0;
  const double fr = std::frexp(a, &e);  // a = fr * 2^e, fr in [0.5, 1)
  const int exp_field = e - 1 - grid.exponent_bias;

  std::uint8_t mag;
  if (a >= mags[127]) {
    mag = 127;
  } else if (exp_field >= 1) {
    // Uniform grid inside the binade; nearbyint rounds half to even, and the
    // mantissa LSB is the code LSB. A carry moves to the next binade.
    int mant = static_cast<int>(std::nearbyint((2.0 * fr - 1.0) * static_cast<double>(1 << m)));
    int field = exp_field;
    if (mant == (1 << m)) {
      mant = 0;
      ++field;
    }
    mag = static_cast<std::uint8_t>((field << m) | mant);
  } else {
    // Lowest binade borders the zero code: search mags[0 .. 2^m].
    const auto end = mags.begin() + (1 << m) + 1;
    const auto it = std::upper_bound(mags.begin(), end, a);
    const int hi = static_cast<int>(it - mags.begin());
    const int lo = hi - 1;
    const double d_lo = a - mags[lo];
    const double d_hi = mags[hi] - a;
    if (d_lo < d_hi) {
      mag = static_cast<std::uint8_t>(lo);
    } else if (d_hi < d_lo) {
      mag = static_cast<std::uint8_t>(hi);
    } else {
      mag = static_cast<std::uint8_t>((lo % 2 == 0) ? lo : hi);
    }
  }
  if (mag == 0) return kZeroCode;
  return static_cast<std::uint8_t>(negative ? (mag | 0x80) : mag);
}

}  // namespace

std::uint8_t encode(double value, const FloatFormat& fmt) {
  fmt.validate();
  return encode_with(value, make_grid(fmt));
}

RealTensor::RealTensor(Shape s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
  if (element_count(shape) != data.size()) throw ShapeMismatch("RealTensor data size does not match shape");
}

RealTensor RealTensor::zeros(Shape s) {
  const auto n = element_count(s);
  return RealTensor(std::move(s), std::vector<double>(n, 0.0));
}

QuantTensor::QuantTensor(Shape s, std::vector<std::uint8_t> c, FloatFormat f)
    : shape(std::move(s)), codes(std::move(c)), format(f) {
  if (element_count(shape) != codes.size()) throw ShapeMismatch("QuantTensor code count does not match shape");
}

std::size_t QuantTensor::rows() const { return shape.empty() ? 0 : shape[0]; }
std::size_t QuantTensor::cols() const { return shape.size() < 2 ? 1 : shape[1]; }

int fit_exponent_bias(std::span<const double> values, const FloatFormat& fmt) {
  fmt.validate();
  if (values.empty()) throw InvalidInput("fit_exponent_bias requires a non-empty input");
  double max_abs = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidInput("fit_exponent_bias: non-finite value");
    max_abs = std::max(max_abs, std::fabs(v));
  }
  if (max_abs == 0.0) return 0;

  FloatFormat probe = fmt;
  probe.exponent_bias = 0;
  // max_value(bias) = max_value(0) * 2^bias
  const double top = probe.max_value();
  int bias = static_cast<int>(std::ceil(std::log2(max_abs / top)));
  auto max_at = [&](int b) { return std::ldexp(top, b); };
  while (max_at(bias) < max_abs) ++bias;
  while (max_at(bias - 1) >= max_abs) --bias;
  if (bias > kMaxBias) throw InvalidInput("fit_exponent_bias: magnitude exceeds the representable bias range");
  return std::max(bias, kMinBias);
}

QuantTensor quantize(const RealTensor& values, const FloatFormat& fmt) {
  fmt.validate();
  const auto grid = make_grid(fmt);
  std::vector<std::uint8_t> codes(values.data.size());
  std::transform(values.data.begin(), values.data.end(), codes.begin(),
                 [&](double v) { return encode_with(v, grid); });
  return QuantTensor(values.shape, std::move(codes), fmt);
}

QuantTensor quantize_fitted(const RealTensor& values, int exponent_bits) {
  FloatFormat fmt{exponent_bits, 0};
  fmt.exponent_bias = values.data.empty() ? 0 : fit_exponent_bias(values.data, fmt);
  return quantize(values, fmt);
}

RealTensor dequantize(const QuantTensor& q) {
  const auto table = decode_table(q.format);
  std::vector<double> out(q.codes.size());
  std::transform(q.codes.begin(), q.codes.end(), out.begin(), [&](std::uint8_t c) { return table[c]; });
  return RealTensor(q.shape, std::move(out));
}

double Accumulator::value() const { return std::ldexp(static_cast<double>(raw), -fractional_bits); }

Accumulator Accumulator::with_raw(std::int64_t wide) const {
  Accumulator out = *this;
  out.raw = static_cast<std::int32_t>(
      std::clamp<std::int64_t>(wide, std::numeric_limits<std::int32_t>::min(), std::numeric_limits<std::int32_t>::max()));
  return out;
}

VmacResult vmac(std::span<const std::uint8_t> a, const FloatFormat& fa, std::span<const std::uint8_t> b,
                const FloatFormat& fb, Accumulator acc) {
  if (a.size() != b.size()) throw ShapeMismatch("vmac operands differ in length");
  if (fa.exponent_bits != fb.exponent_bits) throw InvalidInput("vmac operands use different exponent widths");
  if (acc.integer_bits + acc.fractional_bits != 32) throw InvalidInput("accumulator must be 32 bits wide");

  const bool a_zero = std::all_of(a.begin(), a.end(), is_zero_code);
  const bool b_zero = std::all_of(b.begin(), b.end(), is_zero_code);
  if (a_zero || b_zero) return {acc, true};

  std::int64_t sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += to_fixed(decode(a[i], fa) * decode(b[i], fb), acc.fractional_bits);
  }
  return {acc.with_raw(static_cast<std::int64_t>(acc.raw) + sum), false};
}

std::uint64_t matmul_cycles(std::size_t m, std::size_t k, std::size_t n, std::size_t tile_n) {
  if (tile_n == 0) throw InvalidInput("tile_n must be positive");
  if (m == 0 || k == 0 || n == 0) return 0;
  return static_cast<std::uint64_t>(ceil_div(m, tile_n)) * ceil_div(n, tile_n) * ceil_div(k, tile_n) * tile_n;
}

QuantTensor transpose(const QuantTensor& q) {
  require_matrix(q, "transpose operand");
  const std::size_t r = q.shape[0], c = q.shape[1];
  std::vector<std::uint8_t> out(q.codes.size());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = q.codes[i * c + j];
  return QuantTensor({c, r}, std::move(out), q.format);
}

MatmulResult matmul_tiled(const QuantTensor& a, const QuantTensor& b, const MatmulOptions& opts) {
  require_matrix(a, "matmul lhs");
  require_matrix(b, "matmul rhs");
  if (a.shape[1] != b.shape[0]) {
    throw ShapeMismatch("matmul inner dimensions differ: " + std::to_string(a.shape[1]) + " vs " +
                        std::to_string(b.shape[0]));
  }
  if (a.format.exponent_bits != b.format.exponent_bits) {
    throw InvalidInput("matmul operands use different exponent widths");
  }
  if (opts.tile_n == 0) throw InvalidInput("tile_n must be positive");
  if (opts.fractional_bits < 0 || opts.fractional_bits > 31) throw InvalidInput("fractional_bits must be in [0, 31]");

  const std::size_t m = a.shape[0], k = a.shape[1], n = b.shape[1];
  const std::size_t t = opts.tile_n;
  const std::size_t k_tiles = ceil_div(k, t);
  const std::size_t m_pad = ceil_div(m, t) * t;
  const std::size_t n_pad = ceil_div(n, t) * t;

  const QuantTensor bt = transpose(b);
  const auto table = product_table(a.format.exponent_bits, a.format.exponent_bias + b.format.exponent_bias,
                                   opts.fractional_bits);
  const std::int64_t* prod = table->data();

  auto segment_zero = [&](const std::vector<std::uint8_t>& codes, std::size_t row, std::size_t kk) {
    const std::size_t begin = row * k + kk * t;
    const std::size_t end = row * k + std::min(k, (kk + 1) * t);
    return std::all_of(codes.begin() + begin, codes.begin() + end, is_zero_code);
  };
  std::vector<std::uint8_t> a_zero(m * k_tiles), b_zero(n * k_tiles);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t kk = 0; kk < k_tiles; ++kk) a_zero[r * k_tiles + kk] = segment_zero(a.codes, r, kk);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t kk = 0; kk < k_tiles; ++kk) b_zero[c * k_tiles + kk] = segment_zero(bt.codes, c, kk);

  Accumulator proto;
  proto.fractional_bits = opts.fractional_bits;
  proto.integer_bits = 32 - opts.fractional_bits;

  std::uint64_t skipped = 0;
  const double lsb = std::ldexp(1.0, -opts.fractional_bits);
  std::vector<double> accumulated(m * n);
  for (std::size_t r = 0; r < m; ++r) {
    const std::uint8_t* arow = a.codes.data() + r * k;
    for (std::size_t c = 0; c < n; ++c) {
      const std::uint8_t* bcol = bt.codes.data() + c * k;
      std::int64_t acc = 0;
      for (std::size_t kk = 0; kk < k_tiles; ++kk) {
        if (a_zero[r * k_tiles + kk] || b_zero[c * k_tiles + kk]) {
          ++skipped;
          continue;
        }
        std::int64_t sum = 0;
        const std::size_t end = std::min(k, (kk + 1) * t);
        for (std::size_t i = kk * t; i < end; ++i) sum += prod[(static_cast<unsigned>(arow[i]) << 8) | bcol[i]];
        acc = proto.with_raw(acc + sum).raw;
      }
      accumulated[r * n + c] = static_cast<double>(acc) * lsb;
    }
  }

  MatmulResult result;
  result.stats.cycles = matmul_cycles(m, k, n, t);
  result.stats.vmac_invocations = static_cast<std::uint64_t>(m_pad) * n_pad * k_tiles;
  const std::uint64_t padded_skips = (static_cast<std::uint64_t>(m_pad) * n_pad - m * n) * k_tiles;
  result.stats.vmac_skipped = opts.zero_skip ? skipped + padded_skips : 0;

  result.output = quantize_fitted(RealTensor({m, n}, accumulated), a.format.exponent_bits);
  result.accumulated = std::move(accumulated);
  return result;
}

}  // namespace eesim
