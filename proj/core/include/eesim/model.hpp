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

// Shared-parameter transformer encoder with attention-span predication and
// per-layer off-ramp classifiers. All matrix products run through the tiled
// PU model (matmul_tiled); softmax, layer norm and element-wise ops run in the
// SFU model, in double precision unless fixed-point emulation is requested.

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "eesim/numerics.hpp"
#include "eesim/sparse.hpp"

namespace eesim {

using Token = std::uint32_t;
inline constexpr Token kPadToken = 0;

struct EncoderConfig {
  std::size_t num_layers = 12;
  std::size_t num_heads = 12;
  std::size_t hidden_dim = 768;
  std::size_t embed_dim = 128;
  std::size_t ffn_dim = 3072;
  std::size_t seq_len = 128;
  std::size_t num_classes = 2;
  std::size_t vocab_size = 30000;
  int exponent_bits = 4;
  double layer_norm_eps = 1e-5;

  static EncoderConfig albert_base();
  // 4 layers, 2 heads, hidden 32, sequence 16, vocabulary 100.
  static EncoderConfig toy();

  std::size_t head_dim() const { return hidden_dim / num_heads; }
  void validate() const;

  bool operator==(const EncoderConfig&) const = default;
};

enum class SpanMaskKind { kBinary, kSoftRamp };

struct SpanMaskOptions {
  SpanMaskKind kind = SpanMaskKind::kBinary;
  double ramp = 32.0;  // soft-ramp width in positions
};

// Learned per-head attention spans; 0 disables a head entirely.
struct AttentionSpans {
  std::vector<std::size_t> spans;

  static AttentionSpans full(const EncoderConfig& cfg);
  std::size_t active_heads() const;
  void validate(const EncoderConfig& cfg) const;

  bool operator==(const AttentionSpans&) const = default;
};

// Mask for one head: entry (i, j) keeps key j for query i when |i - j| <= span.
RealTensor span_mask(std::size_t seq_len, std::size_t span, const SpanMaskOptions& opts = {});

struct MatmulShape {
  std::size_t m = 0, k = 0, n = 0;
  bool operator==(const MatmulShape&) const = default;
};

// Operation counts for one stage (the embedding front end or one encoder layer).
struct StageTrace {
  std::vector<MatmulShape> matmuls;
  std::uint64_t vmac_invocations = 0;
  std::uint64_t vmac_skipped = 0;
  std::uint64_t softmax_rows = 0;
  std::uint64_t softmax_row_len = 0;
  std::uint64_t layernorm_rows = 0;
  std::uint64_t layernorm_row_len = 0;
  std::uint64_t elementwise_ops = 0;
  std::uint64_t entropy_evals = 0;
  std::uint64_t entropy_len = 0;
  std::uint64_t lut_lookups = 0;
  std::uint64_t memory_bytes = 0;
  std::uint64_t heads_skipped = 0;

  // Useful MACs (m * k * n summed over matmuls, no padding).
  std::uint64_t mac_count() const;
  void add_matmul(const MatmulShape& shape, const MatmulStats& stats);
  StageTrace& operator+=(const StageTrace& other);
};

struct OpTrace {
  std::size_t tile_n = 16;
  StageTrace embedding;
  std::vector<StageTrace> layers;

  StageTrace total() const;
};

struct LayerNormParams {
  std::vector<double> gamma;
  std::vector<double> beta;
};

struct EncoderBundle {
  EncoderConfig config;
  BitmaskTensor embedding;  // vocab x embed_dim
  QuantTensor embed_proj;   // embed_dim x hidden
  QuantTensor wq, wk, wv, wo;  // hidden x hidden, shared by every layer
  QuantTensor ffn_in;       // hidden x ffn
  QuantTensor ffn_out;      // ffn x hidden
  LayerNormParams attn_norm;
  LayerNormParams ffn_norm;
  std::vector<QuantTensor> off_ramps;  // per layer: hidden x num_classes
  AttentionSpans spans;

  // Throws ConfigError when shapes disagree with config.
  void validate() const;
};

struct ForwardOptions {
  std::size_t tile_n = 16;
  bool zero_skip = true;
  int accumulator_frac_bits = 16;
  SpanMaskOptions span_mask;
  // 0 keeps SFU math in double; f > 0 rounds SFU outputs to a 16-bit Q(15-f).f grid.
  int sfu_frac_bits = 0;
};

// Three tiled passes per row (max, log-sum-exp, normalize-and-mask):
// out = exp(a - max - ln(sum(exp(a - max)))) * mask.
RealTensor masked_softmax(const RealTensor& scores, const RealTensor& mask, std::size_t tile_n);

// Mean and E[x^2] by running average; Var = E[x^2] - E[x]^2.
std::vector<double> layer_norm(std::span<const double> x, std::span<const double> gamma,
                               std::span<const double> beta, double eps);

struct HeadWeights {
  QuantTensor wq, wk, wv;  // hidden x head_dim
};

HeadWeights slice_head(const EncoderBundle& bundle, std::size_t head);

struct HeadResult {
  QuantTensor context;                // T x head_dim
  std::vector<double> context_accum;  // accumulator values behind context
  StageTrace trace;
};

// span == 0 skips the head: zero context and no MACs charged.
HeadResult attention_head(const QuantTensor& hidden, const HeadWeights& weights, std::size_t span,
                          const ForwardOptions& opts);

// Same computation with an explicit T x T mask (no predication).
HeadResult attention_head_masked(const QuantTensor& hidden, const HeadWeights& weights, const RealTensor& mask,
                                 const ForwardOptions& opts);

struct LayerOutput {
  std::size_t layer = 0;  // 1-based
  QuantTensor hidden;
  std::vector<double> logits;
};

// Stateful wrapper that runs the shared block one layer at a time, as the
// early-exit policies need.
class Encoder {
 public:
  struct State {
    QuantTensor hidden;
    std::size_t layer = 0;
    OpTrace trace;
  };

  explicit Encoder(std::shared_ptr<const EncoderBundle> bundle, ForwardOptions opts = {});

  const EncoderConfig& config() const { return bundle_->config; }
  const EncoderBundle& bundle() const { return *bundle_; }
  const ForwardOptions& options() const { return opts_; }

  // Embedding lookup and projection. Tokens are padded with kPadToken to seq_len.
  State begin(std::span<const Token> tokens) const;

  // Applies the next encoder layer and its off-ramp.
  LayerOutput step(State& state) const;

 private:
  std::shared_ptr<const EncoderBundle> bundle_;
  ForwardOptions opts_;
  QuantTensor embedding_table_;
  std::vector<std::size_t> row_payload_bytes_;
  std::vector<HeadWeights> heads_;
};

struct ForwardResult {
  std::vector<QuantTensor> hidden_states;     // one per computed layer
  std::vector<std::vector<double>> logits;    // off-ramp logits per layer
  OpTrace trace;
};

ForwardResult encoder_forward(std::span<const Token> tokens, const EncoderBundle& bundle, std::size_t upto_layer,
                              const ForwardOptions& opts = {});

struct FlopsReport {
  double dense_flops = 0.0;
  double predicated_flops = 0.0;
  double ratio = 1.0;  // dense / predicated
};

// Closed-form FLOPs for a full pass (embedding + num_layers layers with
// off-ramps) at seq_len; heads with span 0 are removed in the predicated count.
FlopsReport flops_count(const AttentionSpans& spans, const EncoderConfig& cfg);

// FLOPs charged per SFU element.
inline constexpr double kSoftmaxFlopsPerElement = 5.0;
inline constexpr double kLayerNormFlopsPerElement = 6.0;

struct SyntheticBundleOptions {
  std::uint64_t seed = 1;
  double embedding_density = 0.4;
  double encoder_density = 0.5;
  double ramp_gain = 1.0;      // off-ramp scale at layer 1
  double ramp_growth = 1.35;   // multiplicative growth per layer
  double ramp_noise = 0.25;    // per-layer deviation from the shared ramp direction
  std::vector<std::size_t> spans;  // empty: every head at full span
};

EncoderBundle make_synthetic_bundle(const EncoderConfig& cfg, const SyntheticBundleOptions& opts = {});

// Random token lists with lengths in [seq_len / 4, seq_len], tokens in [1, vocab).
std::vector<std::vector<Token>> make_sentences(const EncoderConfig& cfg, std::size_t count, std::uint64_t seed);

}  // namespace eesim
