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

#include "eesim/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "eesim/error.hpp"

namespace eesim {

namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

double sfu_round(double x, int frac_bits) {
  if (frac_bits <= 0) return x;
  const double limit = std::ldexp(1.0, 15 - frac_bits);
  const double lsb = std::ldexp(1.0, -frac_bits);
  return std::clamp(std::nearbyint(x / lsb) * lsb, -limit, limit - lsb);
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

QuantTensor zero_tensor(Shape shape, int exponent_bits) {
  const auto n = element_count(shape);
  return QuantTensor(std::move(shape), std::vector<std::uint8_t>(n, kZeroCode), FloatFormat{exponent_bits, 0});
}

MatmulOptions matmul_options(const ForwardOptions& opts) {
  MatmulOptions m;
  m.tile_n = opts.tile_n;
  m.zero_skip = opts.zero_skip;
  m.fractional_bits = opts.accumulator_frac_bits;
  return m;
}

QuantTensor column_slice(const QuantTensor& w, std::size_t begin, std::size_t width) {
  const std::size_t rows = w.shape[0], cols = w.shape[1];
  std::vector<std::uint8_t> out(rows * width);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < width; ++c) out[r * width + c] = w.codes[r * cols + begin + c];
  return QuantTensor({rows, width}, std::move(out), w.format);
}

void check_matrix(const QuantTensor& q, std::size_t rows, std::size_t cols, const std::string& name) {
  if (q.shape.size() != 2 || q.shape[0] != rows || q.shape[1] != cols) {
    throw ConfigError(name + " must be " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

// Normalizes each row of a T x H real matrix in place.
void normalize_rows(std::vector<double>& x, std::size_t rows, std::size_t cols, const LayerNormParams& p, double eps,
                    int sfu_frac_bits) {
  for (std::size_t r = 0; r < rows; ++r) {
    std::span<const double> row(x.data() + r * cols, cols);
    const auto y = layer_norm(row, p.gamma, p.beta, eps);
    for (std::size_t c = 0; c < cols; ++c) x[r * cols + c] = sfu_round(y[c], sfu_frac_bits);
  }
}

}  // namespace

EncoderConfig EncoderConfig::albert_base() { return EncoderConfig{}; }

EncoderConfig EncoderConfig::toy() {
  EncoderConfig c;
  c.num_layers = 4;
  c.num_heads = 2;
  c.hidden_dim = 32;
  c.embed_dim = 16;
  c.ffn_dim = 64;
  c.seq_len = 16;
  c.num_classes = 2;
  c.vocab_size = 100;
  return c;
}

void EncoderConfig::validate() const {
  if (num_layers == 0 || num_heads == 0 || hidden_dim == 0 || embed_dim == 0 || ffn_dim == 0 || seq_len == 0 ||
      vocab_size == 0) {
    throw ConfigError("encoder dimensions must be positive");
  }
  if (hidden_dim % num_heads != 0) throw ConfigError("hidden_dim must be divisible by num_heads");
  if (num_classes < 2) throw ConfigError("num_classes must be at least 2");
  if (!(layer_norm_eps > 0.0)) throw ConfigError("layer_norm_eps must be positive");
  FloatFormat{exponent_bits, 0}.validate();
}

AttentionSpans AttentionSpans::full(const EncoderConfig& cfg) {
  return AttentionSpans{std::vector<std::size_t>(cfg.num_heads, cfg.seq_len)};
}

std::size_t AttentionSpans::active_heads() const {
  return static_cast<std::size_t>(std::count_if(spans.begin(), spans.end(), [](std::size_t s) { return s > 0; }));
}

void AttentionSpans::validate(const EncoderConfig& cfg) const {
  if (spans.size() != cfg.num_heads) {
    throw ConfigError("expected " + std::to_string(cfg.num_heads) + " attention spans, got " +
                      std::to_string(spans.size()));
  }
  for (auto s : spans) {
    if (s > cfg.seq_len) throw ConfigError("attention span exceeds seq_len");
  }
}

RealTensor span_mask(std::size_t seq_len, std::size_t span, const SpanMaskOptions& opts) {
  RealTensor mask = RealTensor::zeros({seq_len, seq_len});
  if (span == 0) return mask;
  for (std::size_t i = 0; i < seq_len; ++i) {
    for (std::size_t j = 0; j < seq_len; ++j) {
      const double d = static_cast<double>(i > j ? i - j : j - i);
      double v;
      if (opts.kind == SpanMaskKind::kBinary) {
        v = d <= static_cast<double>(span) ? 1.0 : 0.0;
      } else {
        v = std::clamp((opts.ramp + static_cast<double>(span) - d) / opts.ramp, 0.0, 1.0);
      }
      mask.data[i * seq_len + j] = v;
    }
  }
  return mask;
}

std::uint64_t StageTrace::mac_count() const {
  std::uint64_t n = 0;
  for (const auto& s : matmuls) n += static_cast<std::uint64_t>(s.m) * s.k * s.n;
  return n;
}

void StageTrace::add_matmul(const MatmulShape& shape, const MatmulStats& stats) {
  matmuls.push_back(shape);
  vmac_invocations += stats.vmac_invocations;
  vmac_skipped += stats.vmac_skipped;
}

StageTrace& StageTrace::operator+=(const StageTrace& o) {
  matmuls.insert(matmuls.end(), o.matmuls.begin(), o.matmuls.end());
  vmac_invocations += o.vmac_invocations;
  vmac_skipped += o.vmac_skipped;
  softmax_rows += o.softmax_rows;
  softmax_row_len = std::max(softmax_row_len, o.softmax_row_len);
  layernorm_rows += o.layernorm_rows;
  layernorm_row_len = std::max(layernorm_row_len, o.layernorm_row_len);
  elementwise_ops += o.elementwise_ops;
  entropy_evals += o.entropy_evals;
  entropy_len = std::max(entropy_len, o.entropy_len);
  lut_lookups += o.lut_lookups;
  memory_bytes += o.memory_bytes;
  heads_skipped += o.heads_skipped;
  return *this;
}

StageTrace OpTrace::total() const {
  StageTrace t = embedding;
  for (const auto& l : layers) t += l;
  return t;
}

void EncoderBundle::validate() const {
  config.validate();
  const auto& c = config;
  if (embedding.shape != Shape{c.vocab_size, c.embed_dim}) throw ConfigError("embedding must be vocab x embed_dim");
  check_matrix(embed_proj, c.embed_dim, c.hidden_dim, "embed_proj");
  check_matrix(wq, c.hidden_dim, c.hidden_dim, "wq");
  check_matrix(wk, c.hidden_dim, c.hidden_dim, "wk");
  check_matrix(wv, c.hidden_dim, c.hidden_dim, "wv");
  check_matrix(wo, c.hidden_dim, c.hidden_dim, "wo");
  check_matrix(ffn_in, c.hidden_dim, c.ffn_dim, "ffn_in");
  check_matrix(ffn_out, c.ffn_dim, c.hidden_dim, "ffn_out");
  for (const auto* p : {&attn_norm, &ffn_norm}) {
    if (p->gamma.size() != c.hidden_dim || p->beta.size() != c.hidden_dim) {
      throw ConfigError("layer-norm parameters must have hidden_dim entries");
    }
  }
  if (off_ramps.size() != c.num_layers) throw ConfigError("one off-ramp per layer is required");
  for (const auto& r : off_ramps) check_matrix(r, c.hidden_dim, c.num_classes, "off_ramp");
  spans.validate(c);
}

RealTensor masked_softmax(const RealTensor& scores, const RealTensor& mask, std::size_t tile_n) {
  if (scores.shape.size() != 2 || scores.shape != mask.shape) throw ShapeMismatch("scores and mask must share a 2-D shape");
  if (tile_n == 0) throw InvalidInput("tile_n must be positive");
  const std::size_t rows = scores.shape[0], cols = scores.shape[1];
  const std::size_t tiles = ceil_div(cols, tile_n);
  RealTensor out = RealTensor::zeros(scores.shape);

  for (std::size_t i = 0; i < rows; ++i) {
    const double* a = scores.data.data() + i * cols;
    const double* m = mask.data.data() + i * cols;
    double* o = out.data.data() + i * cols;

    double max = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < tiles; ++t) {
      const std::size_t end = std::min(cols, (t + 1) * tile_n);
      for (std::size_t j = t * tile_n; j < end; ++j) max = std::max(max, a[j]);
    }

    double sum_exp = 0.0;
    for (std::size_t t = 0; t < tiles; ++t) {
      const std::size_t end = std::min(cols, (t + 1) * tile_n);
      for (std::size_t j = t * tile_n; j < end; ++j) sum_exp += std::exp(a[j] - max);
    }
    const double logsum_exp = std::log(sum_exp);

    for (std::size_t t = 0; t < tiles; ++t) {
      const std::size_t end = std::min(cols, (t + 1) * tile_n);
      for (std::size_t j = t * tile_n; j < end; ++j) o[j] = std::exp(a[j] - max - logsum_exp) * m[j];
    }
  }
  return out;
}

std::vector<double> layer_norm(std::span<const double> x, std::span<const double> gamma,
                               std::span<const double> beta, double eps) {
  if (x.size() != gamma.size() || x.size() != beta.size()) throw ShapeMismatch("layer_norm dimensions differ");
  if (!(eps > 0.0)) throw InvalidInput("layer_norm eps must be positive");
  if (x.empty()) return {};

  double mean = 0.0, mean_sq = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double n = static_cast<double>(k + 1);
    mean += (x[k] - mean) / n;
    mean_sq += (x[k] * x[k] - mean_sq) / n;
  }
  const double var = std::max(0.0, mean_sq - mean * mean);
  const double inv_std = 1.0 / std::sqrt(var + eps);

  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = (x[k] - mean) * inv_std * gamma[k] + beta[k];
  return out;
}

HeadWeights slice_head(const EncoderBundle& bundle, std::size_t head) {
  const std::size_t dh = bundle.config.head_dim();
  return HeadWeights{column_slice(bundle.wq, head * dh, dh), column_slice(bundle.wk, head * dh, dh),
                     column_slice(bundle.wv, head * dh, dh)};
}

HeadResult attention_head_masked(const QuantTensor& hidden, const HeadWeights& w, const RealTensor& mask,
                                 const ForwardOptions& opts) {
  if (hidden.shape.size() != 2 || w.wq.shape.size() != 2 || hidden.shape[1] != w.wq.shape[0] ||
      w.wq.shape != w.wk.shape || w.wq.shape != w.wv.shape) {
    throw ShapeMismatch("attention head weights do not match the hidden state");
  }
  const std::size_t t = hidden.shape[0], h = hidden.shape[1], dh = w.wq.shape[1];
  if (mask.shape != Shape{t, t}) throw ShapeMismatch("attention mask must be T x T");
  const auto mopts = matmul_options(opts);

  HeadResult res;
  auto& st = res.trace;
  const auto q = matmul_tiled(hidden, w.wq, mopts);
  st.add_matmul({t, h, dh}, q.stats);
  const auto k = matmul_tiled(hidden, w.wk, mopts);
  st.add_matmul({t, h, dh}, k.stats);
  const auto v = matmul_tiled(hidden, w.wv, mopts);
  st.add_matmul({t, h, dh}, v.stats);

  const auto s = matmul_tiled(q.output, transpose(k.output), mopts);
  st.add_matmul({t, dh, t}, s.stats);

  RealTensor scores = dequantize(s.output);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  for (auto& x : scores.data) x = sfu_round(x * scale, opts.sfu_frac_bits);
  st.elementwise_ops += t * t;

  RealTensor probs = masked_softmax(scores, mask, opts.tile_n);
  for (auto& x : probs.data) x = sfu_round(x, opts.sfu_frac_bits);
  st.softmax_rows += t;
  st.softmax_row_len = t;

  const auto ctx = matmul_tiled(quantize_fitted(probs, hidden.format.exponent_bits), v.output, mopts);
  st.add_matmul({t, t, dh}, ctx.stats);

  res.context = ctx.output;
  res.context_accum = ctx.accumulated;
  return res;
}

HeadResult attention_head(const QuantTensor& hidden, const HeadWeights& w, std::size_t span,
                          const ForwardOptions& opts) {
  if (hidden.shape.size() != 2) throw ShapeMismatch("hidden state must be rank 2");
  const std::size_t t = hidden.shape[0];
  if (span > t) throw InvalidInput("attention span exceeds the sequence length");
  if (span == 0) {
    const std::size_t dh = w.wq.shape.size() == 2 ? w.wq.shape[1] : 0;
    HeadResult res;
    res.context = zero_tensor({t, dh}, hidden.format.exponent_bits);
    res.context_accum.assign(t * dh, 0.0);
    res.trace.heads_skipped = 1;
    return res;
  }
  return attention_head_masked(hidden, w, span_mask(t, span, opts.span_mask), opts);
}

Encoder::Encoder(std::shared_ptr<const EncoderBundle> bundle, ForwardOptions opts)
    : bundle_(std::move(bundle)), opts_(opts) {
  if (!bundle_) throw InvalidInput("Encoder requires a bundle");
  bundle_->validate();
  if (opts_.tile_n == 0) throw InvalidInput("tile_n must be positive");
  embedding_table_ = decode_bitmask(bundle_->embedding);

  const auto& c = bundle_->config;
  row_payload_bytes_.resize(c.vocab_size);
  for (std::size_t r = 0; r < c.vocab_size; ++r) {
    const auto* row = embedding_table_.codes.data() + r * c.embed_dim;
    row_payload_bytes_[r] = static_cast<std::size_t>(
        std::count_if(row, row + c.embed_dim, [](std::uint8_t code) { return code != kZeroCode; }));
  }
  for (std::size_t h = 0; h < c.num_heads; ++h) heads_.push_back(slice_head(*bundle_, h));
}

Encoder::State Encoder::begin(std::span<const Token> tokens) const {
  const auto& c = config();
  if (tokens.empty()) throw InvalidInput("token list is empty");
  if (tokens.size() > c.seq_len) throw InvalidInput("token list longer than seq_len");

  std::vector<std::uint8_t> rows(c.seq_len * c.embed_dim);
  State state;
  state.trace.tile_n = opts_.tile_n;
  auto& st = state.trace.embedding;
  for (std::size_t i = 0; i < c.seq_len; ++i) {
    const Token tok = i < tokens.size() ? tokens[i] : kPadToken;
    if (tok >= c.vocab_size) throw InvalidInput("token index " + std::to_string(tok) + " out of range");
    std::copy_n(embedding_table_.codes.begin() + static_cast<std::ptrdiff_t>(tok * c.embed_dim), c.embed_dim,
                rows.begin() + static_cast<std::ptrdiff_t>(i * c.embed_dim));
    st.memory_bytes += row_payload_bytes_[tok] + ceil_div(c.embed_dim, 8);
  }
  const QuantTensor embedded({c.seq_len, c.embed_dim}, std::move(rows), embedding_table_.format);
  auto proj = matmul_tiled(embedded, bundle_->embed_proj, matmul_options(opts_));
  st.add_matmul({c.seq_len, c.embed_dim, c.hidden_dim}, proj.stats);
  state.hidden = std::move(proj.output);
  return state;
}

LayerOutput Encoder::step(State& state) const {
  const auto& c = config();
  if (state.layer >= c.num_layers) throw InvalidInput("all encoder layers have already been applied");
  const std::size_t t = c.seq_len, h = c.hidden_dim, f = c.ffn_dim, dh = c.head_dim();
  const auto mopts = matmul_options(opts_);
  StageTrace st;

  std::vector<double> ctx(t * h, 0.0);
  for (std::size_t head = 0; head < c.num_heads; ++head) {
    const auto res = attention_head(state.hidden, heads_[head], bundle_->spans.spans[head], opts_);
    st += res.trace;
    for (std::size_t r = 0; r < t; ++r)
      std::copy_n(res.context_accum.begin() + static_cast<std::ptrdiff_t>(r * dh), dh,
                  ctx.begin() + static_cast<std::ptrdiff_t>(r * h + head * dh));
  }
  const QuantTensor context = quantize_fitted(RealTensor({t, h}, std::move(ctx)), c.exponent_bits);

  const auto attn_out = matmul_tiled(context, bundle_->wo, mopts);
  st.add_matmul({t, h, h}, attn_out.stats);

  std::vector<double> x1 = dequantize(state.hidden).data;
  for (std::size_t i = 0; i < x1.size(); ++i) x1[i] += attn_out.accumulated[i];
  st.elementwise_ops += t * h;
  normalize_rows(x1, t, h, bundle_->attn_norm, c.layer_norm_eps, opts_.sfu_frac_bits);
  const QuantTensor x1q = quantize_fitted(RealTensor({t, h}, std::move(x1)), c.exponent_bits);

  auto up = matmul_tiled(x1q, bundle_->ffn_in, mopts);
  st.add_matmul({t, h, f}, up.stats);
  for (auto& v : up.accumulated) v = sfu_round(gelu(v), opts_.sfu_frac_bits);
  st.elementwise_ops += t * f;
  const QuantTensor act = quantize_fitted(RealTensor({t, f}, std::move(up.accumulated)), c.exponent_bits);

  const auto down = matmul_tiled(act, bundle_->ffn_out, mopts);
  st.add_matmul({t, f, h}, down.stats);
  std::vector<double> x2 = dequantize(x1q).data;
  for (std::size_t i = 0; i < x2.size(); ++i) x2[i] += down.accumulated[i];
  st.elementwise_ops += t * h;
  normalize_rows(x2, t, h, bundle_->ffn_norm, c.layer_norm_eps, opts_.sfu_frac_bits);
  st.layernorm_rows += 2 * t;
  st.layernorm_row_len = h;

  LayerOutput out;
  out.hidden = quantize_fitted(RealTensor({t, h}, std::move(x2)), c.exponent_bits);

  // Off-ramp on the first ([CLS]) position.
  const QuantTensor cls({1, h}, std::vector<std::uint8_t>(out.hidden.codes.begin(), out.hidden.codes.begin() + static_cast<std::ptrdiff_t>(h)),
                        out.hidden.format);
  const auto ramp = matmul_tiled(cls, bundle_->off_ramps[state.layer], mopts);
  st.add_matmul({1, h, c.num_classes}, ramp.stats);
  out.logits = dequantize(ramp.output).data;

  state.trace.layers.push_back(std::move(st));
  state.hidden = out.hidden;
  state.layer += 1;
  out.layer = state.layer;
  return out;
}

ForwardResult encoder_forward(std::span<const Token> tokens, const EncoderBundle& bundle, std::size_t upto_layer,
                              const ForwardOptions& opts) {
  if (upto_layer < 1 || upto_layer > bundle.config.num_layers) throw InvalidInput("upto_layer out of range");
  // Non-owning alias: the bundle outlives this call.
  const Encoder encoder(std::shared_ptr<const EncoderBundle>(&bundle, [](const EncoderBundle*) {}), opts);
  auto state = encoder.begin(tokens);
  ForwardResult result;
  for (std::size_t l = 0; l < upto_layer; ++l) {
    auto out = encoder.step(state);
    result.hidden_states.push_back(std::move(out.hidden));
    result.logits.push_back(std::move(out.logits));
  }
  result.trace = std::move(state.trace);
  return result;
}

FlopsReport flops_count(const AttentionSpans& spans, const EncoderConfig& cfg) {
  cfg.validate();
  spans.validate(cfg);
  const double t = static_cast<double>(cfg.seq_len), h = static_cast<double>(cfg.hidden_dim),
               e = static_cast<double>(cfg.embed_dim), f = static_cast<double>(cfg.ffn_dim),
               k = static_cast<double>(cfg.num_classes), dh = static_cast<double>(cfg.head_dim()),
               layers = static_cast<double>(cfg.num_layers);

  auto layer_flops = [&](double heads) {
    const double head_macs = 3.0 * t * h * dh + 2.0 * t * t * dh;
    const double macs = heads * head_macs + t * h * h + 2.0 * t * h * f + h * k;
    const double softmax = heads * t * t;
    const double norm = 2.0 * t * h;
    const double elementwise = heads * t * t + 2.0 * t * h + t * f;
    return 2.0 * macs + kSoftmaxFlopsPerElement * softmax + kLayerNormFlopsPerElement * norm + elementwise;
  };
  const double embedding = 2.0 * t * e * h;

  FlopsReport r;
  r.dense_flops = embedding + layers * layer_flops(static_cast<double>(cfg.num_heads));
  r.predicated_flops = embedding + layers * layer_flops(static_cast<double>(spans.active_heads()));
  r.ratio = r.dense_flops / r.predicated_flops;
  return r;
}

EncoderBundle make_synthetic_bundle(const EncoderConfig& cfg, const SyntheticBundleOptions& opts) {
  cfg.validate();
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto random_real = [&](std::size_t rows, std::size_t cols, double stddev) {
    RealTensor r = RealTensor::zeros({rows, cols});
    for (auto& v : r.data) v = normal(rng) * stddev;
    return r;
  };
  auto weight = [&](std::size_t rows, std::size_t cols, double density) {
    auto r = random_real(rows, cols, 1.0 / std::sqrt(static_cast<double>(rows)));
    if (density < 1.0) r = magnitude_prune(r, density);
    return quantize_fitted(r, cfg.exponent_bits);
  };

  EncoderBundle b;
  b.config = cfg;
  auto emb = magnitude_prune(random_real(cfg.vocab_size, cfg.embed_dim, 1.0), opts.embedding_density);
  b.embedding = encode_bitmask(quantize_fitted(emb, cfg.exponent_bits));
  b.embed_proj = weight(cfg.embed_dim, cfg.hidden_dim, 1.0);
  b.wq = weight(cfg.hidden_dim, cfg.hidden_dim, opts.encoder_density);
  b.wk = weight(cfg.hidden_dim, cfg.hidden_dim, opts.encoder_density);
  b.wv = weight(cfg.hidden_dim, cfg.hidden_dim, opts.encoder_density);
  b.wo = weight(cfg.hidden_dim, cfg.hidden_dim, opts.encoder_density);
  b.ffn_in = weight(cfg.hidden_dim, cfg.ffn_dim, opts.encoder_density);
  b.ffn_out = weight(cfg.ffn_dim, cfg.hidden_dim, opts.encoder_density);

  for (auto* p : {&b.attn_norm, &b.ffn_norm}) {
    p->gamma.resize(cfg.hidden_dim);
    p->beta.resize(cfg.hidden_dim);
    for (auto& g : p->gamma) g = 1.0 + 0.1 * normal(rng);
    for (auto& be : p->beta) be = 0.1 * normal(rng);
  }

  const auto direction = random_real(cfg.hidden_dim, cfg.num_classes, 1.0 / std::sqrt(static_cast<double>(cfg.hidden_dim)));
  double gain = opts.ramp_gain;
  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    RealTensor ramp = direction;
    for (auto& v : ramp.data) v = gain * (v + opts.ramp_noise * normal(rng) / std::sqrt(static_cast<double>(cfg.hidden_dim)));
    b.off_ramps.push_back(quantize_fitted(ramp, cfg.exponent_bits));
    gain *= opts.ramp_growth;
  }

  b.spans = opts.spans.empty() ? AttentionSpans::full(cfg) : AttentionSpans{opts.spans};
  b.validate();
  return b;
}

std::vector<std::vector<Token>> make_sentences(const EncoderConfig& cfg, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> length(std::max<std::size_t>(1, cfg.seq_len / 4), cfg.seq_len);
  std::uniform_int_distribution<Token> token(1, static_cast<Token>(std::max<std::size_t>(2, cfg.vocab_size) - 1));
  std::vector<std::vector<Token>> out(count);
  for (auto& s : out) {
    s.resize(length(rng));
    for (auto& tok : s) tok = token(rng);
  }
  return out;
}

}  // namespace eesim
