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


// Off-ramp entropy, the exit test, and the exit-layer predictor (an MLP over
// layer-1 entropy, distilled to a uniform-bin lookup table).

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace eesim {

// Per-layer off-ramp entropies for one sentence.
using EntropyTrace = std::vector<double>;

// ln(sum e^x) - sum(x e^x) / sum(e^x), evaluated literally. Overflows for
// large logits; kept as a reference.
double entropy_naive(std::span<const double> logits);

// Max-shifted form: ln S - sum((x - M) e^(x - M)) / S with S = sum e^(x - M).
// Result is clamped to [0, ln K].
double entropy_stable(std::span<const double> logits);

// True iff H < E_T.
bool assess_exit(double entropy, double threshold);

// First 1-based layer whose entropy is below the threshold, else trace length.
std::size_t true_exit_layer(const EntropyTrace& trace, double threshold);

// How "five-layer perceptron" is read: five weight layers (3 hidden) or five
// hidden neuron layers counted with input/output (4 hidden).
enum class MlpDepth { kWeightLayers, kNeuronLayers };

struct PredictorHyper {
  MlpDepth depth = MlpDepth::kWeightLayers;
  std::size_t hidden_width = 64;
  std::size_t epochs = 300;
  std::size_t batch_size = 64;
  double learning_rate = 3e-3;
  std::uint64_t seed = 1;

  std::size_t hidden_layers() const { return depth == MlpDepth::kWeightLayers ? 3 : 4; }
};

struct DenseLayer {
  std::size_t inputs = 0, outputs = 0;
  std::vector<double> weights;  // outputs x inputs, row-major
  std::vector<double> bias;
};

struct ExitPredictor {
  std::size_t num_layers = 0;
  double entropy_threshold = 0.0;
  double max_entropy = 0.0;  // ln K; the LUT spans [0, max_entropy]

  std::vector<DenseLayer> mlp;        // ReLU between layers, linear output
  std::vector<double> loss_history;   // mean training loss per epoch

  std::vector<double> lut_edges;         // upper edge of each bin
  std::vector<std::size_t> lut_layers;   // predicted layer per bin

  // Continuous MLP output in layer units.
  double mlp_output(double h1) const;
  // MLP output rounded and clamped to 1..num_layers.
  std::size_t mlp_layer(double h1) const;

  bool has_lut() const { return !lut_layers.empty(); }
};

// Requires at least 100 traces of equal length. Regresses the true exit layer
// from H1. Throws InvalidInput on an empty or undersized set.
ExitPredictor train_predictor(const std::vector<EntropyTrace>& traces, double threshold, std::size_t num_classes,
                              const PredictorHyper& hyper = {});

// Fills num_bins uniform bins over [0, ln K], each with the rounded MLP output
// at the bin center.
ExitPredictor distill_lut(ExitPredictor predictor, std::size_t num_bins = 256);

// O(1) LUT lookup; H1 past the last edge clamps to the last bin.
std::size_t predict_exit_layer(const ExitPredictor& predictor, double h1);

// [[bin_upper_edge, predicted_layer], ...]
nlohmann::json lut_to_json(const ExitPredictor& predictor);

// Rebuilds a LUT-only predictor. Throws ConfigError on malformed input.
ExitPredictor lut_from_json(const nlohmann::json& j, double threshold, std::size_t num_layers);

}  // namespace eesim
