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


#include "eesim/earlyexit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "eesim/error.hpp"

namespace eesim {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using RowMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstRowMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

constexpr std::size_t kMinTraces = 100;

double to_input(double h1, double max_entropy) { return max_entropy > 0.0 ? h1 / max_entropy : 0.0; }

struct Adam {
  MatrixXd m, v;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  explicit Adam(Eigen::Index rows = 0, Eigen::Index cols = 0)
      : m(MatrixXd::Zero(rows, cols)), v(MatrixXd::Zero(rows, cols)) {}

  void step(Eigen::Ref<MatrixXd> param, const MatrixXd& grad, double lr, std::size_t t) {
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
};

}  // namespace

double entropy_naive(std::span<const double> x) {
  if (x.empty()) throw InvalidInput("entropy of an empty logit vector");
  double s = 0.0, sx = 0.0;
  for (double v : x) {
    const double e = std::exp(v);
    s += e;
    sx += v * e;
  }
  return std::log(s) - sx / s;
}

double entropy_stable(std::span<const double> x) {
  if (x.empty()) throw InvalidInput("entropy of an empty logit vector");
  const double m = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(m)) throw InvalidInput("entropy of non-finite logits");
  double s = 0.0, sx = 0.0;
  for (double v : x) {
    const double d = v - m;
    const double e = std::exp(d);
    s += e;
    sx += d * e;
  }
  const double h = std::log(s) - sx / s;
  return std::clamp(h, 0.0, std::log(static_cast<double>(x.size())));
}

bool assess_exit(double entropy, double threshold) { return entropy < threshold; }

std::size_t true_exit_layer(const EntropyTrace& trace, double threshold) {
  if (trace.empty()) throw InvalidInput("empty entropy trace");
  for (std::size_t l = 0; l < trace.size(); ++l) {
    if (assess_exit(trace[l], threshold)) return l + 1;
  }
  return trace.size();
}

double ExitPredictor::mlp_output(double h1) const {
  if (mlp.empty()) throw InvalidInput("predictor has no trained MLP");
  VectorXd a(1);
  a(0) = to_input(h1, max_entropy);
  for (std::size_t i = 0; i < mlp.size(); ++i) {
    const auto& l = mlp[i];
    const ConstRowMap w(l.weights.data(), static_cast<Eigen::Index>(l.outputs), static_cast<Eigen::Index>(l.inputs));
    VectorXd z = w * a + Eigen::Map<const VectorXd>(l.bias.data(), static_cast<Eigen::Index>(l.outputs));
    a = (i + 1 < mlp.size()) ? VectorXd(z.cwiseMax(0.0)) : z;
  }
  return 1.0 + a(0) * static_cast<double>(num_layers - 1);
}

std::size_t ExitPredictor::mlp_layer(double h1) const {
  const double y = std::nearbyint(mlp_output(h1));
  return static_cast<std::size_t>(std::clamp(y, 1.0, static_cast<double>(num_layers)));
}

ExitPredictor train_predictor(const std::vector<EntropyTrace>& traces, double threshold, std::size_t num_classes,
                              const PredictorHyper& hyper) {
  if (traces.empty()) throw InvalidInput("train_predictor: empty trace set");
  if (traces.size() < kMinTraces) {
    throw InvalidInput("train_predictor needs at least " + std::to_string(kMinTraces) + " traces, got " +
                       std::to_string(traces.size()));
  }
  if (num_classes < 2) throw InvalidInput("train_predictor: num_classes must be at least 2");
  if (!(threshold >= 0.0)) throw InvalidInput("train_predictor: threshold must be non-negative");
  if (hyper.hidden_width == 0 || hyper.batch_size == 0) throw InvalidInput("train_predictor: bad hyper-parameters");
  const std::size_t layers = traces.front().size();
  if (layers == 0) throw InvalidInput("train_predictor: empty entropy trace");
  for (const auto& t : traces) {
    if (t.size() != layers) throw InvalidInput("train_predictor: traces differ in length");
    for (double h : t) {
      if (!(h >= 0.0) || !std::isfinite(h)) throw InvalidInput("train_predictor: entropies must be finite and >= 0");
    }
  }

  ExitPredictor p;
  p.num_layers = layers;
  p.entropy_threshold = threshold;
  p.max_entropy = std::log(static_cast<double>(num_classes));

  const auto n = static_cast<Eigen::Index>(traces.size());
  const double span = layers > 1 ? static_cast<double>(layers - 1) : 1.0;
  VectorXd x(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& t = traces[static_cast<std::size_t>(i)];
    x(i) = to_input(t.front(), p.max_entropy);
    y(i) = static_cast<double>(true_exit_layer(t, threshold) - 1) / span;
  }

  const std::size_t hidden = hyper.hidden_layers();
  std::vector<std::size_t> widths{1};
  for (std::size_t i = 0; i < hidden; ++i) widths.push_back(hyper.hidden_width);
  widths.push_back(1);

  std::vector<MatrixXd> w(widths.size() - 1);
  std::vector<VectorXd> b(widths.size() - 1);

  const bool constant = (y.array() == y(0)).all();
  std::mt19937_64 rng(hyper.seed);
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const auto rows = static_cast<Eigen::Index>(widths[i + 1]), cols = static_cast<Eigen::Index>(widths[i]);
    w[i] = MatrixXd::Zero(rows, cols);
    b[i] = VectorXd::Zero(rows);
    if (constant) continue;
    std::normal_distribution<double> he(0.0, std::sqrt(2.0 / static_cast<double>(cols)));
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) w[i](r, c) = he(rng);
    // A spread of first-layer offsets places ReLU kinks across [0, 1].
    if (i == 0) {
      std::uniform_real_distribution<double> u(-1.0, 0.0);
      for (Eigen::Index r = 0; r < rows; ++r) b[i](r) = u(rng) * std::fabs(w[i](r, 0));
    }
  }

  if (constant) {
    b.back()(0) = y(0);
  } else {
    std::vector<Adam> opt_w, opt_b;
    for (std::size_t i = 0; i < w.size(); ++i) {
      opt_w.emplace_back(w[i].rows(), w[i].cols());
      opt_b.emplace_back(b[i].rows(), 1);
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto batch = static_cast<Eigen::Index>(std::min<std::size_t>(hyper.batch_size, traces.size()));
    std::size_t step = 0;
    std::vector<MatrixXd> acts(w.size() + 1);

    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
      // Cosine decay to 1% of the base rate.
      const double progress = static_cast<double>(epoch) / static_cast<double>(hyper.epochs);
      const double lr = hyper.learning_rate * (0.01 + 0.99 * 0.5 * (1.0 + std::cos(3.141592653589793 * progress)));
      std::shuffle(order.begin(), order.end(), rng);
      double loss_sum = 0.0;
      for (Eigen::Index start = 0; start < n; start += batch) {
        const Eigen::Index bs = std::min(batch, n - start);
        MatrixXd in(1, bs);
        VectorXd target(bs);
        for (Eigen::Index j = 0; j < bs; ++j) {
          in(0, j) = x(order[static_cast<std::size_t>(start + j)]);
          target(j) = y(order[static_cast<std::size_t>(start + j)]);
        }
        acts[0] = in;
        for (std::size_t i = 0; i < w.size(); ++i) {
          MatrixXd z = (w[i] * acts[i]).colwise() + b[i];
          acts[i + 1] = (i + 1 < w.size()) ? MatrixXd(z.cwiseMax(0.0)) : z;
        }
        const Eigen::RowVectorXd err = acts.back().row(0) - target.transpose();
        loss_sum += err.squaredNorm();

        MatrixXd delta = (2.0 / static_cast<double>(bs)) * err;
        ++step;
        for (std::size_t i = w.size(); i-- > 0;) {
          const MatrixXd gw = delta * acts[i].transpose();
          const MatrixXd gb = delta.rowwise().sum();
          if (i > 0) {
            delta = (w[i].transpose() * delta).cwiseProduct((acts[i].array() > 0.0).cast<double>().matrix());
          }
          opt_w[i].step(w[i], gw, lr, step);
          opt_b[i].step(b[i], gb, lr, step);
        }
      }
      p.loss_history.push_back(loss_sum / static_cast<double>(n));
    }
  }

  for (std::size_t i = 0; i < w.size(); ++i) {
    DenseLayer l;
    l.inputs = static_cast<std::size_t>(w[i].cols());
    l.outputs = static_cast<std::size_t>(w[i].rows());
    l.weights.resize(l.inputs * l.outputs);
    RowMap(l.weights.data(), w[i].rows(), w[i].cols()) = w[i];
    l.bias.assign(b[i].data(), b[i].data() + b[i].size());
    p.mlp.push_back(std::move(l));
  }
  return p;
}

ExitPredictor distill_lut(ExitPredictor p, std::size_t num_bins) {
  if (num_bins == 0) throw InvalidInput("distill_lut: num_bins must be positive");
  const double width = p.max_entropy / static_cast<double>(num_bins);
  p.lut_edges.resize(num_bins);
  p.lut_layers.resize(num_bins);
  for (std::size_t i = 0; i < num_bins; ++i) {
    p.lut_edges[i] = width * static_cast<double>(i + 1);
    p.lut_layers[i] = p.mlp_layer(width * (static_cast<double>(i) + 0.5));
  }
  p.lut_edges.back() = p.max_entropy;
  return p;
}

std::size_t predict_exit_layer(const ExitPredictor& p, double h1) {
  if (!p.has_lut()) throw InvalidInput("predictor has no distilled LUT");
  const std::size_t bins = p.lut_layers.size();
  const double width = p.max_entropy / static_cast<double>(bins);
  if (!(h1 > 0.0) || width <= 0.0) return p.lut_layers.front();
  const double pos = std::floor(h1 / width);
  const std::size_t idx = pos >= static_cast<double>(bins) ? bins - 1 : static_cast<std::size_t>(pos);
  return p.lut_layers[idx];
}

nlohmann::json lut_to_json(const ExitPredictor& p) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < p.lut_layers.size(); ++i) arr.push_back({p.lut_edges[i], p.lut_layers[i]});
  return arr;
}

ExitPredictor lut_from_json(const nlohmann::json& j, double threshold, std::size_t num_layers) {
  if (!j.is_array() || j.empty()) throw ConfigError("LUT must be a non-empty JSON array");
  if (num_layers == 0) throw ConfigError("LUT requires num_layers >= 1");
  ExitPredictor p;
  p.num_layers = num_layers;
  p.entropy_threshold = threshold;
  for (const auto& entry : j) {
    if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() || !entry[1].is_number_integer()) {
      throw ConfigError("LUT entries must be [bin_upper_edge, layer] pairs");
    }
    const auto layer = entry[1].get<long long>();
    if (layer < 1 || static_cast<std::size_t>(layer) > num_layers) throw ConfigError("LUT layer out of range");
    p.lut_edges.push_back(entry[0].get<double>());
    p.lut_layers.push_back(static_cast<std::size_t>(layer));
  }
  p.max_entropy = p.lut_edges.back();
  const double width = p.max_entropy / static_cast<double>(p.lut_edges.size());
  for (std::size_t i = 0; i < p.lut_edges.size(); ++i) {
    const double expected = width * static_cast<double>(i + 1);
    if (std::fabs(p.lut_edges[i] - expected) > 1e-9 * std::max(1.0, p.max_entropy)) {
      throw ConfigError("LUT bins must be uniform over [0, ln K]");
    }
  }
  return p;
}

}  // namespace eesim
