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


#include <benchmark/benchmark.h>

#include <random>
#include <utility>

#include "eesim/numerics.hpp"

namespace {

eesim::QuantTensor random_operand(std::size_t rows, std::size_t cols, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  std::bernoulli_distribution keep(density);
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = keep(rng) ? g(rng) : 0.0;
  return eesim::quantize_fitted(eesim::RealTensor({rows, cols}, std::move(v)), 4);
}

void BM_MatmulTiled(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const double density = state.range(1) / 100.0;
  const auto a = random_operand(n, n, density, 1);
  const auto b = random_operand(n, n, 1.0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(eesim::matmul_tiled(a, b));
  state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_MatmulTiled)->ArgsProduct({{32, 64, 128}, {40, 100}});

}  // namespace

BENCHMARK_MAIN();
