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
#include <vector>

#include "eesim/earlyexit.hpp"

namespace {

std::vector<double> logits(std::size_t k) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0, 4);
  std::vector<double> v(k);
  for (auto& x : v) x = g(rng);
  return v;
}

void BM_EntropyStable(benchmark::State& state) {
  const auto v = logits(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eesim::entropy_stable(v));
}
BENCHMARK(BM_EntropyStable)->Arg(2)->Arg(3)->Arg(64);

void BM_EntropyNaive(benchmark::State& state) {
  const auto v = logits(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eesim::entropy_naive(v));
}
BENCHMARK(BM_EntropyNaive)->Arg(2)->Arg(3)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
