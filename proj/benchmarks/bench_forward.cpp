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

#include <memory>

#include "eesim/model.hpp"

namespace {

void BM_EncoderForward(benchmark::State& state) {
  auto cfg = eesim::EncoderConfig::toy();
  cfg.num_layers = static_cast<std::size_t>(state.range(0));
  const auto bundle = eesim::make_synthetic_bundle(cfg, {});
  const auto sentence = eesim::make_sentences(cfg, 1, 3).front();
  for (auto _ : state) benchmark::DoNotOptimize(eesim::encoder_forward(sentence, bundle, cfg.num_layers));
}
BENCHMARK(BM_EncoderForward)->Arg(1)->Arg(4)->Arg(12)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
