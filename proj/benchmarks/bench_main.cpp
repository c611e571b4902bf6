// Copyright 2026 The dflute Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <map>
#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "dflute/ensemble.hpp"
#include "dflute/metrics.hpp"
#include "dflute/prompting.hpp"

namespace {

using namespace dflute;

std::string words(std::mt19937_64& rng, int n) {
  static const char* vocab[] = {"the", "river", "of", "gold", "ran", "through", "a", "quiet",
                                "meadow", "like", "thunder", "heart", "café", "brave"};
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += vocab[rng() % std::size(vocab)];
  }
  return out;
}

void BM_LexicalPairScore(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const std::string candidate = words(rng, static_cast<int>(state.range(0)));
  const std::vector<std::string> refs = {words(rng, static_cast<int>(state.range(0))),
                                         words(rng, static_cast<int>(state.range(0)))};
  for (auto _ : state) benchmark::DoNotOptimize(lexical_pair_score(candidate, refs));
}
BENCHMARK(BM_LexicalPairScore)->Arg(10)->Arg(40)->Arg(160);

void BM_BuildPromptAllDims(benchmark::State& state) {
  const Example ex{"b", "I laid in the fields of gold.", "I relaxed in a golden meadow.",
                   std::nullopt, {}, std::nullopt};
  ElaborationSet els("b");
  for (DreamDimension d : kAllDimensions) {
    els.add(Side::Premise, d, "A premise elaboration sentence.");
    els.add(Side::Hypothesis, d, "A hypothesis elaboration sentence.");
  }
  for (auto _ : state) benchmark::DoNotOptimize(build_prompt(SystemId::S3_AllDims, ex, &els));
}
BENCHMARK(BM_BuildPromptAllDims);

void BM_RunEnsemble(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::map<SystemId, PredictionBatch> batches;
  for (SystemId s : kAllSystems) {
    auto& b = batches[s];
    b.system = s;
    for (int i = 0; i < state.range(0); ++i) {
      Prediction p;
      p.system = s;
      p.example_id = "ex" + std::to_string(100000 + i);
      if (rng() % 10) p.label = rng() % 2 ? Label::Entailment : Label::Contradiction;
      p.explanation = "because";
      b.predictions.push_back(std::move(p));
    }
  }
  const auto config = EnsembleConfig::defaults();
  for (auto _ : state) benchmark::DoNotOptimize(run_ensemble(batches, config));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunEnsemble)->Arg(1507);

}  // namespace

BENCHMARK_MAIN();
