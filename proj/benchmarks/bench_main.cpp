#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "fsre/datagen.hpp"
#include "fsre/eval.hpp"
#include "fsre/probe.hpp"
#include "fsre/prompting.hpp"
#include "fsre/synthetic.hpp"

namespace {

const fsre::SyntheticCorpus& corpus() {
  static const fsre::SyntheticCorpus instance;
  return instance;
}

void BM_ScoreLabels(benchmark::State& state) {
  const auto data = corpus().generate(static_cast<std::size_t>(state.range(0)), 3, "b");
  std::vector<std::string> gold, predicted;
  for (std::size_t i = 0; i < data.size(); ++i) {
    gold.push_back(data.instances[i].relation);
    predicted.push_back(data.instances[(i * 7) % data.size()].relation);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(fsre::score_labels(gold, predicted, corpus().schema()));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(gold.size()));
}
BENCHMARK(BM_ScoreLabels)->Arg(10)->Arg(100);

void BM_BuildIclPrompt(benchmark::State& state) {
  const auto demos = corpus().generate(static_cast<std::size_t>(state.range(0)), 5, "d");
  const auto query = corpus().make_instance(0, 99, "q");
  fsre::PromptStyle style;
  style.kind = fsre::PromptKind::instruct;
  style.with_schema = true;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fsre::build_icl_prompt(style, corpus().schema(), demos.instances, query));
  }
}
BENCHMARK(BM_BuildIclPrompt)->Arg(1)->Arg(8);

void BM_ParseGenerated(benchmark::State& state) {
  const auto data = corpus().generate(4, 7, "g");
  std::string completion;
  for (const auto& inst : data.instances) {
    completion += fsre::format_demonstration(inst, corpus().schema(), true) + "\n\n";
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(fsre::parse_generated(completion));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}
BENCHMARK(BM_ParseGenerated);

void BM_TrainProbe(benchmark::State& state) {
  const auto data = corpus().generate(static_cast<std::size_t>(state.range(0)), 11, "p");
  for (auto _ : state) {
    benchmark::DoNotOptimize(fsre::train_probe(data));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}
BENCHMARK(BM_TrainProbe)->Arg(8)->Arg(48);

}  // namespace

BENCHMARK_MAIN();
