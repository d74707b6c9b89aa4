// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include "csm/corpus.hpp"
#include "csm/hin.hpp"
#include "csm/tagger.hpp"

namespace {

using namespace csm;

const corpus::Corpus& bench_corpus() {
  static const corpus::Corpus c = [] {
    const auto schema = corpus::default_synthetic_schema();
    return corpus::generate_synthetic(schema, 2000, 11, corpus::default_profile(schema));
  }();
  return c;
}

void BM_PathScores(benchmark::State& state, bool parallel) {
  const auto graph = hin::build_hin(bench_corpus());
  const auto paths =
      hin::enumerate_metapaths(graph, graph.schema(), static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto scores = parallel ? hin::aggregated_path_scores(graph, paths)
                           : hin::aggregated_path_scores_serial(graph, paths);
    benchmark::DoNotOptimize(scores.data());
  }
  state.counters["paths"] = static_cast<double>(paths.size());
}

void BM_BatchGradient(benchmark::State& state, bool parallel) {
  const auto& data = bench_corpus();
  auto config = tagger::TrainConfig::desk_scale();
  config.dropout = 0.5;
  const auto params =
      tagger::TaggerParams::init(data.vocab.size(), data.schema.num_tags(), config, 3);
  auto examples = tagger::make_examples(data);
  examples.resize(static_cast<std::size_t>(state.range(0)));
  const auto graph = hin::build_hin(data);
  const ncsl::Converter conv(ncsl::MatrixMode::MetaPath, hin::build_matrices(graph, 3));
  tagger::Objective obj{&data.schema, &conv, 0.5, config.dropout};
  tagger::TaggerParams grad;
  for (auto _ : state) {
    Rng rng(5);
    auto loss = parallel ? tagger::batch_gradient(params, examples, obj, rng, grad)
                         : tagger::batch_gradient_serial(params, examples, obj, rng, grad);
    benchmark::DoNotOptimize(loss);
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_PathScores, parallel, true)->Arg(1)->Arg(3)->Arg(5);
BENCHMARK_CAPTURE(BM_PathScores, serial, false)->Arg(1)->Arg(3)->Arg(5);
BENCHMARK_CAPTURE(BM_BatchGradient, parallel, true)->Arg(64)->Arg(256);
BENCHMARK_CAPTURE(BM_BatchGradient, serial, false)->Arg(64)->Arg(256);

BENCHMARK_MAIN();
