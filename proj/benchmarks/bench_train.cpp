#include <benchmark/benchmark.h>

#include "mvembed/analysis.hpp"
#include "mvembed/train.hpp"
#include "mvembed/walks.hpp"

using namespace mvembed;

namespace {

SynthResult make_graph(std::size_t nodes) {
  SynthSpec spec;
  spec.num_nodes = nodes;
  spec.p_intra = 20.0 / static_cast<double>(nodes);  // ~constant degree
  spec.p_inter = 2.0 / static_cast<double>(nodes);
  spec.seed = 1;
  return generate_synthetic(spec);
}

void bench_epoch(benchmark::State& state) {
  auto synth = make_graph(static_cast<std::size_t>(state.range(0)));
  WalkConfig wc;
  wc.walk_length = 10;
  wc.walks_per_node = 5;
  wc.window = 3;
  auto corpus = build_corpus(synth.graph, wc);

  TrainConfig cfg;
  cfg.total_dim = 64;
  cfg.epochs = 1;
  cfg.exact_loss_threshold = 0;  // keep the trace out of the timing
  for (auto _ : state) {
    auto r = train<float>(synth.graph, corpus, cfg);
    benchmark::DoNotOptimize(r.tables.center[0].data());
  }
  state.counters["edges"] =
      static_cast<double>(synth.graph.total_edges());
  state.counters["pairs"] = static_cast<double>(corpus.total());
}

void bench_walks(benchmark::State& state) {
  auto synth = make_graph(static_cast<std::size_t>(state.range(0)));
  WalkConfig wc;
  wc.walk_length = 10;
  wc.walks_per_node = 5;
  wc.window = 3;
  for (auto _ : state) {
    auto corpus = build_corpus(synth.graph, wc);
    benchmark::DoNotOptimize(corpus.total());
  }
}

}  // namespace

BENCHMARK(bench_epoch)->Arg(500)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_walks)->Arg(500)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
