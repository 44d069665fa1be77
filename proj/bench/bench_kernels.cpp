// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include "generators.hpp"
#include "snp/cascade.hpp"
#include "snp/contest_state.hpp"
#include "snp/kernels.hpp"
#include "snp/stats.hpp"

using namespace snp;

namespace {

const SocialGraph& world() {
  static const SocialGraph g = generate_graph({SmallWorld{5000, 6, 0.1}, 2014});
  return g;
}

const std::vector<std::uint32_t>& seeds() {
  static const auto s = pick_seeds(world().node_count(), 10, 2014);
  return s;
}

const ContestState& big_state() {
  static const ContestState st = replay_records(gen::random_interleaving(100'000, 5).events);
  return st;
}

const std::vector<ContingencyTable2x2>& tables() {
  static const auto t = [] {
    Rng rng(1);
    std::vector<ContingencyTable2x2> out;
    for (int i = 0; i < 2000; ++i) {
      out.push_back({uniform_below(rng, 300), uniform_below(rng, 300), uniform_below(rng, 300), uniform_below(rng, 300)});
    }
    return out;
  }();
  return t;
}

template <auto Fn>
void BM_trials(benchmark::State& state) {
  IncentiveModel m;
  for (auto _ : state) benchmark::DoNotOptimize(Fn(world(), m, seeds(), 7, 64));
}

template <auto Fn>
void BM_fisher(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(Fn(tables()));
}

template <auto Fn>
void BM_classify(benchmark::State& state) {
  const auto ids = big_state().graph().sorted_ids();
  for (auto _ : state) benchmark::DoNotOptimize(Fn(big_state().graph(), ids));
}

}  // namespace

BENCHMARK(BM_trials<run_trials>)->Name("trials/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_trials<run_trials_serial>)->Name("trials/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_fisher<fisher_exact_batch>)->Name("fisher_batch/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_fisher<fisher_exact_batch_serial>)->Name("fisher_batch/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_classify<classify_batch>)->Name("classify/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_classify<classify_batch_serial>)->Name("classify/serial")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
