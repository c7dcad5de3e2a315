#include <benchmark/benchmark.h>

#include <random>
#include <sstream>

#include "termforge/corpus_store.h"
#include "termforge/termhood.h"

namespace {

const termforge::SentenceStore& store() {
  static const termforge::SentenceStore s = [] {
    std::mt19937_64 rng(7);
    std::ostringstream corpus;
    for (int i = 0; i < 50000; ++i) {
      for (int t = 0; t < 15; ++t) corpus << 'w' << (rng() % 3000) << ' ';
      corpus << "id" << i << '\n';
    }
    std::istringstream in(corpus.str());
    return termforge::SentenceStore::ingest(in, termforge::IngestOptions{});
  }();
  return s;
}

void BM_OccurrencesBigram(benchmark::State& state) {
  const auto& s = store();
  for (auto _ : state) benchmark::DoNotOptimize(s.occurrences("w1 w2").size());
}
BENCHMARK(BM_OccurrencesBigram);

void BM_RelativeFrequency(benchmark::State& state) {
  const auto& s = store();
  termforge::Candidate c{"w10 w20", 2, 0};
  for (auto _ : state) {
    try {
      benchmark::DoNotOptimize(termforge::relative_frequency(c, s));
    } catch (...) {
    }
  }
}
BENCHMARK(BM_RelativeFrequency);

void BM_ContextVariance(benchmark::State& state) {
  const auto& s = store();
  termforge::Candidate c{"w5", 1, 0};
  termforge::ContextVarianceOptions o;
  o.sample_size = static_cast<size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(termforge::context_variance(c, s, o));
}
BENCHMARK(BM_ContextVariance)->Arg(100)->Arg(1000);

}  // namespace
