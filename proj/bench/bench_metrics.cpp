#include <benchmark/benchmark.h>

#include <map>
#include <random>
#include <string>
#include <vector>

#include "sot/metrics.hpp"

namespace {

struct Corpus {
  std::vector<sot::TokenPair> pairs;
  sot::EmbeddingTable table;
};

// Pairs of 80-200 token texts over a 2000-word vocabulary.
Corpus make_corpus(std::size_t n) {
  std::mt19937_64 rng(42);
  auto text = [&] {
    std::string s;
    const std::size_t len = 80 + rng() % 121;
    for (std::size_t i = 0; i < len; ++i) s += "w" + std::to_string(rng() % 2000) + " ";
    return s;
  };
  Corpus c;
  std::vector<std::string> vocab;
  for (std::size_t i = 0; i < n; ++i) {
    c.pairs.push_back({sot::tokenize(text()), sot::tokenize(text())});
    const auto& g = c.pairs.back().generated.tokens();
    const auto& r = c.pairs.back().reference.tokens();
    vocab.insert(vocab.end(), g.begin(), g.end());
    vocab.insert(vocab.end(), r.begin(), r.end());
  }
  sot::HashEmbedder embedder(7, 64);
  c.table = sot::EmbeddingTable::build(embedder, vocab);
  return c;
}

const Corpus& corpus(std::size_t n) {
  static std::map<std::size_t, Corpus> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_corpus(n)).first;
  return it->second;
}

void BM_ScorePairsSerial(benchmark::State& state) {
  const Corpus& c = corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sot::score_pairs_serial(c.pairs, c.table));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ScorePairsParallel(benchmark::State& state) {
  const Corpus& c = corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sot::score_pairs(c.pairs, c.table));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(BM_ScorePairsSerial)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScorePairsParallel)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
