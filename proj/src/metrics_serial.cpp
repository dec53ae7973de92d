#include "sot/metrics.hpp"

namespace sot {

std::vector<PairMetrics> score_pairs_serial(std::span<const TokenPair> pairs,
                                            const EmbeddingTable& table) {
  std::vector<PairMetrics> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    out.push_back({bleu(p.generated, p.reference),
                   rouge_l_f(p.generated, p.reference),
                   embed_greedy_f1(p.generated, p.reference, table)});
  }
  return out;
}

}  // namespace sot
