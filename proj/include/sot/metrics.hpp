#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sot/llm.hpp"

namespace sot {

// Lowercased alphanumeric tokens. Only tokenize() produces these.
class TokenSequence {
 public:
  TokenSequence() = default;
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  bool operator==(const TokenSequence&) const = default;

 private:
  friend TokenSequence tokenize(std::string_view text);
  std::vector<std::string> tokens_;
};

// Lowercase, then split on every maximal run of non-alphanumeric bytes.
TokenSequence tokenize(std::string_view text);

// Longest common subsequence length, rolling-row dynamic program.
template <class T>
std::size_t lcs_length(std::span<const T> a, std::span<const T> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t up = row[j];
      row[j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(row[j], row[j - 1]);
      diag = up;
    }
  }
  return row[b.size()];
}

// Sentence BLEU on a 0..100 scale: clipped n-gram precisions, add-one
// smoothing for zero-match orders n >= 2, brevity penalty when the candidate
// is shorter than the reference.
double bleu(const TokenSequence& candidate, const TokenSequence& reference,
            int max_n = 4);

// ROUGE-L F-measure from the LCS: P = L/|c|, R = L/|r|.
double rouge_l_f(const TokenSequence& candidate, const TokenSequence& reference,
                 double beta = 1.0);

class Embedder {
 public:
  virtual ~Embedder() = default;
  // One vector per token, all of one dimension.
  virtual std::vector<std::vector<double>> embed(
      const std::vector<std::string>& tokens) = 0;
};

// Deterministic offline embedder: each token maps to a seeded pseudo-random
// unit vector.
class HashEmbedder final : public Embedder {
 public:
  explicit HashEmbedder(std::uint64_t seed = 0, std::size_t dimension = 64);
  std::vector<std::vector<double>> embed(
      const std::vector<std::string>& tokens) override;

 private:
  std::uint64_t seed_;
  std::size_t dimension_;
};

// POST {base_url}/embeddings with {"model", "input"}; reads data[i].embedding.
class HttpEmbedder final : public Embedder {
 public:
  HttpEmbedder(ProviderConfig cfg, std::string model,
               std::shared_ptr<HttpTransport> transport = nullptr);
  std::vector<std::vector<double>> embed(
      const std::vector<std::string>& tokens) override;

 private:
  ProviderConfig cfg_;
  std::string model_;
  std::shared_ptr<HttpTransport> transport_;
};

// Unit-normalized vectors for a vocabulary, looked up by token.
class EmbeddingTable {
 public:
  // Embeds every distinct token once. Throws std::runtime_error on a count or
  // dimension mismatch from the embedder.
  static EmbeddingTable build(Embedder& embedder,
                              const std::vector<std::string>& tokens);
  const std::vector<double>& at(const std::string& token) const;
  std::size_t dimension() const { return dimension_; }

 private:
  std::unordered_map<std::string, std::vector<double>> vectors_;
  std::size_t dimension_ = 0;
};

double embed_greedy_f1(const TokenSequence& candidate,
                       const TokenSequence& reference,
                       const EmbeddingTable& table);
// Greedy max-cosine matching: P over candidate tokens, R over reference
// tokens, F1 = 2PR/(P+R); 0 when either side is empty.
double embed_greedy_f1(const TokenSequence& candidate,
                       const TokenSequence& reference, Embedder& embedder);

struct PairMetrics {
  double bleu = 0.0;
  double rouge_l_f = 0.0;
  double embed_f1 = 0.0;
  bool operator==(const PairMetrics&) const = default;
};

struct TokenPair {
  TokenSequence generated;
  TokenSequence reference;
};

// Per-pair metrics, OpenMP-parallel over pairs.
std::vector<PairMetrics> score_pairs(std::span<const TokenPair> pairs,
                                     const EmbeddingTable& table);
// Single-threaded reference of score_pairs; same per-pair results.
std::vector<PairMetrics> score_pairs_serial(std::span<const TokenPair> pairs,
                                            const EmbeddingTable& table);

struct SimilarityReport {
  double bleu = 0.0;
  double rouge_l_f = 0.0;
  double embed_f1 = 0.0;
  std::size_t n_pairs = 0;
};

// Mean of each metric over (generated reasoning, human explanation) pairs.
SimilarityReport similarity_table(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    Embedder& embedder);

}  // namespace sot
