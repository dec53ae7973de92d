#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "sot/metrics.hpp"
#include "support.hpp"

namespace sot {
namespace {

std::vector<std::string> toks(std::string_view text) { return tokenize(text).tokens(); }

// Oracle: LCS as the longest subsequence of `a` that is also a subsequence of
// `b`, by enumerating every subset of positions of `a`.
std::size_t brute_lcs(const std::string& a, const std::string& b) {
  std::size_t best = 0;
  for (unsigned mask = 0; mask < (1u << a.size()); ++mask) {
    std::size_t len = static_cast<std::size_t>(__builtin_popcount(mask));
    if (len <= best) continue;
    std::size_t j = 0;
    bool ok = true;
    for (std::size_t i = 0; i < a.size() && ok; ++i) {
      if (!(mask & (1u << i))) continue;
      while (j < b.size() && b[j] != a[i]) ++j;
      if (j == b.size()) ok = false;
      else ++j;
    }
    if (ok) best = len;
  }
  return best;
}

std::size_t dp_lcs(const std::string& a, const std::string& b) {
  return lcs_length<char>(std::span<const char>(a.data(), a.size()),
                          std::span<const char>(b.data(), b.size()));
}

TEST(Tokenize, Examples) {
  EXPECT_EQ(toks("The cat, sat!"), (std::vector<std::string>{"the", "cat", "sat"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_EQ(toks("x2  y"), (std::vector<std::string>{"x2", "y"}));
}

TEST(Bleu, PinnedClippedPrecisionCase) {
  // 100 * (1/4 * 1/4 * 1/3 * 1/2)^(1/4), evaluated independently.
  EXPECT_NEAR(bleu(tokenize("the the the the"), tokenize("the cat")), 31.947155212313624, 1e-9);
}

TEST(Bleu, IdentityAndEdgeCases) {
  EXPECT_NEAR(bleu(tokenize("a b c d e"), tokenize("a b c d e")), 100.0, 1e-9);
  EXPECT_EQ(bleu(tokenize(""), tokenize("a b")), 0.0);
  EXPECT_EQ(bleu(tokenize("x y z w"), tokenize("a b c d")), 0.0);
  // Brevity penalty only for short candidates.
  EXPECT_LT(bleu(tokenize("a b c d"), tokenize("a b c d e f g h")), 100.0);
}

TEST(Bleu, IdentityOnRandomSequencesAndPermutationSensitivity) {
  std::mt19937 rng(3);
  bool saw_sensitive = false;
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    const int len = 4 + static_cast<int>(rng() % 12);
    for (int i = 0; i < len; ++i) text += "w" + std::to_string(rng() % 6) + " ";
    ASSERT_NEAR(bleu(tokenize(text), tokenize(text)), 100.0, 1e-9) << text;
    std::vector<std::string> words = toks(text);
    std::shuffle(words.begin(), words.end(), rng);
    std::string shuffled;
    for (const auto& w : words) shuffled += w + " ";
    if (bleu(tokenize(shuffled), tokenize(text)) < 100.0 - 1e-9) saw_sensitive = true;
  }
  EXPECT_TRUE(saw_sensitive);
}

TEST(RougeL, PinnedCase) {
  EXPECT_EQ(dp_lcs("ABCBDAB", "BDCABA"), 4u);
  EXPECT_EQ(brute_lcs("ABCBDAB", "BDCABA"), 4u);
  EXPECT_NEAR(rouge_l_f(tokenize("A B C B D A B"), tokenize("B D C A B A")),
              0.6153846153846154, 1e-9);
  EXPECT_EQ(rouge_l_f(tokenize("a b c"), tokenize("a b c")), 1.0);
  EXPECT_EQ(rouge_l_f(tokenize("a b"), tokenize("c d")), 0.0);
  EXPECT_EQ(rouge_l_f(tokenize(""), tokenize("c d")), 0.0);
}

TEST(RougeL, DpMatchesBruteForceUpToLengthSix) {
  std::vector<std::string> all{""};
  for (std::size_t len = 1; len <= 6; ++len) {
    std::vector<std::string> next;
    for (const auto& s : all) {
      if (s.size() + 1 != len) continue;
      for (char c : std::string("abc")) next.push_back(s + c);
    }
    all.insert(all.end(), next.begin(), next.end());
  }
  ASSERT_EQ(all.size(), 1093u);
  for (const auto& a : all) {
    for (const auto& b : all) ASSERT_EQ(dp_lcs(a, b), brute_lcs(a, b)) << a << " / " << b;
  }
}

TEST(EmbedF1, OrthogonalMockCase) {
  testing::OrthogonalEmbedder e;
  EXPECT_EQ(embed_greedy_f1(tokenize("a b"), tokenize("a c"), e), 0.5);
  EXPECT_EQ(embed_greedy_f1(tokenize(""), tokenize("a c"), e), 0.0);
  EXPECT_EQ(embed_greedy_f1(tokenize("b a a"), tokenize("a b"), e), 1.0);
}

TEST(EmbedF1, IdentityAndBoundsUnderHashEmbedder) {
  HashEmbedder e(5);
  std::mt19937 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    std::string a, b;
    for (int i = 0; i < 1 + static_cast<int>(rng() % 8); ++i) a += "t" + std::to_string(rng() % 10) + " ";
    for (int i = 0; i < 1 + static_cast<int>(rng() % 8); ++i) b += "t" + std::to_string(rng() % 10) + " ";
    EXPECT_NEAR(embed_greedy_f1(tokenize(a), tokenize(a), e), 1.0, 1e-12);
    const double f = embed_greedy_f1(tokenize(a), tokenize(b), e);
    EXPECT_LE(f, 1.0 + 1e-12);
    EXPECT_GE(f, -1.0 - 1e-12);
  }
}

TEST(EmbeddingTable, RejectsBadEmbedder) {
  struct Short : Embedder {
    std::vector<std::vector<double>> embed(const std::vector<std::string>&) override {
      return {{1.0}};
    }
  } bad;
  EXPECT_THROW(EmbeddingTable::build(bad, {"a", "b"}), std::runtime_error);
}

std::vector<TokenPair> random_pairs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<TokenPair> pairs;
  for (std::size_t k = 0; k < n; ++k) {
    std::string a, b;
    for (int i = 0; i < 5 + static_cast<int>(rng() % 30); ++i) a += "w" + std::to_string(rng() % 25) + " ";
    for (int i = 0; i < 5 + static_cast<int>(rng() % 30); ++i) b += "w" + std::to_string(rng() % 25) + " ";
    pairs.push_back({tokenize(a), tokenize(b)});
  }
  return pairs;
}

EmbeddingTable table_for(const std::vector<TokenPair>& pairs, Embedder& e) {
  std::vector<std::string> vocab;
  for (const auto& p : pairs) {
    vocab.insert(vocab.end(), p.generated.tokens().begin(), p.generated.tokens().end());
    vocab.insert(vocab.end(), p.reference.tokens().begin(), p.reference.tokens().end());
  }
  return EmbeddingTable::build(e, vocab);
}

TEST(ScorePairs, ParallelEqualsSerial) {
  auto pairs = random_pairs(200, 1);
  HashEmbedder e(2);
  EmbeddingTable table = table_for(pairs, e);
  EXPECT_EQ(score_pairs(pairs, table), score_pairs_serial(pairs, table));
}

TEST(SimilarityTable, Examples) {
  HashEmbedder e;
  SimilarityReport same = similarity_table({{"a b c d", "a b c d"}, {"x y z w", "x y z w"}}, e);
  EXPECT_NEAR(same.bleu, 100.0, 1e-9);
  EXPECT_NEAR(same.rouge_l_f, 1.0, 1e-12);
  EXPECT_NEAR(same.embed_f1, 1.0, 1e-12);
  EXPECT_EQ(same.n_pairs, 2u);

  SimilarityReport one = similarity_table({{"the the the the", "the cat"}}, e);
  EXPECT_NEAR(one.bleu, 31.947155212313624, 1e-9);

  std::vector<std::pair<std::string, std::string>> pairs = {
      {"alpha beta gamma", "beta gamma delta"}, {"one two", "two three four"}, {"x", "y z"}};
  SimilarityReport fwd = similarity_table(pairs, e);
  std::reverse(pairs.begin(), pairs.end());
  SimilarityReport rev = similarity_table(pairs, e);
  EXPECT_NEAR(fwd.bleu, rev.bleu, 1e-12);
  EXPECT_NEAR(fwd.rouge_l_f, rev.rouge_l_f, 1e-12);
  EXPECT_NEAR(fwd.embed_f1, rev.embed_f1, 1e-12);
}

TEST(HttpEmbedderTest, ParsesOutOfOrderData) {
  auto transport = std::make_shared<testing::FakeTransport>();
  transport->push(200, R"({"data":[{"index":1,"embedding":[0,2]},{"index":0,"embedding":[3,0]}]})");
  ProviderConfig cfg = testing::mock_config("emb");
  cfg.kind = "openai";
  cfg.base_url = "http://example.invalid/v1";
  cfg.api_key_env = "";
  HttpEmbedder e(cfg, "embed-model", transport);
  auto v = e.embed({"a", "b"});
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0], (std::vector<double>{3, 0}));
  EXPECT_EQ(v[1], (std::vector<double>{0, 2}));
  auto calls = transport->calls();
  ASSERT_EQ(calls.size(), 1u);
  EXPECT_EQ(calls[0].url, "http://example.invalid/v1/embeddings");
}

}  // namespace
}  // namespace sot
