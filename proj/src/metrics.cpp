#include "sot/metrics.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <stdexcept>

#include "sot/errors.hpp"
#include "sot/hashing.hpp"

namespace sot {

using nlohmann::json;

TokenSequence tokenize(std::string_view text) {
  TokenSequence seq;
  std::string current;
  for (char c : text) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      current += static_cast<char>(std::tolower(u));
    } else if (!current.empty()) {
      seq.tokens_.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) seq.tokens_.push_back(std::move(current));
  return seq;
}

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
  }
  return counts;
}

}  // namespace

double bleu(const TokenSequence& candidate, const TokenSequence& reference,
            int max_n) {
  if (max_n < 1) throw PreconditionError("bleu max_n must be >= 1");
  if (candidate.empty()) return 0.0;
  const auto& cand = candidate.tokens();
  const auto& ref = reference.tokens();
  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    NgramCounts c = ngram_counts(cand, static_cast<std::size_t>(n));
    NgramCounts r = ngram_counts(ref, static_cast<std::size_t>(n));
    std::size_t total = cand.size() >= static_cast<std::size_t>(n)
                            ? cand.size() - static_cast<std::size_t>(n) + 1
                            : 0;
    std::size_t matched = 0;
    for (const auto& [gram, count] : c) {
      auto it = r.find(gram);
      if (it != r.end()) matched += std::min(count, it->second);
    }
    double precision;
    if (matched == 0) {
      if (n == 1) return 0.0;
      precision = 1.0 / static_cast<double>(total + 1);
    } else {
      precision = static_cast<double>(matched) / static_cast<double>(total);
    }
    log_sum += std::log(precision);
  }
  double bp = 1.0;
  if (cand.size() < ref.size()) {
    bp = std::exp(1.0 - static_cast<double>(ref.size()) /
                            static_cast<double>(cand.size()));
  }
  return 100.0 * bp * std::exp(log_sum / max_n);
}

double rouge_l_f(const TokenSequence& candidate, const TokenSequence& reference,
                 double beta) {
  if (candidate.empty() || reference.empty()) return 0.0;
  std::size_t l = lcs_length<std::string>(candidate.tokens(), reference.tokens());
  if (l == 0) return 0.0;
  double p = static_cast<double>(l) / static_cast<double>(candidate.size());
  double r = static_cast<double>(l) / static_cast<double>(reference.size());
  double b2 = beta * beta;
  return (1.0 + b2) * p * r / (r + b2 * p);
}

namespace {

void normalize(std::vector<double>& v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) throw std::runtime_error("embedder returned a zero vector");
  for (double& x : v) x /= norm;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return std::clamp(s, -1.0, 1.0);
}

}  // namespace

HashEmbedder::HashEmbedder(std::uint64_t seed, std::size_t dimension)
    : seed_(seed), dimension_(dimension) {}

std::vector<std::vector<double>> HashEmbedder::embed(
    const std::vector<std::string>& tokens) {
  std::vector<std::vector<double>> out;
  out.reserve(tokens.size());
  for (const auto& token : tokens) {
    std::uint64_t state = seeded_hash(token, seed_);
    std::vector<double> v(dimension_);
    for (double& x : v) {
      x = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    }
    normalize(v);
    out.push_back(std::move(v));
  }
  return out;
}

HttpEmbedder::HttpEmbedder(ProviderConfig cfg, std::string model,
                           std::shared_ptr<HttpTransport> transport)
    : cfg_(std::move(cfg)),
      model_(std::move(model)),
      transport_(transport ? std::move(transport) : make_http_transport()) {}

std::vector<std::vector<double>> HttpEmbedder::embed(
    const std::vector<std::string>& tokens) {
  HttpTransport::Headers headers = {{"Content-Type", "application/json"}};
  if (!cfg_.api_key_env.empty()) {
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw ProviderError(ProviderError::Kind::auth,
                          "environment variable " + cfg_.api_key_env +
                              " is not set");
    }
    headers.emplace_back("Authorization", std::string("Bearer ") + key);
  }
  std::string url = cfg_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  url += "/embeddings";

  constexpr std::size_t kBatch = 256;
  std::vector<std::vector<double>> out;
  for (std::size_t start = 0; start < tokens.size(); start += kBatch) {
    std::size_t end = std::min(tokens.size(), start + kBatch);
    json body = {{"model", model_},
                 {"input", std::vector<std::string>(tokens.begin() + start,
                                                    tokens.begin() + end)}};
    HttpResponse resp =
        transport_->post(url, body.dump(), headers, std::chrono::seconds(cfg_.timeout_s));
    if (resp.status != 200) {
      throw ProviderError(ProviderError::Kind::http,
                          "embeddings: HTTP " + std::to_string(resp.status));
    }
    std::vector<std::vector<double>> batch(end - start);
    try {
      json j = json::parse(resp.body);
      const json& data = j.at("data");
      if (data.size() != batch.size()) {
        throw ProviderError(ProviderError::Kind::malformed_response,
                            "embeddings: count mismatch");
      }
      for (std::size_t i = 0; i < data.size(); ++i) {
        std::size_t idx = data[i].value("index", i);
        if (idx >= batch.size()) {
          throw ProviderError(ProviderError::Kind::malformed_response,
                              "embeddings: index out of range");
        }
        batch[idx] = data[i].at("embedding").get<std::vector<double>>();
      }
    } catch (const json::exception& e) {
      throw ProviderError(ProviderError::Kind::malformed_response,
                          std::string("embeddings: ") + e.what());
    }
    for (auto& v : batch) out.push_back(std::move(v));
  }
  return out;
}

EmbeddingTable EmbeddingTable::build(Embedder& embedder,
                                     const std::vector<std::string>& tokens) {
  std::vector<std::string> unique;
  std::unordered_map<std::string, bool> seen;
  for (const auto& t : tokens) {
    if (seen.emplace(t, true).second) unique.push_back(t);
  }
  EmbeddingTable table;
  if (unique.empty()) return table;
  auto vectors = embedder.embed(unique);
  if (vectors.size() != unique.size()) {
    throw std::runtime_error("embedder returned " + std::to_string(vectors.size()) +
                             " vectors for " + std::to_string(unique.size()) +
                             " tokens");
  }
  table.dimension_ = vectors.front().size();
  for (std::size_t i = 0; i < unique.size(); ++i) {
    if (vectors[i].size() != table.dimension_ || table.dimension_ == 0) {
      throw std::runtime_error("embedder dimension mismatch");
    }
    normalize(vectors[i]);
    table.vectors_.emplace(unique[i], std::move(vectors[i]));
  }
  return table;
}

const std::vector<double>& EmbeddingTable::at(const std::string& token) const {
  auto it = vectors_.find(token);
  if (it == vectors_.end()) {
    throw std::out_of_range("no embedding for token \"" + token + "\"");
  }
  return it->second;
}

double embed_greedy_f1(const TokenSequence& candidate,
                       const TokenSequence& reference,
                       const EmbeddingTable& table) {
  if (candidate.empty() || reference.empty()) return 0.0;
  const auto& c = candidate.tokens();
  const auto& r = reference.tokens();
  std::vector<double> best_for_ref(r.size(), -1.0);
  double precision = 0.0;
  for (const auto& ct : c) {
    const auto& cv = table.at(ct);
    double best = -1.0;
    for (std::size_t j = 0; j < r.size(); ++j) {
      double sim = ct == r[j] ? 1.0 : dot(cv, table.at(r[j]));
      best = std::max(best, sim);
      best_for_ref[j] = std::max(best_for_ref[j], sim);
    }
    precision += best;
  }
  precision /= static_cast<double>(c.size());
  double recall = 0.0;
  for (double b : best_for_ref) recall += b;
  recall /= static_cast<double>(r.size());
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double embed_greedy_f1(const TokenSequence& candidate,
                       const TokenSequence& reference, Embedder& embedder) {
  if (candidate.empty() || reference.empty()) return 0.0;
  std::vector<std::string> vocab = candidate.tokens();
  vocab.insert(vocab.end(), reference.tokens().begin(), reference.tokens().end());
  return embed_greedy_f1(candidate, reference,
                         EmbeddingTable::build(embedder, vocab));
}

std::vector<PairMetrics> score_pairs(std::span<const TokenPair> pairs,
                                     const EmbeddingTable& table) {
  std::vector<PairMetrics> out(pairs.size());
  const auto n = static_cast<std::ptrdiff_t>(pairs.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const TokenPair& p = pairs[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = {
        bleu(p.generated, p.reference),
        rouge_l_f(p.generated, p.reference),
        embed_greedy_f1(p.generated, p.reference, table)};
  }
  return out;
}

SimilarityReport similarity_table(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    Embedder& embedder) {
  if (pairs.empty()) throw PreconditionError("similarity_table needs pairs");
  std::vector<TokenPair> tokenized;
  std::vector<std::string> vocab;
  for (const auto& [generated, human] : pairs) {
    TokenPair tp{tokenize(generated), tokenize(human)};
    vocab.insert(vocab.end(), tp.generated.tokens().begin(), tp.generated.tokens().end());
    vocab.insert(vocab.end(), tp.reference.tokens().begin(), tp.reference.tokens().end());
    tokenized.push_back(std::move(tp));
  }
  // Embedder calls stay on this thread; the kernel below is pure.
  EmbeddingTable table = EmbeddingTable::build(embedder, vocab);
  auto metrics = score_pairs(tokenized, table);

  SimilarityReport report;
  report.n_pairs = metrics.size();
  for (const auto& m : metrics) {
    report.bleu += m.bleu;
    report.rouge_l_f += m.rouge_l_f;
    report.embed_f1 += m.embed_f1;
  }
  const double n = static_cast<double>(metrics.size());
  report.bleu /= n;
  report.rouge_l_f /= n;
  report.embed_f1 /= n;
  return report;
}

}  // namespace sot
