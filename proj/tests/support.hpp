#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sot/datasets.hpp"
#include "sot/llm.hpp"
#include "sot/metrics.hpp"
#include "sot/runner.hpp"

namespace sot::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "sot");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

// Source-tree directory holding golden files and fixtures.
std::filesystem::path data_dir();

// Four-option GPQA-style problem with gold at option A.
Problem gpqa_problem(const std::string& id, const std::string& subject = "physics");

// `n` synthetic single_mcq problems, gold always at position 1, subjects
// cycling physics/chemistry/biology; every third problem carries a human
// explanation.
std::vector<Problem> synthetic_gpqa(std::size_t n);

// A small JEEBench-style mix of all four answer kinds across three subjects.
std::vector<Problem> synthetic_jeebench();

ProviderConfig mock_config(const std::string& id = "mock");

// Manifest over `problems` written to <root>/<run_id>.jsonl, with outputs in
// <root>/runs and the cache in <root>/cache. Solver and narrator use the mock
// provider "mock".
RunManifest mock_manifest(const std::filesystem::path& root,
                          const std::vector<Problem>& problems, StrategySpec strategy,
                          const std::string& run_id = "run");

// Registry holding exactly `provider`.
std::shared_ptr<ProviderRegistry> registry_of(std::shared_ptr<ChatProvider> provider);

// Scripted transport: pops canned responses in order and records requests.
class FakeTransport : public HttpTransport {
 public:
  struct Call {
    std::string url;
    std::string body;
    Headers headers;
  };
  // status < 0 throws TransportError (timeout when status == -2).
  void push(int status, std::string body);
  HttpResponse post(const std::string& url, const std::string& body,
                    const Headers& headers, std::chrono::seconds timeout) override;
  std::vector<Call> calls() const;

 private:
  mutable std::mutex mu_;
  std::vector<std::pair<int, std::string>> queue_;
  std::size_t next_ = 0;
  std::vector<Call> calls_;
};

std::string openai_reply(const std::string& content, int prompt_tokens = 10,
                         int completion_tokens = 5);

// Distinct tokens map to distinct one-hot vectors, so any two different
// tokens have cosine 0.
class OrthogonalEmbedder : public Embedder {
 public:
  std::vector<std::vector<double>> embed(const std::vector<std::string>& tokens) override;

 private:
  std::map<std::string, std::size_t> ids_;
};

// Wraps a provider, sleeping per call and tracking concurrent calls.
class SlowProvider : public ChatProvider {
 public:
  SlowProvider(std::shared_ptr<ChatProvider> inner, std::chrono::milliseconds delay);
  CompletionResult complete(const CompletionRequest& req) override;
  const ProviderConfig& config() const override { return inner_->config(); }
  std::size_t max_concurrent() const { return max_concurrent_.load(); }

 private:
  std::shared_ptr<ChatProvider> inner_;
  std::chrono::milliseconds delay_;
  std::atomic<std::size_t> current_{0};
  std::atomic<std::size_t> max_concurrent_{0};
};

// Always throws ProviderError(exhausted_retries) for prompts containing
// `poison`; otherwise delegates.
class FlakyProvider : public ChatProvider {
 public:
  FlakyProvider(std::shared_ptr<ChatProvider> inner, std::string poison);
  CompletionResult complete(const CompletionRequest& req) override;
  const ProviderConfig& config() const override { return inner_->config(); }

 private:
  std::shared_ptr<ChatProvider> inner_;
  std::string poison_;
};

}  // namespace sot::testing
