#include "support.hpp"

#include <random>

#include "json.hpp"

namespace sot::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  path_ = fs::temp_directory_path() /
          (tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter.fetch_add(1)));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

fs::path data_dir() { return fs::path(SOT_TEST_DATA_DIR); }

Problem gpqa_problem(const std::string& id, const std::string& subject) {
  Problem p;
  p.id = id;
  p.subject = subject;
  p.question_text = "Question " + id + ": which quantity is conserved?";
  p.answer_kind = AnswerKind::single_mcq;
  p.options = {{'A', "energy " + id}, {'B', "entropy " + id}, {'C', "temperature " + id},
               {'D', "pressure " + id}};
  p.gold = GoldAnswer{LabelSet{'A'}};
  p.source_tag = "gpqa";
  return p;
}

std::vector<Problem> synthetic_gpqa(std::size_t n) {
  static const char* subjects[] = {"physics", "chemistry", "biology"};
  std::vector<Problem> out;
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "g%03zu", i);
    Problem p = gpqa_problem(id, subjects[i % 3]);
    if (i % 3 == 0) {
      p.human_explanation = "Energy is conserved in an isolated system because the "
                            "laws are invariant under time translation.";
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Problem> synthetic_jeebench() {
  std::vector<Problem> out;
  auto base = [](std::string id, std::string subject, AnswerKind kind) {
    Problem p;
    p.id = std::move(id);
    p.subject = std::move(subject);
    p.question_text = "Compute the requested quantity for " + p.id + ".";
    p.answer_kind = kind;
    p.source_tag = "jeebench";
    return p;
  };
  Problem a = base("j-int", "physics", AnswerKind::integer);
  a.gold = GoldAnswer{std::int64_t{7}};
  out.push_back(a);
  Problem b = base("j-num", "chemistry", AnswerKind::numeric);
  b.gold = GoldAnswer{2.5};
  out.push_back(b);
  Problem c = base("j-single", "mathematics", AnswerKind::single_mcq);
  c.options = {{'A', "1"}, {'B', "2"}, {'C', "3"}, {'D', "4"}};
  c.gold = GoldAnswer{LabelSet{'C'}};
  out.push_back(c);
  Problem d = base("j-multi", "mathematics", AnswerKind::multi_mcq);
  d.options = {{'A', "x > 0"}, {'B', "x < 5"}, {'C', "x = 9"}, {'D', "x != 3"}};
  d.gold = GoldAnswer{LabelSet{'A', 'B', 'D'}};
  out.push_back(d);
  return out;
}

ProviderConfig mock_config(const std::string& id) {
  ProviderConfig cfg;
  cfg.provider_id = id;
  cfg.kind = "mock";
  cfg.price_per_1k_prompt_tokens = 0.5;
  cfg.price_per_1k_completion_tokens = 1.5;
  return cfg;
}

RunManifest mock_manifest(const fs::path& root, const std::vector<Problem>& problems,
                          StrategySpec strategy, const std::string& run_id) {
  RunManifest m;
  m.run_id = run_id;
  m.dataset_path = root / (run_id + ".jsonl");
  write_problems(m.dataset_path, problems);
  m.strategy = std::move(strategy);
  m.solver_model = {"mock-solver", "mock"};
  if (auto* sot = std::get_if<StoryOfThought>(&m.strategy); sot && sot->narrator_model) {
    m.narrator_model = ModelRef{*sot->narrator_model, "mock"};
  }
  m.scoring = problems.empty() || problems[0].source_tag != "jeebench" ? ScoringPolicy::gpqa()
                                                                        : ScoringPolicy::jeebench();
  m.output_dir = root / "runs";
  m.cache_dir = root / "cache";
  m.providers = {mock_config("mock")};
  return m;
}

std::shared_ptr<ProviderRegistry> registry_of(std::shared_ptr<ChatProvider> provider) {
  auto reg = std::make_shared<ProviderRegistry>();
  reg->add(std::move(provider));
  return reg;
}

void FakeTransport::push(int status, std::string body) {
  std::lock_guard<std::mutex> lock(mu_);
  queue_.emplace_back(status, std::move(body));
}

HttpResponse FakeTransport::post(const std::string& url, const std::string& body,
                                 const Headers& headers, std::chrono::seconds) {
  std::lock_guard<std::mutex> lock(mu_);
  calls_.push_back({url, body, headers});
  if (next_ >= queue_.size()) throw TransportError("no scripted response", false);
  auto [status, reply] = queue_[next_++];
  if (status < 0) throw TransportError("scripted transport failure", status == -2);
  return {status, reply};
}

std::vector<FakeTransport::Call> FakeTransport::calls() const {
  std::lock_guard<std::mutex> lock(mu_);
  return calls_;
}

std::string openai_reply(const std::string& content, int prompt_tokens, int completion_tokens) {
  nlohmann::json j = {
      {"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}}},
      {"usage", {{"prompt_tokens", prompt_tokens}, {"completion_tokens", completion_tokens}}}};
  return j.dump();
}

std::vector<std::vector<double>> OrthogonalEmbedder::embed(
    const std::vector<std::string>& tokens) {
  for (const auto& t : tokens) ids_.emplace(t, ids_.size());
  std::vector<std::vector<double>> out;
  for (const auto& t : tokens) {
    std::vector<double> v(64, 0.0);
    v.at(ids_.at(t)) = 1.0;
    out.push_back(std::move(v));
  }
  return out;
}

SlowProvider::SlowProvider(std::shared_ptr<ChatProvider> inner, std::chrono::milliseconds delay)
    : inner_(std::move(inner)), delay_(delay) {}

CompletionResult SlowProvider::complete(const CompletionRequest& req) {
  const std::size_t now = current_.fetch_add(1) + 1;
  std::size_t seen = max_concurrent_.load();
  while (now > seen && !max_concurrent_.compare_exchange_weak(seen, now)) {
  }
  std::this_thread::sleep_for(delay_);
  CompletionResult r = inner_->complete(req);
  current_.fetch_sub(1);
  return r;
}

FlakyProvider::FlakyProvider(std::shared_ptr<ChatProvider> inner, std::string poison)
    : inner_(std::move(inner)), poison_(std::move(poison)) {}

CompletionResult FlakyProvider::complete(const CompletionRequest& req) {
  for (const auto& m : req.messages) {
    if (m.content.find(poison_) != std::string::npos) {
      throw ProviderError(ProviderError::Kind::exhausted_retries, "scripted outage");
    }
  }
  return inner_->complete(req);
}

}  // namespace sot::testing
