#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include "sot/hashing.hpp"
#include "sot/llm.hpp"

namespace sot {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json canonical_json(const CompletionRequest& req) {
  json messages = json::array();
  for (const auto& m : req.messages) {
    messages.push_back({{"content", m.content}, {"role", to_string(m.role)}});
  }
  // json objects are std::map backed, so keys serialize sorted.
  return {{"max_tokens", req.max_tokens},
          {"messages", messages},
          {"model_id", req.model_id},
          {"temperature", req.temperature}};
}

bool is_hex_digest(const std::string& s) {
  return s.size() == 64 &&
         s.find_first_not_of("0123456789abcdef") == std::string::npos;
}

}  // namespace

std::string canonical_request(const CompletionRequest& req) {
  // nlohmann renders doubles shortest-round-trip and always keeps a
  // fractional part ("1.0", "0.7"), which is the canonical form we want.
  return canonical_json(req).dump();
}

std::string cache_key(const CompletionRequest& req) {
  return sha256_hex(canonical_request(req));
}

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {}

fs::path ResponseCache::entry_path(const std::string& key) const {
  return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<CompletionResult> ResponseCache::lookup(
    const CompletionRequest& req) const {
  const std::string key = cache_key(req);
  std::ifstream in(entry_path(key), std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    json entry = json::parse(buf.str());
    if (entry.at("key").get<std::string>() != key) return std::nullopt;
    if (request_from_json(entry.at("request")) != req) return std::nullopt;
    CompletionResult res = result_from_json(entry.at("result"));
    res.from_cache = true;
    return res;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void ResponseCache::store(const CompletionRequest& req,
                          const CompletionResult& result) const {
  static std::atomic<std::uint64_t> counter{0};
  const std::string key = cache_key(req);
  const fs::path target = entry_path(key);
  fs::create_directories(target.parent_path());

  CompletionResult stored = result;
  stored.from_cache = false;
  json entry = {
      {"key", key},
      {"request", to_json(req)},
      {"canonical", canonical_request(req)},
      {"result", to_json(stored)},
      {"timestamp", std::chrono::duration_cast<std::chrono::seconds>(
                        std::chrono::system_clock::now().time_since_epoch())
                        .count()},
  };
  std::ostringstream tmp_name;
  tmp_name << key << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id())
           << '.' << counter++;
  const fs::path tmp = target.parent_path() / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write cache entry " + tmp.string());
    out << entry.dump();
    if (!out.flush()) {
      throw std::runtime_error("cannot write cache entry " + tmp.string());
    }
  }
  fs::rename(tmp, target);
}

CacheStats ResponseCache::stats() const {
  CacheStats s;
  std::error_code ec;
  if (!fs::exists(dir_, ec)) return s;
  for (const auto& shard : fs::directory_iterator(dir_)) {
    if (!shard.is_directory()) continue;
    for (const auto& f : fs::directory_iterator(shard.path())) {
      if (f.path().extension() == ".json" && is_hex_digest(f.path().stem())) {
        ++s.entries;
        s.bytes += f.file_size();
      }
    }
  }
  return s;
}

std::size_t ResponseCache::clear() const {
  std::size_t removed = 0;
  std::error_code ec;
  if (!fs::exists(dir_, ec)) return 0;
  for (const auto& shard : fs::directory_iterator(dir_)) {
    const std::string name = shard.path().filename().string();
    if (!shard.is_directory() || name.size() != 2) continue;
    std::vector<fs::path> doomed;
    for (const auto& f : fs::directory_iterator(shard.path())) {
      const std::string stem = f.path().stem().string();
      if ((f.path().extension() == ".json" && is_hex_digest(stem)) ||
          f.path().filename().string().find(".tmp.") != std::string::npos) {
        doomed.push_back(f.path());
      }
    }
    for (const auto& p : doomed) {
      if (p.extension() == ".json") ++removed;
      fs::remove(p);
    }
    if (fs::is_empty(shard.path())) fs::remove(shard.path());
  }
  return removed;
}

CompletionResult cached_complete(const CompletionRequest& req,
                                 ChatProvider& provider,
                                 const ResponseCache* cache) {
  if (cache != nullptr) {
    if (auto hit = cache->lookup(req)) return *hit;
  }
  CompletionResult res = provider.complete(req);
  res.from_cache = false;
  if (cache != nullptr) cache->store(req, res);
  return res;
}

}  // namespace sot
