#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "longwrite/backends.hpp"
#include "longwrite/gateway.hpp"

namespace lwtest {

namespace fs = std::filesystem;

inline fs::path fixtures_dir() { return fs::path(LW_FIXTURES_DIR); }
inline fs::path demo_sample() { return fixtures_dir() / "samples" / "demo"; }

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "lw") {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

/// Chat backend driven by a callback; records every prompt.
class ScriptedChat : public longwrite::llm::ChatBackend {
 public:
  using Fn = std::function<std::string(const longwrite::llm::ChatRequest&, std::size_t call)>;
  explicit ScriptedChat(Fn fn) : fn_(std::move(fn)) {}

  std::string complete(const longwrite::llm::ChatRequest& request) override {
    std::size_t call;
    {
      const std::lock_guard lock(mutex_);
      call = prompts_.size();
      prompts_.push_back(request.prompt_text());
      temperatures_.push_back(request.temperature);
    }
    return fn_(request, call);
  }

  std::vector<std::string> prompts() const {
    const std::lock_guard lock(mutex_);
    return prompts_;
  }
  std::vector<double> temperatures() const {
    const std::lock_guard lock(mutex_);
    return temperatures_;
  }

 private:
  Fn fn_;
  mutable std::mutex mutex_;
  std::vector<std::string> prompts_;
  std::vector<double> temperatures_;
};

/// Embedding backend driven by a callback; counts every text it embeds.
class ScriptedEmbedder : public longwrite::llm::EmbeddingBackend {
 public:
  using Fn = std::function<longwrite::retrieval::Embedding(const std::string&)>;
  explicit ScriptedEmbedder(Fn fn) : fn_(std::move(fn)) {}

  std::vector<longwrite::retrieval::Embedding> embed_batch(const std::vector<std::string>& texts) override {
    const std::lock_guard lock(mutex_);
    std::vector<longwrite::retrieval::Embedding> out;
    for (const auto& t : texts) {
      seen_.push_back(t);
      out.push_back(fn_(t));
    }
    return out;
  }
  std::vector<std::string> seen() const {
    const std::lock_guard lock(mutex_);
    return seen_;
  }

 private:
  Fn fn_;
  mutable std::mutex mutex_;
  std::vector<std::string> seen_;
};

inline longwrite::llm::GatewayOptions fast_options() {
  longwrite::llm::GatewayOptions options;
  options.retry.backoff = {std::chrono::milliseconds(0)};
  return options;
}

inline std::unique_ptr<longwrite::llm::Gateway> mock_gateway(longwrite::llm::MockOptions options = {}) {
  const auto seed = options.seed;
  const auto dim = options.embedding_dim;
  return std::make_unique<longwrite::llm::Gateway>(std::make_shared<longwrite::llm::MockChatBackend>(options),
                                                   std::make_shared<longwrite::llm::MockEmbeddingBackend>(seed, dim),
                                                   fast_options());
}

/// A unit vector whose cosine with e0 is exactly `cosine` (up to rounding),
/// rotated into dimension `axis` >= 1.
inline longwrite::retrieval::Embedding with_cosine(double cosine, std::size_t dim, std::size_t axis) {
  longwrite::retrieval::Embedding e;
  e.values.assign(dim, 0.0);
  e.values[0] = cosine;
  e.values[axis] = std::sqrt(std::max(0.0, 1.0 - cosine * cosine));
  return e;
}

/// Whitespace-split word list, independent of the library's word counter.
inline std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::string current;
  for (char c : text) {
    if (c == ' ' || c == '\n' || c == '\t' || c == '\r' || c == '\v' || c == '\f') {
      if (!current.empty()) words.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) words.push_back(current);
  return words;
}

}  // namespace lwtest
