#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "longwrite/gateway.hpp"

namespace longwrite::llm {

/// Overrides the mock's built-in reply for prompts containing `marker`.
/// Responses are handed out in order; the last one repeats.
struct MockRule {
  std::string marker;
  std::vector<std::string> responses;
};

struct MockOptions {
  std::uint64_t seed = 0;
  std::size_t plan_steps = 0;        // 0 picks one step per ~500 requested words
  double writer_length_ratio = 1.0;  // fraction of each step's target the writer produces
  std::size_t embedding_dim = 64;
  std::vector<MockRule> rules;
};

/// Deterministic offline chat backend. It recognises which prompt template it
/// received by marker phrases and answers with schema-valid canned output: plan
/// lines for the planner, step text sized to the step's word budget, QA pairs,
/// abstentions or short answers, and quantized judge scores. Without rules the
/// reply is a pure function of (prompt content, seed).
class MockChatBackend : public ChatBackend {
 public:
  explicit MockChatBackend(MockOptions options = {});

  std::string complete(const ChatRequest& request) override;

  std::size_t calls() const { return calls_.load(); }

 private:
  std::string reply(const std::string& prompt) const;

  MockOptions options_;
  std::mutex rule_mutex_;
  std::vector<std::size_t> rule_cursor_;
  std::atomic<std::size_t> calls_{0};
};

/// Maps text to a seeded pseudo-random unit vector via a stable content hash.
class MockEmbeddingBackend : public EmbeddingBackend {
 public:
  explicit MockEmbeddingBackend(std::uint64_t seed = 0, std::size_t dim = 64, std::size_t max_batch = 16);

  std::vector<Embedding> embed_batch(const std::vector<std::string>& texts) override;
  std::size_t max_batch_size() const override { return max_batch_; }

  static Embedding vector_for(std::string_view text, std::uint64_t seed, std::size_t dim);

 private:
  std::uint64_t seed_;
  std::size_t dim_;
  std::size_t max_batch_;
};

/// Serves chat and embedding calls from a recorded transcript with no network
/// access. Unknown requests raise a non-transient BackendError.
class ReplayBackend : public ChatBackend, public EmbeddingBackend {
 public:
  explicit ReplayBackend(const std::filesystem::path& transcript);

  std::string complete(const ChatRequest& request) override;
  std::vector<Embedding> embed_batch(const std::vector<std::string>& texts) override;

  std::size_t chat_records() const { return chat_.size(); }

 private:
  std::unordered_map<std::string, std::string> chat_;
  std::unordered_map<std::string, Embedding> embeddings_;
};

/// Deterministic word-salad generator shared by the mock writer and tests.
std::string mock_prose(std::uint64_t seed, std::size_t words);

}  // namespace longwrite::llm
