#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "longwrite/retrieval.hpp"

namespace longwrite::llm {

using retrieval::Embedding;

inline constexpr double kWritingTemperature = 0.3;
inline constexpr double kEvaluationTemperature = 0.0;

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  double temperature = kWritingTemperature;
  int max_output_tokens = 4096;
  std::string model_name;

  static ChatRequest user(std::string prompt, double temperature);

  /// Throws InvalidInput on an empty message list or a temperature outside [0, 2].
  void validate() const;
  /// The OpenAI-compatible request body.
  nlohmann::json to_json() const;
  /// Concatenated message contents, which is what the mock backend inspects.
  std::string prompt_text() const;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  /// Returns the first choice's content. Throws BackendError (transient or
  /// not) on failure.
  virtual std::string complete(const ChatRequest& request) = 0;
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual std::vector<Embedding> embed_batch(const std::vector<std::string>& texts) = 0;
  virtual std::size_t max_batch_size() const { return 64; }
};

struct RetryPolicy {
  int max_retries = 3;
  std::vector<std::chrono::milliseconds> backoff{std::chrono::milliseconds(500), std::chrono::seconds(2),
                                                 std::chrono::seconds(8)};

  /// Delay before retry number `attempt` (0-based); the last entry repeats.
  std::chrono::milliseconds delay(int attempt) const;
};

struct GatewayOptions {
  std::size_t max_in_flight = 4;
  RetryPolicy retry;
  std::size_t context_budget_tokens = 128000;  // 0 disables the check
  std::string model_name;
  std::string embedding_model_name;
};

struct GatewayStats {
  std::size_t chat_calls = 0;         // successful chat completions
  std::size_t embed_calls = 0;        // embed() invocations
  std::size_t embed_batches = 0;      // backend batch requests
  std::size_t embedded_texts = 0;
  std::size_t retries = 0;
};

/// Appends one JSON record per backend call to a transcript file.
class TranscriptRecorder {
 public:
  explicit TranscriptRecorder(const std::filesystem::path& path);

  void record(std::string_view endpoint, const nlohmann::json& request, const nlohmann::json& response,
              double latency_ms);

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

/// Key used to match a chat request against a recorded transcript.
std::string chat_request_hash(const ChatRequest& request);

/// FIFO admission control: at most `capacity` holders at once, served in
/// arrival order.
class FairLimiter {
 public:
  explicit FairLimiter(std::size_t capacity);

  void acquire();
  void release();

  class Slot {
   public:
    explicit Slot(FairLimiter& limiter) : limiter_(limiter) { limiter_.acquire(); }
    ~Slot() { limiter_.release(); }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

   private:
    FairLimiter& limiter_;
  };

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::size_t capacity_;
  std::size_t in_flight_ = 0;
  std::uint64_t next_ticket_ = 0;
  std::uint64_t serving_ = 0;
};

/// Uniform, thread-safe access to one chat backend and one embedding backend.
class Gateway {
 public:
  Gateway(std::shared_ptr<ChatBackend> chat, std::shared_ptr<EmbeddingBackend> embedder,
          GatewayOptions options = {}, std::shared_ptr<TranscriptRecorder> transcript = nullptr);

  /// Fills in the model name, enforces the context budget (BudgetError),
  /// retries transient failures per the policy and rejects empty completions
  /// (EmptyCompletion).
  std::string chat(ChatRequest request);
  std::string chat(std::string prompt, double temperature);

  /// One vector per text, same order, uniform dimension. Empty strings are
  /// rejected with InvalidInput; batches are split to the backend limit.
  std::vector<Embedding> embed(const std::vector<std::string>& texts);

  GatewayStats stats() const;
  const GatewayOptions& options() const { return options_; }

 private:
  template <typename Fn>
  auto with_retries(Fn&& fn) -> decltype(fn());

  std::shared_ptr<ChatBackend> chat_backend_;
  std::shared_ptr<EmbeddingBackend> embed_backend_;
  GatewayOptions options_;
  std::shared_ptr<TranscriptRecorder> transcript_;
  FairLimiter limiter_;
  mutable std::mutex stats_mutex_;
  GatewayStats stats_;
};

}  // namespace longwrite::llm
