#include "longwrite/gateway.hpp"

#include <cmath>
#include <thread>

#include <spdlog/spdlog.h>

#include "longwrite/error.hpp"
#include "longwrite/text.hpp"

namespace longwrite::llm {

ChatRequest ChatRequest::user(std::string prompt, double temperature) {
  ChatRequest request;
  request.messages.push_back({"user", std::move(prompt)});
  request.temperature = temperature;
  return request;
}

void ChatRequest::validate() const {
  if (messages.empty()) throw InvalidInput("chat request has no messages");
  if (!std::isfinite(temperature) || temperature < 0.0 || temperature > 2.0) {
    throw InvalidInput("chat temperature must lie in [0, 2]");
  }
  if (max_output_tokens <= 0) throw InvalidInput("max_output_tokens must be positive");
}

nlohmann::json ChatRequest::to_json() const {
  nlohmann::json body;
  body["model"] = model_name;
  body["messages"] = nlohmann::json::array();
  for (const auto& message : messages) {
    body["messages"].push_back({{"role", message.role}, {"content", message.content}});
  }
  body["temperature"] = temperature;
  body["max_tokens"] = max_output_tokens;
  return body;
}

std::string ChatRequest::prompt_text() const {
  std::string text;
  for (const auto& message : messages) {
    if (!text.empty()) text += "\n";
    text += message.content;
  }
  return text;
}

std::chrono::milliseconds RetryPolicy::delay(int attempt) const {
  if (backoff.empty()) return std::chrono::milliseconds(0);
  const auto index = std::min<std::size_t>(static_cast<std::size_t>(attempt), backoff.size() - 1);
  return backoff[index];
}

TranscriptRecorder::TranscriptRecorder(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::app | std::ios::binary);
  if (!out_) throw IoError("cannot open transcript " + path.string());
}

void TranscriptRecorder::record(std::string_view endpoint, const nlohmann::json& request,
                                const nlohmann::json& response, double latency_ms) {
  nlohmann::json line;
  line["endpoint"] = endpoint;
  line["request_hash"] = hex64(fnv1a64(request.dump()));
  line["latency_ms"] = latency_ms;
  line["request"] = request;
  line["response"] = response;
  std::lock_guard lock(mutex_);
  out_ << line.dump() << '\n';
  out_.flush();
}

std::string chat_request_hash(const ChatRequest& request) { return hex64(fnv1a64(request.to_json().dump())); }

FairLimiter::FairLimiter(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

void FairLimiter::acquire() {
  std::unique_lock lock(mutex_);
  const std::uint64_t ticket = next_ticket_++;
  cv_.wait(lock, [&] { return ticket == serving_ && in_flight_ < capacity_; });
  ++serving_;
  ++in_flight_;
  cv_.notify_all();
}

void FairLimiter::release() {
  {
    std::lock_guard lock(mutex_);
    --in_flight_;
  }
  cv_.notify_all();
}

Gateway::Gateway(std::shared_ptr<ChatBackend> chat, std::shared_ptr<EmbeddingBackend> embedder,
                 GatewayOptions options, std::shared_ptr<TranscriptRecorder> transcript)
    : chat_backend_(std::move(chat)),
      embed_backend_(std::move(embedder)),
      options_(std::move(options)),
      transcript_(std::move(transcript)),
      limiter_(options_.max_in_flight) {}

template <typename Fn>
auto Gateway::with_retries(Fn&& fn) -> decltype(fn()) {
  for (int attempt = 0;; ++attempt) {
    try {
      FairLimiter::Slot slot(limiter_);
      return fn();
    } catch (const BackendError& e) {
      if (!e.transient() || attempt >= options_.retry.max_retries) {
        if (e.transient()) {
          throw BackendError(std::string(e.what()) + " (after " + std::to_string(attempt + 1) + " attempts)");
        }
        throw;
      }
      spdlog::warn("backend call failed ({}), retry {}/{}", e.what(), attempt + 1, options_.retry.max_retries);
      {
        std::lock_guard lock(stats_mutex_);
        ++stats_.retries;
      }
      std::this_thread::sleep_for(options_.retry.delay(attempt));
    }
  }
}

std::string Gateway::chat(ChatRequest request) {
  if (!chat_backend_) throw ConfigError("no chat backend configured");
  if (request.model_name.empty()) request.model_name = options_.model_name;
  request.validate();
  if (options_.context_budget_tokens > 0) {
    std::size_t tokens = 0;
    for (const auto& message : request.messages) tokens += estimate_tokens(message.content);
    if (tokens > options_.context_budget_tokens) {
      throw BudgetError("prompt of ~" + std::to_string(tokens) + " tokens exceeds the context budget of " +
                        std::to_string(options_.context_budget_tokens) + " by " +
                        std::to_string(tokens - options_.context_budget_tokens));
    }
  }

  const auto started = std::chrono::steady_clock::now();
  std::string content = with_retries([&] { return chat_backend_->complete(request); });
  const double latency =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  if (trim(content).empty()) throw EmptyCompletion("backend returned an empty completion");

  if (transcript_) transcript_->record("chat", request.to_json(), content, latency);
  std::lock_guard lock(stats_mutex_);
  ++stats_.chat_calls;
  return content;
}

std::string Gateway::chat(std::string prompt, double temperature) {
  return chat(ChatRequest::user(std::move(prompt), temperature));
}

std::vector<Embedding> Gateway::embed(const std::vector<std::string>& texts) {
  if (!embed_backend_) throw ConfigError("no embedding backend configured");
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (texts[i].empty()) throw InvalidInput("cannot embed an empty string (input " + std::to_string(i) + ")");
  }
  {
    std::lock_guard lock(stats_mutex_);
    ++stats_.embed_calls;
  }

  std::vector<Embedding> out;
  out.reserve(texts.size());
  const std::size_t batch = std::max<std::size_t>(1, embed_backend_->max_batch_size());
  for (std::size_t begin = 0; begin < texts.size(); begin += batch) {
    const std::size_t end = std::min(texts.size(), begin + batch);
    std::vector<std::string> slice(texts.begin() + static_cast<std::ptrdiff_t>(begin),
                                   texts.begin() + static_cast<std::ptrdiff_t>(end));
    const auto started = std::chrono::steady_clock::now();
    auto vectors = with_retries([&] { return embed_backend_->embed_batch(slice); });
    const double latency =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    if (vectors.size() != slice.size()) {
      throw BackendError("embedding backend returned " + std::to_string(vectors.size()) + " vectors for " +
                         std::to_string(slice.size()) + " inputs");
    }
    if (transcript_) {
      nlohmann::json request{{"model", options_.embedding_model_name}, {"input", slice}};
      nlohmann::json response = nlohmann::json::array();
      for (const auto& v : vectors) response.push_back(v.values);
      transcript_->record("embeddings", request, response, latency);
    }
    for (auto& v : vectors) out.push_back(std::move(v));
    std::lock_guard lock(stats_mutex_);
    ++stats_.embed_batches;
    stats_.embedded_texts += slice.size();
  }
  for (const auto& v : out) {
    if (v.dim() == 0 || v.dim() != out.front().dim()) throw BackendError("embedding dimensions are not uniform");
  }
  return out;
}

GatewayStats Gateway::stats() const {
  std::lock_guard lock(stats_mutex_);
  return stats_;
}

}  // namespace longwrite::llm
