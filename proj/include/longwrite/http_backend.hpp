#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "longwrite/gateway.hpp"

namespace longwrite::llm {

struct HttpEndpoint {
  std::string scheme_host_port;  // e.g. "https://api.openai.com"
  std::string path_prefix;       // e.g. "/v1"
};

/// Splits an OpenAI-compatible base URL. Throws ConfigError on a URL that is
/// not http(s).
HttpEndpoint parse_base_url(const std::string& base_url);

struct HttpBackendConfig {
  std::string base_url;
  std::string api_key;
  std::string model_name;
  std::string embedding_model_name;
  std::chrono::milliseconds timeout{std::chrono::seconds(120)};
  std::size_t embedding_batch = 64;
};

/// POST {base_url}/chat/completions and POST {base_url}/embeddings with the
/// standard OpenAI request and response bodies. Transport failures, 429 and
/// 5xx responses are reported as transient BackendErrors.
class OpenAiBackend : public ChatBackend, public EmbeddingBackend {
 public:
  explicit OpenAiBackend(HttpBackendConfig config);
  ~OpenAiBackend() override;

  std::string complete(const ChatRequest& request) override;
  std::vector<Embedding> embed_batch(const std::vector<std::string>& texts) override;
  std::size_t max_batch_size() const override { return config_.embedding_batch; }

 private:
  nlohmann::json post(const std::string& route, const nlohmann::json& body);

  HttpBackendConfig config_;
  HttpEndpoint endpoint_;
};

}  // namespace longwrite::llm
