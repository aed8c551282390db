#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "longwrite/http_backend.hpp"

#include <algorithm>

#include <httplib.h>

#include "longwrite/error.hpp"

namespace longwrite::llm {

HttpEndpoint parse_base_url(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("base_url must start with http:// or https://");
  const std::string scheme = base_url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw ConfigError("unsupported base_url scheme '" + scheme + "'");
  const auto path_begin = base_url.find('/', scheme_end + 3);
  HttpEndpoint endpoint;
  endpoint.scheme_host_port = base_url.substr(0, path_begin);
  if (endpoint.scheme_host_port.size() <= scheme_end + 3) throw ConfigError("base_url has no host");
  if (path_begin != std::string::npos) endpoint.path_prefix = base_url.substr(path_begin);
  while (!endpoint.path_prefix.empty() && endpoint.path_prefix.back() == '/') endpoint.path_prefix.pop_back();
  return endpoint;
}

OpenAiBackend::OpenAiBackend(HttpBackendConfig config)
    : config_(std::move(config)), endpoint_(parse_base_url(config_.base_url)) {}

OpenAiBackend::~OpenAiBackend() = default;

nlohmann::json OpenAiBackend::post(const std::string& route, const nlohmann::json& body) {
  // One client per call keeps the backend safe to share across threads.
  httplib::Client client(endpoint_.scheme_host_port);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);

  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const std::string path = endpoint_.path_prefix + route;
  auto result = client.Post(path, headers, body.dump(), "application/json");
  if (!result) {
    throw BackendError("POST " + config_.base_url + route + " failed: " + httplib::to_string(result.error()),
                       /*transient=*/true);
  }
  const int status = result->status;
  if (status == 429 || status >= 500) {
    throw BackendError("POST " + route + " returned HTTP " + std::to_string(status), /*transient=*/true);
  }
  if (status != 200) {
    throw BackendError("POST " + route + " returned HTTP " + std::to_string(status) + ": " +
                       result->body.substr(0, 500));
  }
  try {
    return nlohmann::json::parse(result->body);
  } catch (const nlohmann::json::exception& e) {
    throw BackendError("POST " + route + " returned invalid JSON: " + e.what());
  }
}

std::string OpenAiBackend::complete(const ChatRequest& request) {
  ChatRequest outgoing = request;
  if (outgoing.model_name.empty()) outgoing.model_name = config_.model_name;
  const auto response = post("/chat/completions", outgoing.to_json());
  try {
    const auto& message = response.at("choices").at(0).at("message");
    if (!message.contains("content") || message["content"].is_null()) {
      throw EmptyCompletion("chat completion has no content");
    }
    return message["content"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("unexpected chat completion body: ") + e.what());
  }
}

std::vector<Embedding> OpenAiBackend::embed_batch(const std::vector<std::string>& texts) {
  nlohmann::json body{{"model", config_.embedding_model_name}, {"input", texts}};
  const auto response = post("/embeddings", body);
  try {
    const auto& data = response.at("data");
    std::vector<Embedding> out(texts.size());
    std::vector<bool> seen(texts.size(), false);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const std::size_t index = data[i].contains("index") ? data[i]["index"].get<std::size_t>() : i;
      if (index >= texts.size()) throw BackendError("embedding index out of range");
      out[index].values = data[i].at("embedding").get<std::vector<double>>();
      seen[index] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
      throw BackendError("embedding response is missing inputs");
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("unexpected embeddings body: ") + e.what());
  }
}

}  // namespace longwrite::llm
