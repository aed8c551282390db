#include "longwrite/config.hpp"

#include <cstdlib>
#include <map>
#include <mutex>
#include <set>

#include "longwrite/error.hpp"
#include "longwrite/http_backend.hpp"
#include "longwrite/text.hpp"

namespace longwrite::config {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& object, const std::set<std::string>& allowed, std::string_view where) {
  if (!object.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, value] : object.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key \"" + key + "\" in " + std::string(where));
  }
}

template <typename T>
T get_as(const json& object, const char* key, std::string_view where) {
  try {
    return object.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + "." + key + " has the wrong type");
  }
}

std::filesystem::path resolve_path(const std::string& value, const std::filesystem::path& base_dir) {
  std::filesystem::path path(value);
  return path.is_absolute() ? path : base_dir / path;
}

void apply_backend(const json& object, BackendConfig& backend, const std::filesystem::path& base_dir,
                   const std::string& where) {
  reject_unknown_keys(object,
                      {"kind", "base_url", "api_key_env", "api_key", "model", "embedding_model", "timeout_s",
                       "max_in_flight", "retry", "context_budget_tokens", "embedding_batch", "transcript", "replay",
                       "mock"},
                      where);
  if (object.contains("kind")) backend.kind = backend_kind_from_string(get_as<std::string>(object, "kind", where));
  if (object.contains("base_url")) backend.base_url = get_as<std::string>(object, "base_url", where);
  if (object.contains("api_key_env")) backend.api_key_env = get_as<std::string>(object, "api_key_env", where);
  if (object.contains("api_key")) backend.api_key = get_as<std::string>(object, "api_key", where);
  if (object.contains("model")) backend.model_name = get_as<std::string>(object, "model", where);
  if (object.contains("embedding_model")) {
    backend.embedding_model_name = get_as<std::string>(object, "embedding_model", where);
  }
  if (object.contains("timeout_s")) {
    const double seconds = get_as<double>(object, "timeout_s", where);
    if (!(seconds > 0)) throw ConfigError(where + ".timeout_s must be positive");
    backend.timeout = std::chrono::milliseconds(static_cast<long long>(seconds * 1000.0));
  }
  if (object.contains("max_in_flight")) backend.max_in_flight = get_as<std::size_t>(object, "max_in_flight", where);
  if (object.contains("context_budget_tokens")) {
    backend.context_budget_tokens = get_as<std::size_t>(object, "context_budget_tokens", where);
  }
  if (object.contains("embedding_batch")) {
    backend.embedding_batch = get_as<std::size_t>(object, "embedding_batch", where);
  }
  if (object.contains("transcript")) {
    const auto& value = object.at("transcript");
    if (value.is_null()) {
      backend.transcript.reset();
    } else {
      backend.transcript = resolve_path(get_as<std::string>(object, "transcript", where), base_dir);
    }
  }
  if (object.contains("replay")) {
    backend.replay = resolve_path(get_as<std::string>(object, "replay", where), base_dir);
  }
  if (object.contains("retry")) {
    const auto& retry = object.at("retry");
    const std::string retry_where = where + ".retry";
    reject_unknown_keys(retry, {"max_retries", "backoff_ms"}, retry_where);
    if (retry.contains("max_retries")) backend.retry.max_retries = get_as<int>(retry, "max_retries", retry_where);
    if (retry.contains("backoff_ms")) {
      backend.retry.backoff.clear();
      for (long long ms : get_as<std::vector<long long>>(retry, "backoff_ms", retry_where)) {
        if (ms < 0) throw ConfigError(retry_where + ".backoff_ms entries must be non-negative");
        backend.retry.backoff.emplace_back(ms);
      }
    }
  }
  if (object.contains("mock")) {
    const auto& mock = object.at("mock");
    const std::string mock_where = where + ".mock";
    reject_unknown_keys(mock, {"plan_steps", "writer_length_ratio", "embedding_dim", "rules"}, mock_where);
    if (mock.contains("plan_steps")) backend.mock.plan_steps = get_as<std::size_t>(mock, "plan_steps", mock_where);
    if (mock.contains("writer_length_ratio")) {
      backend.mock.writer_length_ratio = get_as<double>(mock, "writer_length_ratio", mock_where);
    }
    if (mock.contains("embedding_dim")) {
      backend.mock.embedding_dim = get_as<std::size_t>(mock, "embedding_dim", mock_where);
    }
    if (mock.contains("rules")) {
      backend.mock.rules.clear();
      for (const auto& rule : mock.at("rules")) {
        reject_unknown_keys(rule, {"marker", "responses"}, mock_where + ".rules[]");
        backend.mock.rules.push_back({get_as<std::string>(rule, "marker", mock_where),
                                      get_as<std::vector<std::string>>(rule, "responses", mock_where)});
      }
    }
  }
}

void validate_backend(BackendConfig& backend, std::string_view role) {
  const std::string where = "backends." + std::string(role);
  if (backend.max_in_flight < 1) throw ConfigError(where + ".max_in_flight must be at least 1");
  if (backend.retry.max_retries < 0) throw ConfigError(where + ".retry.max_retries must be non-negative");
  if (backend.retry.backoff.empty()) throw ConfigError(where + ".retry.backoff_ms must not be empty");
  if (backend.embedding_batch < 1) throw ConfigError(where + ".embedding_batch must be at least 1");
  switch (backend.kind) {
    case BackendKind::Mock:
      if (!(backend.mock.writer_length_ratio > 0)) throw ConfigError(where + ".mock.writer_length_ratio must be positive");
      if (backend.mock.embedding_dim < 1) throw ConfigError(where + ".mock.embedding_dim must be at least 1");
      break;
    case BackendKind::Replay:
      if (!backend.replay) throw ConfigError(where + " is a replay backend without a \"replay\" transcript");
      if (!std::filesystem::exists(*backend.replay)) {
        throw ConfigError(where + ".replay file " + backend.replay->string() + " does not exist");
      }
      break;
    case BackendKind::OpenAi:
      if (backend.base_url.empty()) throw ConfigError(where + " is an openai backend without a base_url");
      llm::parse_base_url(backend.base_url);
      if (backend.model_name.empty()) throw ConfigError(where + ".model must be set");
      if (backend.api_key.empty()) {
        const char* value = backend.api_key_env.empty() ? nullptr : std::getenv(backend.api_key_env.c_str());
        if (value == nullptr || *value == '\0') {
          throw ConfigError(where + " needs an API key: set the " +
                            (backend.api_key_env.empty() ? std::string("api_key field") : backend.api_key_env) +
                            " environment variable");
        }
        backend.api_key = value;
      }
      break;
  }
}

std::shared_ptr<llm::TranscriptRecorder> shared_recorder(const std::filesystem::path& path) {
  static std::mutex mutex;
  static std::map<std::string, std::weak_ptr<llm::TranscriptRecorder>> recorders;
  const std::lock_guard lock(mutex);
  const std::string key = std::filesystem::absolute(path).lexically_normal().string();
  if (auto existing = recorders[key].lock()) return existing;
  auto recorder = std::make_shared<llm::TranscriptRecorder>(path);
  recorders[key] = recorder;
  return recorder;
}

}  // namespace

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::Mock:
      return "mock";
    case BackendKind::OpenAi:
      return "openai";
    case BackendKind::Replay:
      return "replay";
  }
  return "unknown";
}

BackendKind backend_kind_from_string(std::string_view name) {
  if (name == "mock") return BackendKind::Mock;
  if (name == "openai") return BackendKind::OpenAi;
  if (name == "replay") return BackendKind::Replay;
  throw ConfigError("unknown backend kind \"" + std::string(name) + "\" (expected mock, openai or replay)");
}

void RunConfig::validate() {
  validate_backend(writer, "writer");
  validate_backend(judger, "judger");
  validate_backend(evaluator, "evaluator");
  validate_backend(embedder, "embedder");
  try {
    chunking.validate();
    retrieval.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (requested_lengths.empty()) throw ConfigError("requested_lengths must not be empty");
  for (int length : requested_lengths) {
    if (length <= 0) throw ConfigError("requested lengths must be positive, got " + std::to_string(length));
  }
  if (checklist && !std::filesystem::exists(*checklist)) {
    throw ConfigError("checklist file " + checklist->string() + " does not exist");
  }
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown_keys(root,
                      {"backends", "chunking", "retrieval", "requested_lengths", "mode", "seed", "output_root",
                       "scoring", "checklist"},
                      "config");
  RunConfig config;
  if (root.contains("seed")) config.seed = get_as<std::uint64_t>(root, "seed", "config");
  if (root.contains("backends")) {
    const auto& backends = root.at("backends");
    reject_unknown_keys(backends, {"default", "writer", "judger", "evaluator", "embedder"}, "backends");
    std::pair<const char*, BackendConfig*> roles[] = {{"writer", &config.writer},
                                                      {"judger", &config.judger},
                                                      {"evaluator", &config.evaluator},
                                                      {"embedder", &config.embedder}};
    for (auto& [name, backend] : roles) {
      if (backends.contains("default")) apply_backend(backends.at("default"), *backend, base_dir, "backends.default");
      if (backends.contains(name)) {
        apply_backend(backends.at(name), *backend, base_dir, std::string("backends.") + name);
      }
    }
  }
  if (root.contains("chunking")) {
    const auto& c = root.at("chunking");
    reject_unknown_keys(c, {"target_size", "overlap", "separators", "max_bytes_per_word"}, "chunking");
    if (c.contains("target_size")) config.chunking.target_size = get_as<std::size_t>(c, "target_size", "chunking");
    if (c.contains("overlap")) config.chunking.overlap = get_as<std::size_t>(c, "overlap", "chunking");
    if (c.contains("max_bytes_per_word")) {
      config.chunking.max_bytes_per_word = get_as<std::size_t>(c, "max_bytes_per_word", "chunking");
    }
    if (c.contains("separators")) {
      config.chunking.separators.clear();
      try {
        for (const auto& name : get_as<std::vector<std::string>>(c, "separators", "chunking")) {
          config.chunking.separators.push_back(chunking::separator_from_string(name));
        }
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    }
  }
  if (root.contains("retrieval")) {
    const auto& r = root.at("retrieval");
    reject_unknown_keys(r, {"a", "b", "k", "min_importance"}, "retrieval");
    if (r.contains("a")) config.retrieval.a = get_as<double>(r, "a", "retrieval");
    if (r.contains("b")) config.retrieval.b = get_as<double>(r, "b", "retrieval");
    if (r.contains("k")) config.retrieval.k = get_as<std::size_t>(r, "k", "retrieval");
    if (r.contains("min_importance") && !r.at("min_importance").is_null()) {
      config.retrieval.min_importance = get_as<double>(r, "min_importance", "retrieval");
    }
  }
  if (root.contains("requested_lengths")) {
    config.requested_lengths = get_as<std::vector<int>>(root, "requested_lengths", "config");
  }
  if (root.contains("mode")) {
    config.mode = author::mode_from_string(get_as<std::string>(root, "mode", "config"));
  }
  if (root.contains("output_root")) {
    config.output_root = resolve_path(get_as<std::string>(root, "output_root", "config"), base_dir);
  }
  if (root.contains("scoring")) {
    const auto& s = root.at("scoring");
    reject_unknown_keys(s, {"short_circuit_abstentions"}, "scoring");
    if (s.contains("short_circuit_abstentions")) {
      config.scoring.short_circuit_abstentions = get_as<bool>(s, "short_circuit_abstentions", "scoring");
    }
  }
  if (root.contains("checklist") && !root.at("checklist").is_null()) {
    config.checklist = resolve_path(get_as<std::string>(root, "checklist", "config"), base_dir);
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  try {
    return parse_config(text, base);
  } catch (Error& e) {
    e.add_context(path.string());
    throw;
  }
}

RunConfig mock_config(std::uint64_t seed) {
  RunConfig config;
  config.seed = seed;
  config.judger.model_name = "mock-judger";
  config.evaluator.model_name = "mock-evaluator";
  config.embedder.model_name = "mock-embedder";
  for (BackendConfig* backend : {&config.writer, &config.judger, &config.evaluator, &config.embedder}) {
    backend->retry.backoff = {std::chrono::milliseconds(0)};
  }
  config.validate();
  return config;
}

std::unique_ptr<llm::Gateway> make_gateway(const BackendConfig& backend, std::uint64_t seed) {
  std::shared_ptr<llm::ChatBackend> chat;
  std::shared_ptr<llm::EmbeddingBackend> embed;
  switch (backend.kind) {
    case BackendKind::Mock: {
      llm::MockOptions options = backend.mock;
      options.seed = seed;
      chat = std::make_shared<llm::MockChatBackend>(options);
      embed = std::make_shared<llm::MockEmbeddingBackend>(seed, options.embedding_dim,
                                                          std::min<std::size_t>(backend.embedding_batch, 16));
      break;
    }
    case BackendKind::Replay: {
      auto replay = std::make_shared<llm::ReplayBackend>(*backend.replay);
      chat = replay;
      embed = replay;
      break;
    }
    case BackendKind::OpenAi: {
      llm::HttpBackendConfig http;
      http.base_url = backend.base_url;
      http.api_key = backend.api_key;
      http.model_name = backend.model_name;
      http.embedding_model_name = backend.embedding_model_name;
      http.timeout = backend.timeout;
      http.embedding_batch = backend.embedding_batch;
      auto client = std::make_shared<llm::OpenAiBackend>(http);
      chat = client;
      embed = client;
      break;
    }
  }
  llm::GatewayOptions options;
  options.max_in_flight = backend.max_in_flight;
  options.retry = backend.retry;
  options.context_budget_tokens = backend.context_budget_tokens;
  options.model_name = backend.model_name;
  options.embedding_model_name = backend.embedding_model_name;
  std::shared_ptr<llm::TranscriptRecorder> recorder;
  if (backend.transcript) recorder = shared_recorder(*backend.transcript);
  return std::make_unique<llm::Gateway>(chat, embed, options, recorder);
}

nlohmann::ordered_json describe(const RunConfig& config) {
  nlohmann::ordered_json separators = nlohmann::ordered_json::array();
  for (auto s : config.chunking.separators) separators.push_back(std::string(chunking::to_string(s)));
  nlohmann::ordered_json out;
  out["chunking"] = {{"target_size", config.chunking.target_size},
                     {"overlap", config.chunking.overlap},
                     {"separators", separators},
                     {"max_bytes_per_word", config.chunking.max_bytes_per_word}};
  out["retrieval"] = {{"a", config.retrieval.a}, {"b", config.retrieval.b}, {"k", config.retrieval.k}};
  out["retrieval"]["min_importance"] =
      config.retrieval.min_importance ? nlohmann::ordered_json(*config.retrieval.min_importance) : nlohmann::ordered_json(nullptr);
  out["mode"] = std::string(author::to_string(config.mode));
  out["seed"] = config.seed;
  nlohmann::ordered_json models;
  std::pair<const char*, const BackendConfig*> roles[] = {{"writer", &config.writer},
                                                          {"judger", &config.judger},
                                                          {"evaluator", &config.evaluator},
                                                          {"embedder", &config.embedder}};
  for (const auto& [name, backend] : roles) {
    models[name] = {{"kind", std::string(to_string(backend->kind))},
                    {"model", backend->model_name},
                    {"embedding_model", backend->embedding_model_name}};
  }
  out["backends"] = models;
  return out;
}

}  // namespace longwrite::config
