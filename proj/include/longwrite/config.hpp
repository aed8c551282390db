#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "longwrite/author.hpp"
#include "longwrite/backends.hpp"
#include "longwrite/chunking.hpp"
#include "longwrite/evaluator.hpp"
#include "longwrite/gateway.hpp"
#include "longwrite/retrieval.hpp"

namespace longwrite::config {

enum class BackendKind { Mock, OpenAi, Replay };

std::string_view to_string(BackendKind kind);
BackendKind backend_kind_from_string(std::string_view name);

struct BackendConfig {
  BackendKind kind = BackendKind::Mock;
  std::string base_url;
  std::string api_key_env = "OPENAI_API_KEY";
  std::string api_key;  // resolved from api_key_env unless given inline
  std::string model_name = "mock-writer";
  std::string embedding_model_name = "mock-embedding";
  std::chrono::milliseconds timeout{std::chrono::seconds(120)};
  std::size_t max_in_flight = 4;
  llm::RetryPolicy retry;
  std::size_t context_budget_tokens = 128000;
  std::size_t embedding_batch = 64;
  std::optional<std::filesystem::path> transcript;  // record every call here
  std::optional<std::filesystem::path> replay;      // transcript to serve from (kind = replay)
  llm::MockOptions mock;
};

struct RunConfig {
  BackendConfig writer;
  BackendConfig judger;
  BackendConfig evaluator;
  BackendConfig embedder;
  chunking::ChunkingConfig chunking;
  retrieval::RetrievalParams retrieval;
  std::vector<int> requested_lengths{8000};
  author::Mode mode = author::Mode::Ral;
  std::uint64_t seed = 0;
  std::filesystem::path output_root = "runs";
  evaluator::ScoringOptions scoring;
  std::optional<std::filesystem::path> checklist;  // bundled checklist when absent

  /// Checks every field and resolves API keys from the environment. Throws
  /// ConfigError; no backend is contacted.
  void validate();
};

/// Parses a JSON config (comments allowed). Relative paths resolve against
/// `base_dir`. The result is validated.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

/// A config wired entirely to mock backends.
RunConfig mock_config(std::uint64_t seed = 0);

/// Builds a gateway for one role. Roles sharing a transcript path share one
/// recorder per call to this function, so keep the returned gateway alive for
/// the whole command.
std::unique_ptr<llm::Gateway> make_gateway(const BackendConfig& backend, std::uint64_t seed);

/// Parameters echoed into run_meta.json and sweep reports.
nlohmann::ordered_json describe(const RunConfig& config);

}  // namespace longwrite::config
