#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace longwrite::judge {

/// The only scores a judge may emit.
inline constexpr double kQuantizedScores[] = {0.0, 0.25, 0.5, 0.75, 1.0};

/// Exact membership test against kQuantizedScores.
bool is_quantized(double score);

/// Accepts a JSON number or a numeric string ("0.5", "1.0", " 0.75 ") whose
/// value is exactly one of the quantized scores; nullopt otherwise.
std::optional<double> quantized_score(const nlohmann::json& value);

/// Converts Python literal syntax (single-quoted strings, True/False/None,
/// trailing commas) to JSON. Double-quoted input passes through unchanged.
std::string python_literal_to_json(std::string_view text);

/// Strips markdown code fences, cuts the outermost `open`...`close` span and
/// parses it as JSON, falling back to Python literal syntax. Throws
/// UnparseableReply carrying the raw reply.
nlohmann::json parse_lenient(std::string_view raw, char open, char close);

struct ScoreReply {
  std::string reason;
  double score = 0.0;
};

/// Parses an answer-scoring reply object with "reason" and "score" fields.
/// Throws UnparseableReply, MissingFieldError or NonQuantizedScore.
ScoreReply parse_score_reply(std::string_view raw);

}  // namespace longwrite::judge
