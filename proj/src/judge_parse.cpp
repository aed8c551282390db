#include "longwrite/judge_parse.hpp"

#include <cctype>
#include <charconv>

#include "longwrite/error.hpp"
#include "longwrite/text.hpp"

namespace longwrite::judge {

namespace {

std::string strip_code_fences(std::string_view raw) {
  std::string out;
  std::size_t pos = 0;
  while (pos < raw.size()) {
    std::size_t end = raw.find('\n', pos);
    if (end == std::string_view::npos) end = raw.size();
    std::string_view line = raw.substr(pos, end - pos);
    if (!trim(line).starts_with("```")) {
      out.append(line);
      out += '\n';
    }
    pos = end + 1;
  }
  return out;
}

bool identifier_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

bool is_quantized(double score) {
  for (double q : kQuantizedScores) {
    if (score == q) return true;
  }
  return false;
}

std::optional<double> quantized_score(const nlohmann::json& value) {
  double score = 0.0;
  if (value.is_number()) {
    score = value.get<double>();
  } else if (value.is_string()) {
    const std::string text(trim(value.get<std::string>()));
    if (text.empty()) return std::nullopt;
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, score);
    if (ec != std::errc() || ptr != end) return std::nullopt;
  } else {
    return std::nullopt;
  }
  if (!is_quantized(score)) return std::nullopt;
  return score == 0.0 ? 0.0 : score;  // folds -0 into 0
}

std::string python_literal_to_json(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '"' || c == '\'') {
      const char quote = c;
      out += '"';
      ++i;
      while (i < text.size() && text[i] != quote) {
        if (text[i] == '\\' && i + 1 < text.size()) {
          const char next = text[i + 1];
          if (next == '\'') {
            out += '\'';
          } else {
            out += '\\';
            out += next;
          }
          i += 2;
          continue;
        }
        if (text[i] == '"') {
          out += "\\\"";
        } else if (text[i] == '\n') {
          out += "\\n";
        } else if (text[i] == '\t') {
          out += "\\t";
        } else {
          out += text[i];
        }
        ++i;
      }
      out += '"';
      ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) && (i == 0 || !identifier_char(text[i - 1]))) {
      std::size_t end = i;
      while (end < text.size() && identifier_char(text[end])) ++end;
      const std::string_view word = text.substr(i, end - i);
      if (word == "True") {
        out += "true";
      } else if (word == "False") {
        out += "false";
      } else if (word == "None") {
        out += "null";
      } else {
        out.append(word);
      }
      i = end;
      continue;
    }
    if (c == ',') {
      std::size_t next = i + 1;
      while (next < text.size() && is_space(text[next])) ++next;
      if (next < text.size() && (text[next] == ']' || text[next] == '}')) {
        ++i;
        continue;
      }
    }
    out += c;
    ++i;
  }
  return out;
}

nlohmann::json parse_lenient(std::string_view raw, char open, char close) {
  const std::string body = strip_code_fences(raw);
  const std::size_t begin = body.find(open);
  const std::size_t end = body.rfind(close);
  if (begin == std::string::npos || end == std::string::npos || end < begin) {
    throw UnparseableReply(std::string("judge reply contains no ") + open + "..." + close + " block",
                           std::string(raw));
  }
  const std::string_view span(body.data() + begin, end - begin + 1);
  try {
    return nlohmann::json::parse(span);
  } catch (const nlohmann::json::exception&) {
  }
  try {
    return nlohmann::json::parse(python_literal_to_json(span));
  } catch (const nlohmann::json::exception& e) {
    throw UnparseableReply(std::string("judge reply is not valid JSON: ") + e.what(), std::string(raw));
  }
}

ScoreReply parse_score_reply(std::string_view raw) {
  const auto object = parse_lenient(raw, '{', '}');
  if (!object.is_object()) throw UnparseableReply("judge reply is not an object", std::string(raw));
  if (!object.contains("reason") || !object["reason"].is_string()) {
    throw MissingFieldError("judge reply lacks a string \"reason\" field", std::string(raw));
  }
  if (!object.contains("score") || object["score"].is_null()) {
    throw MissingFieldError("judge reply lacks a \"score\" field", std::string(raw));
  }
  const auto score = quantized_score(object["score"]);
  if (!score) {
    throw NonQuantizedScore("judge score " + object["score"].dump() + " is not one of 0, 0.25, 0.5, 0.75, 1",
                            std::string(raw));
  }
  return {object["reason"].get<std::string>(), *score};
}

}  // namespace longwrite::judge
