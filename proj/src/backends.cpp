#include "longwrite/backends.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <regex>

#include "longwrite/error.hpp"
#include "longwrite/templates.hpp"
#include "longwrite/text.hpp"

namespace longwrite::llm {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::array<std::string_view, 48> kVocabulary{
    "model",     "attention",  "benchmark", "dataset",    "retrieval", "context",   "evaluation", "method",
    "results",   "accuracy",   "baseline",  "training",   "inference", "latency",   "tokens",     "analysis",
    "framework", "experiment", "metric",    "performance", "language", "summary",   "approach",   "layer",
    "sequence",  "encoder",    "decoder",   "corpus",     "signal",    "robust",    "improves",   "compares",
    "reports",   "shows",      "achieves",  "reduces",    "increases", "across",    "several",    "distinct",
    "long",      "input",      "output",    "scores",     "papers",    "findings",  "limited",    "notable"};

constexpr std::array<std::string_view, 7> kPlanPoints{
    "Title and introduction: describe the field, its history, current progress and challenges",
    "Introduce the main content and contributions of the first paper",
    "Introduce the main content and contributions of the second paper",
    "Introduce the main content and contributions of the third paper",
    "Summarize the commonalities and innovations shared by the three papers",
    "Compare the experimental results of the papers and discuss their differences",
    "Conclusion: summarize the main findings and suggest future research directions"};

constexpr std::array<std::string_view, 5> kScores{"0", "0.25", "0.5", "0.75", "1"};

std::string_view between(std::string_view text, std::string_view open, std::string_view close) {
  std::size_t begin = text.find(open);
  if (begin == std::string_view::npos) return {};
  begin += open.size();
  std::size_t end = text.find(close, begin);
  if (end == std::string_view::npos) return {};
  return text.substr(begin, end - begin);
}

std::string tag_content(std::string_view prompt, std::string_view tag) {
  auto block = templates::find_tag_block(prompt, tag);
  if (!block.found) return {};
  return std::string(prompt.substr(block.begin, block.end - block.begin));
}

std::string plan_reply(std::string_view prompt, const MockOptions& options) {
  static const std::regex total_re(R"(Total word count should be about (\d+) words)");
  std::size_t total = 2000;
  std::match_results<std::string_view::const_iterator> match;
  if (std::regex_search(prompt.begin(), prompt.end(), match, total_re)) total = std::stoul(match[1].str());
  std::size_t steps = options.plan_steps;
  if (steps == 0) steps = std::clamp<std::size_t>((total + 250) / 500, 1, 64);
  std::string out;
  for (std::size_t i = 0; i < steps; ++i) {
    const std::size_t words = total / steps + (i < total % steps ? 1 : 0);
    std::string point(kPlanPoints[i % kPlanPoints.size()]);
    if (i >= kPlanPoints.size()) point += " (part " + std::to_string(i / kPlanPoints.size() + 1) + ")";
    out += "Paragraph " + std::to_string(i + 1) + " - Main Point: " + point +
           " - Word Count: " + std::to_string(std::max<std::size_t>(words, 1)) + " words\n";
  }
  return out;
}

std::string writer_reply(std::string_view prompt, const MockOptions& options) {
  // Only the current-step block drives the output, so agentwrite and
  // retrieve-and-restate runs produce identical step text.
  const std::string step = tag_content(prompt, "step");
  static const std::regex count_re(R"(Word Count:\s*(\d+))");
  std::smatch match;
  std::size_t target = 300;
  if (std::regex_search(step, match, count_re)) target = std::stoul(match[1].str());
  const auto words = static_cast<std::size_t>(std::llround(static_cast<double>(target) * options.writer_length_ratio));
  return mock_prose(fnv1a64(step) ^ options.seed, std::max<std::size_t>(words, 1));
}

std::string qa_generation_reply(std::uint64_t seed) {
  nlohmann::json list = nlohmann::json::array();
  std::uint64_t state = seed;
  for (int i = 0; i < 6; ++i) {
    const int paper = i % 3 + 1;
    const auto word = kVocabulary[splitmix64(state) % kVocabulary.size()];
    list.push_back({{"question", "In paper " + std::to_string(paper) + ", what " + std::string(word) +
                                     " value is reported for experiment " + std::to_string(i + 1) + "?"},
                    {"answer", "Paper " + std::to_string(paper) + " reports a " + std::string(word) +
                                   " value of " + std::to_string(splitmix64(state) % 100) + "."},
                    {"papers", {paper}}});
  }
  const std::array<std::vector<int>, 6> cross{{{1, 2}, {2, 3}, {1, 3}, {1, 2, 3}, {1, 2}, {2, 3}}};
  for (int i = 0; i < 6; ++i) {
    const auto word = kVocabulary[splitmix64(state) % kVocabulary.size()];
    list.push_back({{"question", "How does the reported " + std::string(word) + " compare across papers in setting " +
                                     std::to_string(i + 1) + "?"},
                    {"answer", "The papers differ by " + std::to_string(splitmix64(state) % 20 + 1) +
                                   " points on " + std::string(word) + "."},
                    {"papers", cross[static_cast<std::size_t>(i)]}});
  }
  return list.dump(2);
}

std::string answer_reply(std::string_view prompt, std::uint64_t seed) {
  const std::string question = tag_content(prompt, "question");
  std::uint64_t state = fnv1a64(question) ^ seed;
  if (splitmix64(state) % 6 == 0) return std::string(templates::kAbstentionPhrase);
  std::string answer = "According to the summary,";
  while (answer.size() < 60 + splitmix64(state) % 80) {
    answer += " ";
    answer += kVocabulary[splitmix64(state) % kVocabulary.size()];
  }
  return answer + ".";
}

std::string scoring_reply(std::string_view prompt, std::uint64_t seed) {
  const std::string predicted = tag_content(prompt, "predict");
  const std::string question = tag_content(prompt, "question");
  std::uint64_t state = fnv1a64(question + "\x1f" + predicted) ^ seed;
  const auto score = kScores[splitmix64(state) % kScores.size()];
  nlohmann::json reply{{"reason", "Mock comparison of the predicted answer against the gold answer."},
                       {"score", score}};
  return reply.dump(2);
}

std::string quality_reply(std::string_view prompt, std::uint64_t seed) {
  const std::string_view block =
      between(prompt, "Here are checklists of this instruction:\n\n", "\n\nTo further remind you");
  nlohmann::json items;
  try {
    items = nlohmann::json::parse(block);
  } catch (const nlohmann::json::exception&) {
    return "[]";
  }
  const std::uint64_t base =
      fnv1a64(between(prompt, "Here is the survey given by LLM:\n\n", "\n\nSince the response may be rather long")) ^
      seed;
  std::string out = "[";
  bool first = true;
  for (const auto& item : items) {
    const std::string id = item.value("checklist_id", "");
    std::uint64_t state = base ^ fnv1a64(id);
    nlohmann::json entry{{"checklist_id", id},
                         {"reason", "Mock assessment of " + id + "."},
                         {"evaluation_score", kScores[splitmix64(state) % kScores.size()]}};
    if (!first) out += ",\n";
    out += entry.dump();
    first = false;
  }
  return out + "]";
}

}  // namespace

std::string mock_prose(std::uint64_t seed, std::size_t words) {
  std::uint64_t state = seed;
  std::string out;
  std::size_t sentence_left = 0;
  for (std::size_t i = 0; i < words; ++i) {
    std::string word(kVocabulary[splitmix64(state) % kVocabulary.size()]);
    if (sentence_left == 0) {
      sentence_left = 8 + splitmix64(state) % 10;
      word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
      if (i > 0) out += ' ';
    } else {
      out += ' ';
    }
    out += word;
    if (--sentence_left == 0 || i + 1 == words) {
      out += '.';
      sentence_left = 0;
    }
  }
  return out;
}

MockChatBackend::MockChatBackend(MockOptions options)
    : options_(std::move(options)), rule_cursor_(options_.rules.size(), 0) {}

std::string MockChatBackend::complete(const ChatRequest& request) {
  ++calls_;
  const std::string prompt = request.prompt_text();
  {
    std::lock_guard lock(rule_mutex_);
    for (std::size_t i = 0; i < options_.rules.size(); ++i) {
      const auto& rule = options_.rules[i];
      if (rule.responses.empty() || prompt.find(rule.marker) == std::string::npos) continue;
      const std::size_t cursor = std::min(rule_cursor_[i], rule.responses.size() - 1);
      ++rule_cursor_[i];
      return rule.responses[cursor];
    }
  }
  return reply(prompt);
}

std::string MockChatBackend::reply(const std::string& prompt) const {
  using namespace templates;
  // Writer and planner prompts embed the summary instruction, so they are
  // matched before it.
  if (prompt.find(kWriterMarker) != std::string::npos) return writer_reply(prompt, options_);
  if (prompt.find(kPlannerMarker) != std::string::npos) return plan_reply(prompt, options_);
  if (prompt.find(kQualityMarker) != std::string::npos) return quality_reply(prompt, options_.seed);
  if (prompt.find(kAnswerScoringMarker) != std::string::npos) return scoring_reply(prompt, options_.seed);
  if (prompt.find(kQuestionAnsweringMarker) != std::string::npos) return answer_reply(prompt, options_.seed);
  if (prompt.find(kQaGenerationMarker) != std::string::npos) {
    return qa_generation_reply(fnv1a64(prompt) ^ options_.seed);
  }
  if (prompt.find(kSummaryMarker) != std::string::npos) {
    return mock_prose(fnv1a64(prompt) ^ options_.seed, 400);
  }
  return "mock response " + hex64(fnv1a64(prompt) ^ options_.seed);
}

MockEmbeddingBackend::MockEmbeddingBackend(std::uint64_t seed, std::size_t dim, std::size_t max_batch)
    : seed_(seed), dim_(dim == 0 ? 1 : dim), max_batch_(max_batch == 0 ? 1 : max_batch) {}

Embedding MockEmbeddingBackend::vector_for(std::string_view text, std::uint64_t seed, std::size_t dim) {
  std::uint64_t state = fnv1a64(text) ^ (seed * 0x9e3779b97f4a7c15ULL);
  Embedding out;
  out.values.resize(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& v : out.values) {
      v = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53 * 2.0 - 1.0;
      norm += v * v;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (auto& v : out.values) v /= norm;
  return out;
}

std::vector<Embedding> MockEmbeddingBackend::embed_batch(const std::vector<std::string>& texts) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    if (text.empty()) throw InvalidInput("cannot embed an empty string");
    out.push_back(vector_for(text, seed_, dim_));
  }
  return out;
}

ReplayBackend::ReplayBackend(const std::filesystem::path& transcript) {
  const std::string contents = read_file(transcript);
  std::size_t line_start = 0;
  std::size_t line_number = 0;
  while (line_start < contents.size()) {
    std::size_t line_end = contents.find('\n', line_start);
    if (line_end == std::string::npos) line_end = contents.size();
    const std::string_view line(contents.data() + line_start, line_end - line_start);
    line_start = line_end + 1;
    ++line_number;
    if (trim(line).empty()) continue;
    try {
      const auto record = nlohmann::json::parse(line);
      const std::string endpoint = record.at("endpoint").get<std::string>();
      if (endpoint == "chat") {
        chat_.emplace(hex64(fnv1a64(record.at("request").dump())), record.at("response").get<std::string>());
      } else if (endpoint == "embeddings") {
        const auto& inputs = record.at("request").at("input");
        const auto& vectors = record.at("response");
        for (std::size_t i = 0; i < inputs.size() && i < vectors.size(); ++i) {
          embeddings_.emplace(inputs[i].get<std::string>(), Embedding{vectors[i].get<std::vector<double>>()});
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(transcript.string() + ":" + std::to_string(line_number) + ": " + e.what());
    }
  }
}

std::string ReplayBackend::complete(const ChatRequest& request) {
  auto it = chat_.find(chat_request_hash(request));
  if (it == chat_.end()) throw BackendError("replay transcript has no record for chat request " + chat_request_hash(request));
  return it->second;
}

std::vector<Embedding> ReplayBackend::embed_batch(const std::vector<std::string>& texts) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    auto it = embeddings_.find(text);
    if (it == embeddings_.end()) throw BackendError("replay transcript has no embedding for input");
    out.push_back(it->second);
  }
  return out;
}

}  // namespace longwrite::llm
