#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "longwrite/corpus.hpp"
#include "longwrite/gateway.hpp"
#include "longwrite/qa.hpp"

namespace longwrite::evaluator {

inline constexpr std::size_t kAspectCount = 8;
inline constexpr std::size_t kMetricsPerAspect = 5;
inline constexpr std::size_t kSingleQuestions = 6;
inline constexpr std::size_t kCrossQuestions = 6;

struct ChecklistItem {
  int aspect_index = 0;  // 1..8
  int metric_index = 0;  // 1..5
  std::string id;
  std::string aspect;
  std::string metric;
  std::string description;
};

/// The bundled 8 x 5 checklist (data/checklist.json, compiled in).
const std::vector<ChecklistItem>& bundled_checklist();
std::string_view bundled_checklist_json();

/// Parses a checklist file and checks that it holds exactly 8 aspects of 5
/// metrics with unique ids. Throws InvalidInput otherwise.
std::vector<ChecklistItem> parse_checklist(std::string_view contents);

struct JudgedAnswer {
  std::string qa_id;
  std::string predicted;
  bool abstained = false;
  std::string reason;
  double score = 0.0;
  std::string judger_reply;
  std::string evaluator_reply;  // empty when the evaluator was not consulted
};

struct QualityJudgement {
  std::string checklist_id;
  std::string reason;
  double score = 0.0;
};

struct ConsistencyScore {
  double s_c = 0.0;
  double single_mean = 0.0;
  double cross_mean = 0.0;
};

struct QualityScore {
  double s_q = 0.0;
  std::array<double, kAspectCount> per_aspect{};
};

/// Mean single-context score per paper position; nullopt marks an empty group.
using PositionalMeans = std::array<std::optional<double>, 3>;

/// Length score: 1 at or above the required length, 0 for an empty output,
/// otherwise max(0, 1 - (l / l' - 1) / 2). Throws DomainError when l <= 0.
double length_score(long required, long generated);

struct Answer {
  std::string predicted;
  bool abstained = false;
  std::string raw_reply;
};

/// True when a reply is the abstention phrase (trimmed, case-insensitive,
/// optional trailing period, straight or curly apostrophe).
bool is_abstention(std::string_view reply);

/// The judger answers the question from the summary alone, at temperature 0.
Answer answer_question(llm::Gateway& judger, std::string_view summary, std::string_view question);

struct ScoringOptions {
  // Abstentions score 0 without consulting the evaluator.
  bool short_circuit_abstentions = true;
};

JudgedAnswer score_answer(llm::Gateway& evaluator, const QAPair& pair, const Answer& answer,
                          const ScoringOptions& options = {});

/// Throws IncompleteSet when either kind has no judged answers and
/// InvalidInput for answers naming unknown QA ids.
ConsistencyScore consistency_score(std::span<const JudgedAnswer> judged, std::span<const QAPair> qa_pairs);

/// Renders the checklist for the `{{ checklists }}` slot.
std::string render_checklist(std::span<const ChecklistItem> items);

/// Validates a quality reply against the expected items: exactly one entry per
/// id with a quantized score. Throws UnparseableReply, MissingFieldError,
/// CardinalityError, DuplicateIdError or NonQuantizedScore.
std::vector<QualityJudgement> parse_quality_reply(std::string_view raw, std::span<const ChecklistItem> expected);

struct QualityJudgeResult {
  std::vector<QualityJudgement> judgements;  // checklist order
  std::vector<std::string> raw_replies;
  bool used_per_aspect_fallback = false;
};

/// One call for the whole checklist, retried once; after repeated failure the
/// checklist is re-issued one aspect (5 items) per call.
QualityJudgeResult quality_judge(llm::Gateway& evaluator, std::string_view summary,
                                 std::span<const ChecklistItem> checklist);

/// Mean of per-aspect metric means. Throws IncompleteSet when an item lacks a
/// judgement.
QualityScore quality_score(std::span<const QualityJudgement> judgements, std::span<const ChecklistItem> checklist);

struct QaGenerationResult {
  std::vector<QAPair> pairs;
  std::vector<std::string> raw_replies;
  bool shortfall = false;  // fewer than 6 of either kind after one retry
};

QaGenerationResult generate_qa_pairs(llm::Gateway& generator, const corpus::SampleTriplet& triplet);

PositionalMeans positional_breakdown(std::span<const JudgedAnswer> judged, std::span<const QAPair> qa_pairs);

struct ScoreReport {
  long required_words = 0;
  long generated_words = 0;
  double s_l = 0.0;
  ConsistencyScore consistency;
  QualityScore quality;
  PositionalMeans positional_means;
};

struct EvaluationRoles {
  llm::Gateway& judger;
  llm::Gateway& evaluator;
};

struct EvaluationResult {
  ScoreReport report;
  std::vector<JudgedAnswer> judged;
  QualityJudgeResult quality;
};

/// Judges every QA pair concurrently (bounded by the gateways), grades the
/// summary against the checklist and folds everything into a ScoreReport.
EvaluationResult evaluate_summary(std::string_view summary, std::span<const QAPair> qa_pairs, long required_words,
                                  EvaluationRoles roles, std::span<const ChecklistItem> checklist,
                                  const ScoringOptions& options = {});

/// scores.json: the report plus every judged answer and quality judgement with
/// raw judge replies.
nlohmann::ordered_json to_json(const EvaluationResult& result, std::span<const ChecklistItem> checklist);

}  // namespace longwrite::evaluator
