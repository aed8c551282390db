#include "longwrite/evaluator.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <set>

#include <spdlog/spdlog.h>

#include "longwrite/error.hpp"
#include "longwrite/judge_parse.hpp"
#include "longwrite/templates.hpp"
#include "longwrite/text.hpp"

namespace longwrite::evaluator {

namespace {

double mean(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::map<std::string, const QAPair*> index_pairs(std::span<const QAPair> qa_pairs) {
  std::map<std::string, const QAPair*> by_id;
  for (const auto& pair : qa_pairs) by_id[pair.id] = &pair;
  return by_id;
}

const QAPair& lookup(const std::map<std::string, const QAPair*>& by_id, const std::string& id) {
  const auto it = by_id.find(id);
  if (it == by_id.end()) throw InvalidInput("judged answer refers to unknown QA id \"" + id + "\"");
  return *it->second;
}

std::vector<ChecklistItem> parse_items(const nlohmann::json& doc) {
  const auto& items = doc.is_object() ? doc.at("items") : doc;
  if (!items.is_array()) throw InvalidInput("checklist must be a list of items");
  std::vector<ChecklistItem> out;
  for (const auto& entry : items) {
    ChecklistItem item;
    item.aspect_index = entry.at("aspect_index").get<int>();
    item.metric_index = entry.at("metric_index").get<int>();
    item.id = entry.at("id").get<std::string>();
    item.aspect = entry.value("aspect", "");
    item.metric = entry.value("metric", "");
    item.description = entry.at("description").get<std::string>();
    out.push_back(std::move(item));
  }
  return out;
}

void validate_checklist(std::vector<ChecklistItem>& items) {
  if (items.size() != kAspectCount * kMetricsPerAspect) {
    throw InvalidInput("checklist has " + std::to_string(items.size()) + " items, expected " +
                       std::to_string(kAspectCount * kMetricsPerAspect));
  }
  std::set<std::string> ids;
  std::set<std::pair<int, int>> cells;
  for (const auto& item : items) {
    if (item.aspect_index < 1 || item.aspect_index > static_cast<int>(kAspectCount) || item.metric_index < 1 ||
        item.metric_index > static_cast<int>(kMetricsPerAspect)) {
      throw InvalidInput("checklist item \"" + item.id + "\" has an out-of-range aspect or metric index");
    }
    if (item.id.empty() || !ids.insert(item.id).second) {
      throw InvalidInput("checklist id \"" + item.id + "\" is empty or repeated");
    }
    if (!cells.insert({item.aspect_index, item.metric_index}).second) {
      throw InvalidInput("checklist repeats aspect " + std::to_string(item.aspect_index) + " metric " +
                         std::to_string(item.metric_index));
    }
  }
  std::sort(items.begin(), items.end(), [](const ChecklistItem& x, const ChecklistItem& y) {
    return std::pair(x.aspect_index, x.metric_index) < std::pair(y.aspect_index, y.metric_index);
  });
}

std::string render_quality_prompt(std::string_view summary, std::span<const ChecklistItem> items) {
  const std::string checklists = render_checklist(items);
  const std::string count = std::to_string(items.size());
  return templates::render_template(templates::kQualityEvaluation,
                                    {{"response", summary}, {"checklists", checklists}, {"num_checklist", count}});
}

std::vector<QualityJudgement> judge_batch(llm::Gateway& evaluator, std::string_view summary,
                                          std::span<const ChecklistItem> items, int attempts,
                                          std::vector<std::string>& raw_replies) {
  const std::string prompt = render_quality_prompt(summary, items);
  for (int attempt = 1;; ++attempt) {
    std::string reply = evaluator.chat(prompt, llm::kEvaluationTemperature);
    raw_replies.push_back(reply);
    try {
      return parse_quality_reply(reply, items);
    } catch (const JudgeFormatError& e) {
      if (attempt >= attempts) throw;
      spdlog::warn("quality judge reply rejected ({}), retrying", e.what());
    }
  }
}

std::vector<QAPair> parse_generated_pairs(std::string_view raw) {
  const auto list = judge::parse_lenient(raw, '[', ']');
  if (!list.is_array()) throw UnparseableReply("QA generation reply is not a list", std::string(raw));
  std::vector<QAPair> pairs;
  for (const auto& entry : list) {
    if (!entry.is_object()) continue;
    const auto question = entry.find("question");
    const auto answer = entry.find("answer");
    const auto papers = entry.find("papers");
    if (question == entry.end() || !question->is_string() || answer == entry.end() || !answer->is_string() ||
        papers == entry.end() || !papers->is_array()) {
      continue;
    }
    std::set<int> positions;
    for (const auto& p : *papers) {
      if (p.is_number_integer() && p.get<int>() >= 1 && p.get<int>() <= 3) positions.insert(p.get<int>());
    }
    if (positions.empty()) continue;
    QAPair pair;
    pair.question = question->get<std::string>();
    pair.gold_answer = answer->get<std::string>();
    if (trim(pair.question).empty() || trim(pair.gold_answer).empty()) continue;
    if (positions.size() == 1) {
      pair.kind = QaKind::Single;
      pair.paper_position = *positions.begin();
    } else {
      pair.kind = QaKind::Cross;
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

}  // namespace

const std::vector<ChecklistItem>& bundled_checklist() {
  static const std::vector<ChecklistItem> items = parse_checklist(bundled_checklist_json());
  return items;
}

std::vector<ChecklistItem> parse_checklist(std::string_view contents) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(contents);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("checklist is not valid JSON: ") + e.what());
  }
  std::vector<ChecklistItem> items;
  try {
    items = parse_items(doc);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("checklist item is malformed: ") + e.what());
  }
  validate_checklist(items);
  return items;
}

double length_score(long required, long generated) {
  if (required <= 0) throw DomainError("required length must be positive, got " + std::to_string(required));
  if (generated < 0) throw DomainError("generated length must be non-negative, got " + std::to_string(generated));
  if (generated >= required) return 1.0;
  if (generated == 0) return 0.0;
  const double ratio = static_cast<double>(required) / static_cast<double>(generated);
  return std::max(0.0, 1.0 - (ratio - 1.0) / 2.0);
}

bool is_abstention(std::string_view reply) {
  std::string text(trim(reply));
  // Normalise the curly apostrophe to a straight one.
  const std::string curly = "\xE2\x80\x99";
  for (std::size_t pos; (pos = text.find(curly)) != std::string::npos;) text.replace(pos, curly.size(), "'");
  if (!text.empty() && text.back() == '.') text.pop_back();
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"') text = text.substr(1, text.size() - 2);
  return to_lower(trim(text)) == to_lower(templates::kAbstentionPhrase);
}

Answer answer_question(llm::Gateway& judger, std::string_view summary, std::string_view question) {
  if (trim(summary).empty()) throw InvalidInput("cannot answer questions against an empty summary");
  const std::string prompt =
      templates::render_template(templates::kQuestionAnswering, {{"paper", summary}, {"question", question}});
  Answer answer;
  answer.raw_reply = judger.chat(prompt, llm::kEvaluationTemperature);
  answer.abstained = is_abstention(answer.raw_reply);
  answer.predicted =
      answer.abstained ? std::string(templates::kAbstentionPhrase) : std::string(trim(answer.raw_reply));
  return answer;
}

JudgedAnswer score_answer(llm::Gateway& evaluator, const QAPair& pair, const Answer& answer,
                          const ScoringOptions& options) {
  JudgedAnswer judged;
  judged.qa_id = pair.id;
  judged.predicted = answer.predicted;
  judged.abstained = answer.abstained;
  judged.judger_reply = answer.raw_reply;
  if (answer.abstained && options.short_circuit_abstentions) {
    judged.reason = "abstained";
    judged.score = 0.0;
    return judged;
  }
  const std::string prompt = templates::render_template(
      templates::kAnswerScoring,
      {{"question", pair.question}, {"answer", pair.gold_answer}, {"predict", answer.predicted}});
  judged.evaluator_reply = evaluator.chat(prompt, llm::kEvaluationTemperature);
  const auto reply = judge::parse_score_reply(judged.evaluator_reply);
  judged.reason = reply.reason;
  judged.score = reply.score;
  return judged;
}

ConsistencyScore consistency_score(std::span<const JudgedAnswer> judged, std::span<const QAPair> qa_pairs) {
  const auto by_id = index_pairs(qa_pairs);
  std::vector<double> single;
  std::vector<double> cross;
  for (const auto& answer : judged) {
    const QAPair& pair = lookup(by_id, answer.qa_id);
    (pair.kind == QaKind::Single ? single : cross).push_back(answer.score);
  }
  if (single.empty()) throw IncompleteSet("no single-context questions were judged");
  if (cross.empty()) throw IncompleteSet("no cross-context questions were judged");
  ConsistencyScore score;
  score.single_mean = mean(single);
  score.cross_mean = mean(cross);
  score.s_c = (score.single_mean + score.cross_mean) / 2.0;
  return score;
}

std::string render_checklist(std::span<const ChecklistItem> items) {
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& item : items) {
    list.push_back({{"checklist_id", item.id}, {"checklist_content", item.description}});
  }
  return list.dump(2);
}

std::vector<QualityJudgement> parse_quality_reply(std::string_view raw, std::span<const ChecklistItem> expected) {
  const auto list = judge::parse_lenient(raw, '[', ']');
  const std::string raw_copy(raw);
  if (!list.is_array()) throw UnparseableReply("quality reply is not a list", raw_copy);
  if (list.size() != expected.size()) {
    throw CardinalityError("quality reply has " + std::to_string(list.size()) + " entries, expected " +
                               std::to_string(expected.size()),
                           raw_copy);
  }
  std::map<std::string, QualityJudgement> by_id;
  for (const auto& entry : list) {
    if (!entry.is_object()) throw UnparseableReply("quality reply entry is not an object", raw_copy);
    const auto id_it = entry.find("checklist_id");
    if (id_it == entry.end() || id_it->is_null()) {
      throw MissingFieldError("quality reply entry lacks \"checklist_id\"", raw_copy);
    }
    const std::string id = id_it->is_string() ? id_it->get<std::string>() : id_it->dump();
    const auto reason_it = entry.find("reason");
    if (reason_it == entry.end() || !reason_it->is_string()) {
      throw MissingFieldError("quality reply entry \"" + id + "\" lacks a string \"reason\"", raw_copy);
    }
    const auto score_it = entry.find("evaluation_score");
    if (score_it == entry.end() || score_it->is_null()) {
      throw MissingFieldError("quality reply entry \"" + id + "\" lacks \"evaluation_score\"", raw_copy);
    }
    const auto score = judge::quantized_score(*score_it);
    if (!score) {
      throw NonQuantizedScore("quality score " + score_it->dump() + " for \"" + id + "\" is not quantized", raw_copy);
    }
    if (by_id.count(id)) throw DuplicateIdError("quality reply repeats checklist id \"" + id + "\"", raw_copy);
    by_id[id] = QualityJudgement{id, reason_it->get<std::string>(), *score};
  }
  std::vector<QualityJudgement> ordered;
  ordered.reserve(expected.size());
  for (const auto& item : expected) {
    const auto it = by_id.find(item.id);
    if (it == by_id.end()) {
      throw MissingFieldError("quality reply has no entry for checklist id \"" + item.id + "\"", raw_copy);
    }
    ordered.push_back(it->second);
  }
  return ordered;
}

QualityJudgeResult quality_judge(llm::Gateway& evaluator, std::string_view summary,
                                 std::span<const ChecklistItem> checklist) {
  if (checklist.empty()) throw InvalidInput("quality judging needs a non-empty checklist");
  QualityJudgeResult result;
  try {
    result.judgements = judge_batch(evaluator, summary, checklist, 2, result.raw_replies);
    return result;
  } catch (const JudgeFormatError& e) {
    spdlog::warn("full-checklist quality judging failed twice ({}), falling back to one call per aspect", e.what());
  }
  result.used_per_aspect_fallback = true;
  result.judgements.clear();
  std::size_t begin = 0;
  while (begin < checklist.size()) {
    std::size_t end = begin;
    while (end < checklist.size() && checklist[end].aspect_index == checklist[begin].aspect_index) ++end;
    auto part = judge_batch(evaluator, summary, checklist.subspan(begin, end - begin), 2, result.raw_replies);
    result.judgements.insert(result.judgements.end(), part.begin(), part.end());
    begin = end;
  }
  return result;
}

QualityScore quality_score(std::span<const QualityJudgement> judgements, std::span<const ChecklistItem> checklist) {
  std::map<std::string, double> by_id;
  for (const auto& j : judgements) by_id[j.checklist_id] = j.score;
  std::array<std::vector<double>, kAspectCount> per_aspect;
  for (const auto& item : checklist) {
    const auto it = by_id.find(item.id);
    if (it == by_id.end()) throw IncompleteSet("no quality judgement for checklist item \"" + item.id + "\"");
    if (item.aspect_index < 1 || item.aspect_index > static_cast<int>(kAspectCount)) {
      throw InvalidInput("checklist item \"" + item.id + "\" has an out-of-range aspect index");
    }
    per_aspect[static_cast<std::size_t>(item.aspect_index - 1)].push_back(it->second);
  }
  QualityScore score;
  double total = 0.0;
  for (std::size_t i = 0; i < kAspectCount; ++i) {
    if (per_aspect[i].empty()) throw IncompleteSet("aspect " + std::to_string(i + 1) + " has no judgements");
    score.per_aspect[i] = mean(per_aspect[i]);
    total += score.per_aspect[i];
  }
  score.s_q = total / static_cast<double>(kAspectCount);
  return score;
}

QaGenerationResult generate_qa_pairs(llm::Gateway& generator, const corpus::SampleTriplet& triplet) {
  const std::string papers = corpus::tagged_papers(triplet);
  const std::string single_count = std::to_string(kSingleQuestions);
  const std::string cross_count = std::to_string(kCrossQuestions);
  const std::string prompt =
      templates::render_template(templates::kQaGeneration, {{"papers", papers}}) +
      templates::render_template(templates::kQaOutputFormat,
                                 {{"single_count", single_count}, {"cross_count", cross_count}});
  QaGenerationResult result;
  std::vector<QAPair> singles;
  std::vector<QAPair> crosses;
  for (int attempt = 1; attempt <= 2; ++attempt) {
    const std::string reply = generator.chat(prompt, llm::kEvaluationTemperature);
    result.raw_replies.push_back(reply);
    std::vector<QAPair> parsed;
    try {
      parsed = parse_generated_pairs(reply);
    } catch (const JudgeFormatError& e) {
      spdlog::warn("QA generation attempt {} unparseable: {}", attempt, e.what());
    }
    for (auto& pair : parsed) {
      auto& bucket = pair.kind == QaKind::Single ? singles : crosses;
      const std::size_t cap = pair.kind == QaKind::Single ? kSingleQuestions : kCrossQuestions;
      const bool seen = std::any_of(bucket.begin(), bucket.end(),
                                    [&](const QAPair& p) { return p.question == pair.question; });
      if (bucket.size() < cap && !seen) bucket.push_back(std::move(pair));
    }
    if (singles.size() >= kSingleQuestions && crosses.size() >= kCrossQuestions) break;
  }
  result.shortfall = singles.size() < kSingleQuestions || crosses.size() < kCrossQuestions;
  if (result.shortfall) {
    spdlog::warn("QA generation shortfall for sample {}: {} single, {} cross", triplet.sample_id, singles.size(),
                 crosses.size());
  }
  for (std::size_t i = 0; i < singles.size(); ++i) {
    singles[i].id = "single-" + std::to_string(i + 1);
    result.pairs.push_back(std::move(singles[i]));
  }
  for (std::size_t i = 0; i < crosses.size(); ++i) {
    crosses[i].id = "cross-" + std::to_string(i + 1);
    result.pairs.push_back(std::move(crosses[i]));
  }
  return result;
}

PositionalMeans positional_breakdown(std::span<const JudgedAnswer> judged, std::span<const QAPair> qa_pairs) {
  const auto by_id = index_pairs(qa_pairs);
  std::array<std::vector<double>, 3> groups;
  for (const auto& answer : judged) {
    const QAPair& pair = lookup(by_id, answer.qa_id);
    if (pair.kind != QaKind::Single) continue;
    if (!pair.paper_position || *pair.paper_position < 1 || *pair.paper_position > 3) {
      throw InvalidInput("single-context question \"" + pair.id + "\" has no valid paper position");
    }
    groups[static_cast<std::size_t>(*pair.paper_position - 1)].push_back(answer.score);
  }
  PositionalMeans means;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (!groups[i].empty()) means[i] = mean(groups[i]);
  }
  return means;
}

EvaluationResult evaluate_summary(std::string_view summary, std::span<const QAPair> qa_pairs, long required_words,
                                  EvaluationRoles roles, std::span<const ChecklistItem> checklist,
                                  const ScoringOptions& options) {
  for (const auto& pair : qa_pairs) validate(pair);
  EvaluationResult result;
  result.report.required_words = required_words;
  result.report.generated_words = static_cast<long>(count_words(summary));
  result.report.s_l = length_score(required_words, result.report.generated_words);

  // Judging calls are bounded by each gateway's in-flight limit.
  const std::string summary_copy(summary);
  std::vector<std::future<JudgedAnswer>> futures;
  futures.reserve(qa_pairs.size());
  for (const auto& pair : qa_pairs) {
    futures.push_back(std::async(std::launch::async, [&roles, &summary_copy, &options, &pair] {
      try {
        const Answer answer = answer_question(roles.judger, summary_copy, pair.question);
        return score_answer(roles.evaluator, pair, answer, options);
      } catch (Error& e) {
        e.add_context("question " + pair.id);
        throw;
      }
    }));
  }
  auto quality = std::async(std::launch::async,
                            [&] { return quality_judge(roles.evaluator, summary_copy, checklist); });
  std::exception_ptr failure;
  for (auto& f : futures) {
    try {
      result.judged.push_back(f.get());
    } catch (...) {
      if (!failure) failure = std::current_exception();
    }
  }
  try {
    result.quality = quality.get();
  } catch (...) {
    if (!failure) failure = std::current_exception();
  }
  if (failure) std::rethrow_exception(failure);

  result.report.consistency = consistency_score(result.judged, qa_pairs);
  result.report.quality = quality_score(result.quality.judgements, checklist);
  result.report.positional_means = positional_breakdown(result.judged, qa_pairs);
  return result;
}

nlohmann::ordered_json to_json(const EvaluationResult& result, std::span<const ChecklistItem> checklist) {
  const auto& r = result.report;
  nlohmann::ordered_json positional = nlohmann::ordered_json::array();
  for (const auto& m : r.positional_means) positional.push_back(m ? nlohmann::ordered_json(*m) : nlohmann::ordered_json(nullptr));
  nlohmann::ordered_json per_aspect = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < kAspectCount; ++i) {
    std::string aspect;
    for (const auto& item : checklist) {
      if (item.aspect_index == static_cast<int>(i + 1)) {
        aspect = item.aspect;
        break;
      }
    }
    per_aspect.push_back({{"aspect_index", i + 1}, {"aspect", aspect}, {"score", r.quality.per_aspect[i]}});
  }
  nlohmann::ordered_json answers = nlohmann::ordered_json::array();
  for (const auto& a : result.judged) {
    answers.push_back({{"qa_id", a.qa_id},
                       {"predicted", a.predicted},
                       {"abstained", a.abstained},
                       {"reason", a.reason},
                       {"score", a.score},
                       {"judger_reply", a.judger_reply},
                       {"evaluator_reply", a.evaluator_reply}});
  }
  nlohmann::ordered_json judgements = nlohmann::ordered_json::array();
  for (const auto& j : result.quality.judgements) {
    judgements.push_back({{"checklist_id", j.checklist_id}, {"reason", j.reason}, {"score", j.score}});
  }
  nlohmann::ordered_json out;
  out["report"] = {{"required_words", r.required_words},
                   {"generated_words", r.generated_words},
                   {"S_l", r.s_l},
                   {"S_c", r.consistency.s_c},
                   {"single_mean", r.consistency.single_mean},
                   {"cross_mean", r.consistency.cross_mean},
                   {"S_q", r.quality.s_q},
                   {"per_aspect", per_aspect},
                   {"positional_means", positional}};
  out["judged_answers"] = answers;
  out["quality"] = {{"used_per_aspect_fallback", result.quality.used_per_aspect_fallback},
                    {"judgements", judgements},
                    {"raw_replies", result.quality.raw_replies}};
  return out;
}

}  // namespace longwrite::evaluator
