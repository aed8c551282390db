#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace longwrite {

enum class QaKind { Single, Cross };

std::string_view to_string(QaKind kind);

/// A gold question/answer pair. Single-context pairs name the paper (1..3)
/// that answers them; cross-context pairs do not.
struct QAPair {
  std::string id;
  QaKind kind = QaKind::Single;
  std::optional<int> paper_position;
  std::string question;
  std::string gold_answer;
  bool verified = false;
};

/// Throws InvalidInput when the single/position invariant does not hold.
void validate(const QAPair& pair);

nlohmann::json to_json(const QAPair& pair);
QAPair qa_pair_from_json(const nlohmann::json& object);

/// qa.json holds a list of {id, kind, paper_position?, question, answer, verified}.
std::vector<QAPair> parse_qa_file(std::string_view contents);
std::string dump_qa_file(const std::vector<QAPair>& pairs);

}  // namespace longwrite
