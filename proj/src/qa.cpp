#include "longwrite/qa.hpp"

#include "longwrite/error.hpp"

namespace longwrite {

std::string_view to_string(QaKind kind) { return kind == QaKind::Single ? "single" : "cross"; }

void validate(const QAPair& pair) {
  if (pair.kind == QaKind::Single) {
    if (!pair.paper_position || *pair.paper_position < 1 || *pair.paper_position > 3) {
      throw InvalidInput("single-context pair '" + pair.id + "' needs paper_position in 1..3");
    }
  } else if (pair.paper_position) {
    throw InvalidInput("cross-context pair '" + pair.id + "' must not carry paper_position");
  }
}

nlohmann::json to_json(const QAPair& pair) {
  nlohmann::json object;
  object["id"] = pair.id;
  object["kind"] = std::string(to_string(pair.kind));
  if (pair.paper_position) object["paper_position"] = *pair.paper_position;
  object["question"] = pair.question;
  object["answer"] = pair.gold_answer;
  object["verified"] = pair.verified;
  return object;
}

QAPair qa_pair_from_json(const nlohmann::json& object) {
  if (!object.is_object()) throw InvalidInput("qa entry is not an object");
  QAPair pair;
  try {
    pair.id = object.at("id").get<std::string>();
    const auto kind = object.at("kind").get<std::string>();
    if (kind == "single") {
      pair.kind = QaKind::Single;
    } else if (kind == "cross") {
      pair.kind = QaKind::Cross;
    } else {
      throw InvalidInput("qa entry '" + pair.id + "' has unknown kind '" + kind + "'");
    }
    if (object.contains("paper_position") && !object["paper_position"].is_null()) {
      pair.paper_position = object["paper_position"].get<int>();
    }
    pair.question = object.at("question").get<std::string>();
    pair.gold_answer = object.at("answer").get<std::string>();
    pair.verified = object.value("verified", false);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed qa entry: ") + e.what());
  }
  validate(pair);
  return pair;
}

std::vector<QAPair> parse_qa_file(std::string_view contents) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(contents);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("qa.json is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw InvalidInput("qa.json must hold a list");
  std::vector<QAPair> pairs;
  pairs.reserve(doc.size());
  for (const auto& entry : doc) pairs.push_back(qa_pair_from_json(entry));
  return pairs;
}

std::string dump_qa_file(const std::vector<QAPair>& pairs) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& pair : pairs) doc.push_back(to_json(pair));
  return doc.dump(2) + "\n";
}

}  // namespace longwrite
