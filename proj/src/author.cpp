#include "longwrite/author.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <regex>

#include <spdlog/spdlog.h>

#include "longwrite/error.hpp"
#include "longwrite/templates.hpp"
#include "longwrite/text.hpp"

namespace longwrite::author {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

void replace_all(std::string& text, std::string_view from, std::string_view to) {
  for (std::size_t pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size())) {
    text.replace(pos, from.size(), to);
  }
}

// Drops markdown emphasis, typographic dashes and a leading list marker.
std::string normalize_plan_line(std::string_view line) {
  std::string out(trim(line));
  replace_all(out, "**", "");
  replace_all(out, "–", "-");
  replace_all(out, "—", "-");
  static const std::regex list_marker(R"(^(?:[-*+•]|\d+[.)])\s+)");
  out = std::regex_replace(out, list_marker, "", std::regex_constants::format_first_only);
  return std::string(trim(out));
}

double deviation(const std::vector<WritingStep>& steps, int requested) {
  long planned = 0;
  for (const auto& step : steps) planned += step.target_words;
  return std::abs(static_cast<double>(planned - requested)) / static_cast<double>(requested);
}

}  // namespace

std::string_view to_string(Mode mode) { return mode == Mode::Ral ? "ral" : "agentwrite"; }

Mode mode_from_string(std::string_view name) {
  if (name == "ral") return Mode::Ral;
  if (name == "agentwrite") return Mode::AgentWrite;
  throw ConfigError("unknown mode '" + std::string(name) + "' (expected ral or agentwrite)");
}

std::string WritingStep::line() const {
  return "Paragraph " + std::to_string(index) + " - Main Point: " + main_point +
         " - Word Count: " + std::to_string(target_words) + " words";
}

std::vector<WritingStep> parse_plan(std::string_view raw) {
  static const std::regex paragraph_start(R"(^paragraph\s+\d+)", std::regex::icase);
  static const std::regex skeleton(
      R"(^paragraph\s+(\d+)\s*[-:]\s*main\s+point\s*:\s*(.+?)\s*-\s*word\s+count\s*:\s*(?:about|approximately|around|~)?\s*\[?\s*(\d[\d,]*)\s*(?:words?)?[\s.)\]]*$)",
      std::regex::icase);

  std::vector<WritingStep> steps;
  int last_number = 0;
  std::size_t line_start = 0;
  while (line_start <= raw.size()) {
    std::size_t line_end = raw.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = raw.size();
    const std::string line = normalize_plan_line(raw.substr(line_start, line_end - line_start));
    line_start = line_end + 1;
    if (line.empty() || !std::regex_search(line, paragraph_start)) continue;

    std::smatch match;
    if (!std::regex_match(line, match, skeleton)) {
      throw PlanError("malformed plan line: \"" + line + "\"", std::string(raw));
    }
    const int number = std::stoi(match[1].str());
    if (number <= last_number) {
      throw PlanError("paragraph numbers are not increasing at \"" + line + "\"", std::string(raw));
    }
    last_number = number;

    std::string main_point(trim(match[2].str()));
    if (main_point.size() >= 2 && main_point.front() == '[' && main_point.back() == ']') {
      main_point = std::string(trim(std::string_view(main_point).substr(1, main_point.size() - 2)));
    }
    std::string digits = match[3].str();
    std::erase(digits, ',');
    const long words = std::stol(digits);
    if (main_point.empty() || words <= 0) {
      throw PlanError("plan line lacks a main point or a positive word count: \"" + line + "\"", std::string(raw));
    }
    steps.push_back({static_cast<int>(steps.size()) + 1, std::move(main_point), static_cast<int>(words)});
  }
  if (steps.empty()) throw PlanError("planner output contains no step lines", std::string(raw));
  return steps;
}

WritingPlan plan(llm::Gateway& writer, std::string_view instruction, int requested_total_words) {
  if (requested_total_words <= 0) throw DomainError("requested_total_words must be positive");
  const std::string prompt =
      templates::render_template(templates::kPlanner, {{"instruction", instruction}});

  WritingPlan result;
  result.requested_total_words = requested_total_words;
  std::vector<WritingStep> best;
  constexpr int kMaxAttempts = 2;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    result.raw_outputs.push_back(writer.chat(prompt, llm::kWritingTemperature));
    std::vector<WritingStep> steps;
    try {
      steps = parse_plan(result.raw_outputs.back());
    } catch (const PlanError& e) {
      if (attempt + 1 < kMaxAttempts) {
        spdlog::warn("planner output rejected ({}), re-planning", e.what());
        continue;
      }
      if (!best.empty()) {
        result.warnings.push_back(std::string("re-plan rejected (") + e.what() + "), keeping the first plan");
        break;
      }
      throw PlanError(e.what(), join(result.raw_outputs, "\n----\n"));
    }
    if (best.empty() || deviation(steps, requested_total_words) < deviation(best, requested_total_words)) {
      best = std::move(steps);
    }
    if (deviation(best, requested_total_words) <= 0.2) break;
    if (attempt + 1 < kMaxAttempts) {
      spdlog::warn("planned total deviates from the requested {} words by more than 20%, re-planning",
                   requested_total_words);
    }
  }

  result.steps = std::move(best);
  for (const auto& step : result.steps) result.planned_total_words += step.target_words;
  if (deviation(result.steps, requested_total_words) > 0.2) {
    result.warnings.push_back("planned total " + std::to_string(result.planned_total_words) +
                              " words deviates from the requested " + std::to_string(requested_total_words) +
                              " by more than 20%");
  }
  for (const auto& step : result.steps) {
    if (step.outside_requested_range()) {
      result.warnings.push_back("step " + std::to_string(step.index) + " targets " +
                                std::to_string(step.target_words) + " words, outside 200..1000");
    }
  }
  for (const auto& warning : result.warnings) spdlog::warn("plan: {}", warning);
  return result;
}

std::string render_steps(const WritingPlan& plan) {
  std::vector<std::string> lines;
  lines.reserve(plan.steps.size());
  for (const auto& step : plan.steps) lines.push_back(step.line());
  return join(lines, "\n");
}

std::string render_restatement(const std::vector<retrieval::RetrievedChunk>& ordered) {
  std::vector<std::string> texts;
  texts.reserve(ordered.size());
  for (const auto& item : ordered) texts.push_back(item.chunk.text);
  return join(texts, "\n\n");
}

std::string assemble_writer_prompt(std::string_view instruction, const WritingPlan& plan,
                                   std::string_view written_so_far, std::string_view restatement,
                                   const WritingStep& step) {
  const std::string steps = render_steps(plan);
  const std::string current = step.line();
  return templates::render_template(templates::kWriter, {{"instruction", instruction},
                                                         {"steps", steps},
                                                         {"written", written_so_far},
                                                         {"restatement", restatement},
                                                         {"step", current}});
}

WrittenStep write_step(llm::Gateway& writer, std::string_view instruction, const WritingPlan& plan,
                       std::string_view written_so_far, std::string_view restatement, const WritingStep& step) {
  WrittenStep out;
  out.prompt = assemble_writer_prompt(instruction, plan, written_so_far, restatement, step);
  out.text = writer.chat(out.prompt, llm::kWritingTemperature);
  return out;
}

SummaryArtifact run_pipeline(const corpus::SampleTriplet& sample, const PipelineOptions& options,
                             llm::Gateway& writer, llm::Gateway& embedder) {
  options.chunking.validate();
  options.retrieval.validate();
  const auto started = Clock::now();

  SummaryArtifact artifact;
  artifact.sample_id = sample.sample_id;
  artifact.mode = options.mode;
  artifact.instruction = corpus::build_instruction(sample, options.requested_total_words);

  auto phase = Clock::now();
  artifact.plan = plan(writer, artifact.instruction, options.requested_total_words);
  artifact.timings.plan_ms = elapsed_ms(phase);

  std::vector<retrieval::Embedding> chunk_embeddings;
  if (options.mode == Mode::Ral) {
    phase = Clock::now();
    artifact.chunks = chunking::split_recursive(corpus::tagged_papers(sample), options.chunking);
    std::vector<std::string> texts;
    texts.reserve(artifact.chunks.size());
    for (const auto& chunk : artifact.chunks) texts.push_back(chunk.text);
    chunk_embeddings = embedder.embed(texts);
    artifact.timings.embed_ms = elapsed_ms(phase);
  }

  phase = Clock::now();
  std::string written;
  for (const auto& step : artifact.plan.steps) {
    try {
      std::string restatement;
      if (options.mode == Mode::Ral) {
        const auto key = embedder.embed({step.main_point}).front();
        StepTrace trace;
        trace.scored = retrieval::score_chunks(artifact.chunks, chunk_embeddings, key, options.retrieval);
        trace.restated = retrieval::order_for_restatement(retrieval::select_top_k(trace.scored, options.retrieval));
        restatement = render_restatement(trace.restated);
        artifact.retrieval_trace.push_back(std::move(trace));
      }
      auto result = write_step(writer, artifact.instruction, artifact.plan, written, restatement, step);
      artifact.prompt_archive.push_back(std::move(result.prompt));
      if (!written.empty()) written += kStepJoint;
      written += result.text;
      artifact.step_texts.push_back(std::move(result.text));
    } catch (Error& e) {
      e.add_context("step " + std::to_string(step.index));
      throw;
    }
  }
  artifact.timings.write_ms = elapsed_ms(phase);

  artifact.full_text = std::move(written);
  artifact.word_count = count_words(artifact.full_text);
  artifact.timings.total_ms = elapsed_ms(started);
  return artifact;
}

std::string step_file_stem(std::size_t step_index) {
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "%02zu", step_index);
  return buffer;
}

void write_run_directory(const SummaryArtifact& artifact, const PipelineOptions& options,
                         const RunMetadata& metadata, const std::filesystem::path& directory) {
  std::string plan_text;
  for (std::size_t i = 0; i < artifact.plan.raw_outputs.size(); ++i) {
    plan_text += "# Planner output (attempt " + std::to_string(i + 1) + ")\n" + artifact.plan.raw_outputs[i];
    if (!plan_text.ends_with('\n')) plan_text += '\n';
    plan_text += '\n';
  }
  plan_text += "# Parsed plan (planned " + std::to_string(artifact.plan.planned_total_words) + " / requested " +
               std::to_string(artifact.plan.requested_total_words) + " words)\n" + render_steps(artifact.plan) + "\n";
  write_file(directory / "plan.txt", plan_text);

  for (std::size_t i = 0; i < artifact.step_texts.size(); ++i) {
    const std::string stem = step_file_stem(i + 1);
    write_file(directory / "steps" / (stem + ".txt"), artifact.step_texts[i]);
    write_file(directory / "prompts" / (stem + ".txt"), artifact.prompt_archive[i]);
  }
  for (std::size_t i = 0; i < artifact.retrieval_trace.size(); ++i) {
    const auto& trace = artifact.retrieval_trace[i];
    std::vector<std::size_t> selected;
    for (const auto& item : trace.restated) selected.push_back(item.chunk.index);
    write_file(directory / "retrieval" / (step_file_stem(i + 1) + ".csv"), retrieval::curve_csv(trace.scored, selected));
  }
  if (!artifact.chunks.empty()) write_file(directory / "chunks.csv", chunking::chunk_dump_csv(artifact.chunks));
  write_file(directory / "summary.md", artifact.full_text + "\n");

  nlohmann::ordered_json meta;
  meta["sample_id"] = artifact.sample_id;
  meta["mode"] = std::string(to_string(artifact.mode));
  meta["baseline"] = artifact.mode == Mode::AgentWrite;
  meta["requested_words"] = options.requested_total_words;
  meta["word_count"] = artifact.word_count;
  meta["step_count"] = artifact.step_texts.size();
  meta["chunk_count"] = artifact.chunks.size();
  meta["seed"] = metadata.seed;
  meta["models"] = {{"writer", metadata.writer_model}, {"embedding", metadata.embedding_model}};
  nlohmann::ordered_json retrieval_json{{"a", options.retrieval.a}, {"b", options.retrieval.b}, {"k", options.retrieval.k}};
  retrieval_json["min_importance"] =
      options.retrieval.min_importance ? nlohmann::ordered_json(*options.retrieval.min_importance) : nlohmann::ordered_json(nullptr);
  meta["retrieval"] = retrieval_json;
  nlohmann::ordered_json separators = nlohmann::ordered_json::array();
  for (auto s : options.chunking.separators) separators.push_back(std::string(chunking::to_string(s)));
  meta["chunking"] = {{"target_size", options.chunking.target_size},
                      {"overlap", options.chunking.overlap},
                      {"separators", separators}};
  meta["plan"] = {{"planned_total_words", artifact.plan.planned_total_words},
                  {"requested_total_words", artifact.plan.requested_total_words},
                  {"warnings", artifact.plan.warnings}};
  meta["timings"] = {{"started_at", metadata.started_at},
                     {"plan_ms", artifact.timings.plan_ms},
                     {"embed_ms", artifact.timings.embed_ms},
                     {"write_ms", artifact.timings.write_ms},
                     {"total_ms", artifact.timings.total_ms}};
  write_file(directory / "run_meta.json", meta.dump(2) + "\n");
}

}  // namespace longwrite::author
