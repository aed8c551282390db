#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "longwrite/chunking.hpp"
#include "longwrite/corpus.hpp"
#include "longwrite/gateway.hpp"
#include "longwrite/retrieval.hpp"

namespace longwrite::author {

/// `Ral` is the full retrieve-and-restate writer; `AgentWrite` is the
/// plan-and-write baseline with retrieval and restatement switched off.
enum class Mode { Ral, AgentWrite };

std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view name);

struct WritingStep {
  int index = 0;  // 1-based
  std::string main_point;
  int target_words = 0;

  /// The planner asks for 200..1000 words per paragraph; other values are kept
  /// but flagged.
  bool outside_requested_range() const { return target_words < 200 || target_words > 1000; }
  /// "Paragraph <n> - Main Point: <text> - Word Count: <m> words"
  std::string line() const;
};

struct WritingPlan {
  std::vector<WritingStep> steps;
  int planned_total_words = 0;
  int requested_total_words = 0;
  std::vector<std::string> raw_outputs;  // every planner reply, in order
  std::vector<std::string> warnings;
};

/// Parses planner output. Lines that do not start with "Paragraph <n>" are
/// skipped; a "Paragraph" line without the three-field skeleton, or paragraph
/// numbers that do not increase, raise PlanError. Zero steps raise PlanError.
std::vector<WritingStep> parse_plan(std::string_view raw);

/// Asks the planner at writing temperature. Retries once when parsing fails
/// and re-plans once when the planned total deviates from the request by more
/// than 20%, then proceeds with a warning.
WritingPlan plan(llm::Gateway& writer, std::string_view instruction, int requested_total_words);

/// Every step line, one per line; fills the `{{ steps }}` slot.
std::string render_steps(const WritingPlan& plan);

/// Chunk texts joined by blank lines, in the given (ascending-importance) order.
std::string render_restatement(const std::vector<retrieval::RetrievedChunk>& ordered);

std::string assemble_writer_prompt(std::string_view instruction, const WritingPlan& plan,
                                   std::string_view written_so_far, std::string_view restatement,
                                   const WritingStep& step);

struct WrittenStep {
  std::string prompt;
  std::string text;
};

WrittenStep write_step(llm::Gateway& writer, std::string_view instruction, const WritingPlan& plan,
                       std::string_view written_so_far, std::string_view restatement, const WritingStep& step);

struct StepTrace {
  std::vector<retrieval::RetrievedChunk> scored;    // every chunk, index order
  std::vector<retrieval::RetrievedChunk> restated;  // selected, ascending importance
};

struct Timings {
  double plan_ms = 0.0;
  double embed_ms = 0.0;
  double write_ms = 0.0;
  double total_ms = 0.0;
};

struct SummaryArtifact {
  std::string sample_id;
  Mode mode = Mode::Ral;
  std::string instruction;
  WritingPlan plan;
  std::vector<chunking::Chunk> chunks;
  std::vector<std::string> step_texts;
  std::string full_text;
  std::size_t word_count = 0;
  std::vector<std::string> prompt_archive;
  std::vector<StepTrace> retrieval_trace;  // empty in AgentWrite mode
  Timings timings;
};

inline constexpr std::string_view kStepJoint = "\n\n";

struct PipelineOptions {
  int requested_total_words = 8000;
  chunking::ChunkingConfig chunking;
  retrieval::RetrievalParams retrieval;
  Mode mode = Mode::Ral;
};

/// Instruction, plan, one chunking and embedding pass over the tagged papers,
/// then a strictly sequential write loop. Errors from a step carry "step <n>"
/// context.
SummaryArtifact run_pipeline(const corpus::SampleTriplet& sample, const PipelineOptions& options,
                             llm::Gateway& writer, llm::Gateway& embedder);

struct RunMetadata {
  std::string writer_model;
  std::string embedding_model;
  std::uint64_t seed = 0;
  std::string started_at;  // ISO-8601, informational only
};

/// plan.txt, steps/NN.txt, prompts/NN.txt, retrieval/NN.csv, chunks.csv,
/// summary.md and run_meta.json.
void write_run_directory(const SummaryArtifact& artifact, const PipelineOptions& options,
                         const RunMetadata& metadata, const std::filesystem::path& directory);

/// Two-digit, 1-based step file stem ("01", "02", ...).
std::string step_file_stem(std::size_t step_index);

}  // namespace longwrite::author
