#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "longwrite/author.hpp"
#include "longwrite/config.hpp"
#include "longwrite/evaluator.hpp"

namespace longwrite::commands {

// ---- ingest ---------------------------------------------------------------

enum class FileStatus { Written, Unchanged };

struct IngestedFile {
  std::string sample_id;
  std::string file;
  FileStatus status = FileStatus::Written;
};

struct IngestReport {
  std::vector<IngestedFile> files;
  std::string cleaning_csv;  // file,kind,begin,end for every sample

  std::size_t written() const;
};

/// Cleans every sample under `src_dir` (either one sample directory or a
/// directory of samples) into `out_dir/<sample_id>/`, with a per-sample
/// cleaning_report.csv. Files whose content already matches are left alone.
IngestReport ingest(const std::filesystem::path& src_dir, const std::filesystem::path& out_dir);

// ---- run ------------------------------------------------------------------

struct RunRequest {
  std::filesystem::path sample_dir;
  std::optional<std::filesystem::path> run_dir;  // default: output_root/<sample>/<mode>-<words>
  std::optional<int> requested_words;            // default: first configured length
};

struct RunOutcome {
  std::filesystem::path run_dir;
  author::SummaryArtifact artifact;
};

author::PipelineOptions pipeline_options(const config::RunConfig& config, int requested_words);

RunOutcome run(const config::RunConfig& config, const RunRequest& request);

// ---- eval -----------------------------------------------------------------

struct EvalRequest {
  std::filesystem::path run_dir;
  std::filesystem::path sample_dir;
};

/// Loads the checklist named by the config, or the bundled one.
std::vector<evaluator::ChecklistItem> load_checklist(const config::RunConfig& config);

/// Scores a run directory and writes scores.json there. When the sample has no
/// qa.json, pairs are generated with the evaluator role and saved to the run
/// directory. Throws MissingArtifact when summary.md or run_meta.json is absent.
evaluator::EvaluationResult eval(const config::RunConfig& config, const EvalRequest& request);

// ---- sweep ----------------------------------------------------------------

struct SweepCell {
  std::string grid;  // "ab" or "k"
  retrieval::RetrievalParams params;

  std::string id() const;
};

/// The 3 x 3 (a, b) grid at the configured k.
std::vector<SweepCell> ab_grid(const retrieval::RetrievalParams& base);
/// k in {4, 8, 12, 16} at a = 10, b = 0.2.
std::vector<SweepCell> k_grid(const retrieval::RetrievalParams& base);

struct SweepRow {
  SweepCell cell;
  std::size_t word_count = 0;
  std::size_t step_count = 0;
  evaluator::ScoreReport report;
};

struct SweepRequest {
  std::filesystem::path sample_dir;
  std::filesystem::path out_dir;
  bool ab = true;
  bool k = true;
  std::optional<int> requested_words;
  std::optional<std::size_t> max_cells;  // stop after this many new cells (interruption injection)
  bool parallel = false;
};

struct SweepResult {
  std::vector<SweepRow> ab_rows;  // grid order
  std::vector<SweepRow> k_rows;
  std::size_t resumed_cells = 0;
  std::size_t executed_cells = 0;
  bool interrupted = false;
};

/// Runs and scores every grid cell, appending each finished cell to
/// out_dir/checkpoint.jsonl; cells already in the checkpoint are skipped.
/// Writes ab_grid.csv and k_sweep.csv.
SweepResult sweep(const config::RunConfig& config, const SweepRequest& request);

std::string sweep_csv(const std::vector<SweepRow>& rows);

// ---- curves ---------------------------------------------------------------

/// Re-emits each step's retrieval curve as out_dir/step_NN.csv plus a combined
/// curves.csv with a leading step column. Throws MissingArtifact when the run
/// has no retrieval traces.
std::vector<std::filesystem::path> curves(const std::filesystem::path& run_dir, const std::filesystem::path& out_dir);

// ---- qa -------------------------------------------------------------------

evaluator::QaGenerationResult generate_qa(const config::RunConfig& config, const std::filesystem::path& sample_dir,
                                          const std::filesystem::path& out_file);

}  // namespace longwrite::commands
