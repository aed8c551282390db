#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "longwrite/chunking.hpp"
#include "longwrite/commands.hpp"
#include "longwrite/config.hpp"
#include "longwrite/corpus.hpp"
#include "longwrite/error.hpp"
#include "longwrite/text.hpp"

namespace fs = std::filesystem;
using namespace longwrite;

namespace {

config::RunConfig resolve_config(const std::string& path, const std::optional<std::string>& mode,
                                 const std::optional<std::uint64_t>& seed) {
  auto config = path.empty() ? config::mock_config() : config::load_config(path);
  if (mode) config.mode = author::mode_from_string(*mode);
  if (seed) config.seed = *seed;
  return config;
}

void print_report(const evaluator::ScoreReport& r) {
  std::cout << "S_l " << format_double(r.s_l) << " (" << r.generated_words << " / " << r.required_words
            << " words)\n";
  std::cout << "S_c " << format_double(r.consistency.s_c) << " (single " << format_double(r.consistency.single_mean)
            << ", cross " << format_double(r.consistency.cross_mean) << ")\n";
  std::cout << "S_q " << format_double(r.quality.s_q) << "\n";
  std::cout << "positional";
  for (const auto& m : r.positional_means) std::cout << " " << (m ? format_double(*m) : std::string("absent"));
  std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Retrieve-and-restate long-form writer and evaluation toolkit"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  std::string config_path;
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "Config file (JSON with comments); mock backends when omitted");
    sub->add_option("--mode", mode, "ral or agentwrite")->check(CLI::IsMember({"ral", "agentwrite"}));
    sub->add_option("--seed", seed, "Seed for mock backends");
  };

  auto* ingest = app.add_subcommand("ingest", "Clean raw TeX samples into a cache directory");
  std::string ingest_src;
  std::string ingest_out;
  ingest->add_option("src", ingest_src, "Sample directory or directory of samples")->required();
  ingest->add_option("out", ingest_out, "Output directory")->required();

  auto* run = app.add_subcommand("run", "Write a summary for one sample");
  add_config(run);
  std::string run_sample;
  std::string run_out;
  std::optional<int> run_words;
  run->add_option("sample", run_sample, "Sample directory")->required();
  run->add_option("-o,--out", run_out, "Run directory");
  run->add_option("-w,--words", run_words, "Requested length in words")->check(CLI::PositiveNumber);

  auto* eval = app.add_subcommand("eval", "Score a run directory; writes scores.json");
  add_config(eval);
  std::string eval_run;
  std::string eval_sample;
  eval->add_option("run_dir", eval_run, "Run directory")->required();
  eval->add_option("sample", eval_sample, "Sample directory")->required();

  auto* sweep = app.add_subcommand("sweep", "Grid over (a, b) and k with checkpointed resume");
  add_config(sweep);
  std::string sweep_sample;
  std::string sweep_out;
  std::string sweep_grid = "all";
  std::optional<int> sweep_words;
  std::optional<std::size_t> sweep_max_cells;
  bool sweep_parallel = false;
  sweep->add_option("sample", sweep_sample, "Sample directory")->required();
  sweep->add_option("out", sweep_out, "Sweep output directory")->required();
  sweep->add_option("--grid", sweep_grid, "ab, k or all")->check(CLI::IsMember({"ab", "k", "all"}));
  sweep->add_option("-w,--words", sweep_words, "Requested length in words")->check(CLI::PositiveNumber);
  sweep->add_option("--max-cells", sweep_max_cells, "Stop after this many new cells");
  sweep->add_flag("--parallel", sweep_parallel, "Run cells concurrently");

  auto* curves = app.add_subcommand("curves", "Export per-step R/P/I curves from a run directory");
  std::string curves_run;
  std::string curves_out;
  curves->add_option("run_dir", curves_run, "Run directory")->required();
  curves->add_option("-o,--out", curves_out, "Output directory (default: <run_dir>/curves)");

  auto* qa = app.add_subcommand("qa", "Generate single- and cross-context QA pairs for a sample");
  add_config(qa);
  std::string qa_sample;
  std::string qa_out;
  qa->add_option("sample", qa_sample, "Sample directory")->required();
  qa->add_option("-o,--out", qa_out, "Output qa.json")->required();

  auto* chunk = app.add_subcommand("chunk", "Dump the chunks of a sample's tagged input");
  add_config(chunk);
  std::string chunk_sample;
  std::string chunk_out;
  chunk->add_option("sample", chunk_sample, "Sample directory")->required();
  chunk->add_option("-o,--out", chunk_out, "CSV output (default: stdout)");

  auto* checklist = app.add_subcommand("checklist", "Print the bundled quality checklist");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code_for(ErrorKind::Config);
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);
  spdlog::set_pattern("[%l] %v");

  try {
    if (*ingest) {
      const auto report = commands::ingest(ingest_src, ingest_out);
      std::cout << report.cleaning_csv;
      spdlog::info("{} files written, {} unchanged", report.written(), report.files.size() - report.written());
    } else if (*run) {
      const auto config = resolve_config(config_path, mode, seed);
      commands::RunRequest request{run_sample, std::nullopt, run_words};
      if (!run_out.empty()) request.run_dir = run_out;
      const auto outcome = commands::run(config, request);
      std::cout << outcome.run_dir.string() << "\n";
      spdlog::info("{} steps, {} words ({})", outcome.artifact.step_texts.size(), outcome.artifact.word_count,
                   author::to_string(outcome.artifact.mode));
    } else if (*eval) {
      const auto config = resolve_config(config_path, mode, seed);
      const auto result = commands::eval(config, {eval_run, eval_sample});
      print_report(result.report);
    } else if (*sweep) {
      const auto config = resolve_config(config_path, mode, seed);
      commands::SweepRequest request;
      request.sample_dir = sweep_sample;
      request.out_dir = sweep_out;
      request.ab = sweep_grid != "k";
      request.k = sweep_grid != "ab";
      request.requested_words = sweep_words;
      request.max_cells = sweep_max_cells;
      request.parallel = sweep_parallel;
      const auto result = commands::sweep(config, request);
      if (request.ab) std::cout << commands::sweep_csv(result.ab_rows);
      if (request.k) std::cout << commands::sweep_csv(result.k_rows);
      spdlog::info("{} cells run, {} resumed{}", result.executed_cells, result.resumed_cells,
                   result.interrupted ? ", stopped early (rerun to resume)" : "");
    } else if (*curves) {
      const fs::path out = curves_out.empty() ? fs::path(curves_run) / "curves" : fs::path(curves_out);
      for (const auto& path : commands::curves(curves_run, out)) std::cout << path.string() << "\n";
    } else if (*qa) {
      const auto config = resolve_config(config_path, mode, seed);
      const auto result = commands::generate_qa(config, qa_sample, qa_out);
      spdlog::info("{} QA pairs written to {}{}", result.pairs.size(), qa_out,
                   result.shortfall ? " (shortfall)" : "");
    } else if (*chunk) {
      const auto config = resolve_config(config_path, mode, seed);
      const auto sample = corpus::load_sample(chunk_sample);
      const auto chunks = chunking::split_recursive(corpus::tagged_papers(sample), config.chunking);
      const std::string csv = chunking::chunk_dump_csv(chunks);
      if (chunk_out.empty()) {
        std::cout << csv;
      } else {
        write_file(chunk_out, csv);
      }
    } else if (*checklist) {
      std::cout << evaluator::bundled_checklist_json();
    }
  } catch (const Error& e) {
    spdlog::error("{} error: {}", to_string(e.kind()), e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    spdlog::error("unexpected error: {}", e.what());
    return 1;
  }
  return 0;
}
