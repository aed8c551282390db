#include "longwrite/commands.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <future>
#include <map>
#include <mutex>

#include <spdlog/spdlog.h>

#include "longwrite/corpus.hpp"
#include "longwrite/error.hpp"
#include "longwrite/text.hpp"

namespace longwrite::commands {

namespace fs = std::filesystem;

namespace {

struct Gateways {
  std::unique_ptr<llm::Gateway> writer;
  std::unique_ptr<llm::Gateway> embedder;
  std::unique_ptr<llm::Gateway> judger;
  std::unique_ptr<llm::Gateway> evaluator;
};

Gateways make_writing_gateways(const config::RunConfig& config) {
  Gateways g;
  g.writer = config::make_gateway(config.writer, config.seed);
  g.embedder = config::make_gateway(config.embedder, config.seed);
  return g;
}

void add_judging_gateways(const config::RunConfig& config, Gateways& g) {
  g.judger = config::make_gateway(config.judger, config.seed);
  g.evaluator = config::make_gateway(config.evaluator, config.seed);
}

bool has_tex_files(const fs::path& dir) {
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".tex") return true;
  }
  return false;
}

FileStatus write_if_changed(const fs::path& path, std::string_view contents) {
  std::error_code ec;
  if (fs::exists(path, ec) && fnv1a64(read_file(path)) == fnv1a64(contents)) return FileStatus::Unchanged;
  write_file(path, contents);
  return FileStatus::Written;
}

std::string iso_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

std::string load_summary(const fs::path& run_dir) {
  const auto path = run_dir / "summary.md";
  if (!fs::exists(path)) throw MissingArtifact("run directory " + run_dir.string() + " has no summary.md");
  std::string summary = read_file(path);
  if (summary.ends_with('\n')) summary.pop_back();
  return summary;
}

nlohmann::json load_run_meta(const fs::path& run_dir) {
  const auto path = run_dir / "run_meta.json";
  if (!fs::exists(path)) throw MissingArtifact("run directory " + run_dir.string() + " has no run_meta.json");
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw MissingArtifact("run_meta.json in " + run_dir.string() + " is unreadable: " + e.what());
  }
}

evaluator::EvaluationResult evaluate_run_dir(const config::RunConfig& config, const fs::path& run_dir,
                                             const std::vector<QAPair>& qa_pairs, Gateways& g,
                                             std::span<const evaluator::ChecklistItem> checklist) {
  const std::string summary = load_summary(run_dir);
  const auto meta = load_run_meta(run_dir);
  if (!meta.contains("requested_words") || !meta["requested_words"].is_number_integer()) {
    throw MissingArtifact("run_meta.json in " + run_dir.string() + " lacks requested_words");
  }
  const long required = meta["requested_words"].get<long>();
  auto result = evaluator::evaluate_summary(summary, qa_pairs, required, {*g.judger, *g.evaluator}, checklist,
                                            config.scoring);
  write_file(run_dir / "scores.json", evaluator::to_json(result, checklist).dump(2) + "\n");
  return result;
}

std::vector<QAPair> qa_pairs_for(const corpus::SampleTriplet& sample, llm::Gateway& generator,
                                 const fs::path& cache) {
  if (!sample.qa_pairs.empty()) return sample.qa_pairs;
  if (fs::exists(cache)) return parse_qa_file(read_file(cache));
  spdlog::info("sample {} has no qa.json, generating QA pairs", sample.sample_id);
  auto generated = evaluator::generate_qa_pairs(generator, sample);
  write_file(cache, dump_qa_file(generated.pairs));
  return generated.pairs;
}

nlohmann::json row_to_json(const SweepRow& row) {
  const auto& r = row.report;
  nlohmann::json positional = nlohmann::json::array();
  for (const auto& m : r.positional_means) positional.push_back(m ? nlohmann::json(*m) : nlohmann::json(nullptr));
  return {{"grid", row.cell.grid},
          {"a", row.cell.params.a},
          {"b", row.cell.params.b},
          {"k", row.cell.params.k},
          {"word_count", row.word_count},
          {"step_count", row.step_count},
          {"required_words", r.required_words},
          {"S_l", r.s_l},
          {"S_c", r.consistency.s_c},
          {"single_mean", r.consistency.single_mean},
          {"cross_mean", r.consistency.cross_mean},
          {"S_q", r.quality.s_q},
          {"per_aspect", r.quality.per_aspect},
          {"positional_means", positional}};
}

SweepRow row_from_json(const nlohmann::json& j) {
  SweepRow row;
  row.cell.grid = j.at("grid").get<std::string>();
  row.cell.params.a = j.at("a").get<double>();
  row.cell.params.b = j.at("b").get<double>();
  row.cell.params.k = j.at("k").get<std::size_t>();
  row.word_count = j.at("word_count").get<std::size_t>();
  row.step_count = j.at("step_count").get<std::size_t>();
  auto& r = row.report;
  r.required_words = j.at("required_words").get<long>();
  r.generated_words = static_cast<long>(row.word_count);
  r.s_l = j.at("S_l").get<double>();
  r.consistency.s_c = j.at("S_c").get<double>();
  r.consistency.single_mean = j.at("single_mean").get<double>();
  r.consistency.cross_mean = j.at("cross_mean").get<double>();
  r.quality.s_q = j.at("S_q").get<double>();
  r.quality.per_aspect = j.at("per_aspect").get<std::array<double, evaluator::kAspectCount>>();
  const auto& positional = j.at("positional_means");
  for (std::size_t i = 0; i < 3 && i < positional.size(); ++i) {
    if (!positional[i].is_null()) r.positional_means[i] = positional[i].get<double>();
  }
  return row;
}

/// Completed cells keyed by id. A torn trailing line from a crash is ignored.
std::map<std::string, SweepRow> read_checkpoint(const fs::path& path) {
  std::map<std::string, SweepRow> done;
  if (!fs::exists(path)) return done;
  std::ifstream in(path, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      done[j.at("cell").get<std::string>()] = row_from_json(j.at("row"));
    } catch (const nlohmann::json::exception&) {
      spdlog::warn("ignoring unreadable checkpoint line in {}", path.string());
    }
  }
  return done;
}

std::string step_of(const fs::path& file) { return file.stem().string(); }

}  // namespace

std::size_t IngestReport::written() const {
  return static_cast<std::size_t>(
      std::count_if(files.begin(), files.end(), [](const IngestedFile& f) { return f.status == FileStatus::Written; }));
}

IngestReport ingest(const fs::path& src_dir, const fs::path& out_dir) {
  if (!fs::is_directory(src_dir)) throw IoError("not a directory: " + src_dir.string());
  std::vector<fs::path> sample_dirs;
  if (has_tex_files(src_dir)) {
    sample_dirs.push_back(src_dir);
  } else {
    for (const auto& entry : fs::directory_iterator(src_dir)) {
      if (entry.is_directory() && has_tex_files(entry.path())) sample_dirs.push_back(entry.path());
    }
    std::sort(sample_dirs.begin(), sample_dirs.end());
  }
  if (sample_dirs.empty()) throw LayoutError("no sample directories with .tex papers under " + src_dir.string());

  IngestReport report;
  report.cleaning_csv = "sample,file,kind,begin,end\n";
  for (const auto& dir : sample_dirs) {
    corpus::SampleTriplet sample;
    try {
      sample = corpus::load_sample(dir);
    } catch (Error& e) {
      e.add_context(dir.string());
      throw;
    }
    const fs::path target = out_dir / sample.sample_id;
    std::string sample_csv;
    for (const auto& paper : sample.papers) {
      const auto status = write_if_changed(target / paper.id, paper.cleaned_text);
      report.files.push_back({sample.sample_id, paper.id, status});
      const std::string rows = corpus::cleaning_report_csv(paper.id, paper.removed, false);
      sample_csv += rows;
      std::size_t pos = 0;
      while (pos < rows.size()) {
        const std::size_t end = rows.find('\n', pos);
        report.cleaning_csv += csv_escape(sample.sample_id) + "," + rows.substr(pos, end - pos) + "\n";
        pos = end == std::string::npos ? rows.size() : end + 1;
      }
    }
    const auto report_status = write_if_changed(target / "cleaning_report.csv", "file,kind,begin,end\n" + sample_csv);
    report.files.push_back({sample.sample_id, "cleaning_report.csv", report_status});
    if (!sample.qa_pairs.empty()) {
      const auto qa_status = write_if_changed(target / "qa.json", dump_qa_file(sample.qa_pairs));
      report.files.push_back({sample.sample_id, "qa.json", qa_status});
    }
  }
  return report;
}

author::PipelineOptions pipeline_options(const config::RunConfig& config, int requested_words) {
  author::PipelineOptions options;
  options.requested_total_words = requested_words;
  options.chunking = config.chunking;
  options.retrieval = config.retrieval;
  options.mode = config.mode;
  return options;
}

RunOutcome run(const config::RunConfig& config, const RunRequest& request) {
  const int words = request.requested_words.value_or(config.requested_lengths.front());
  if (words <= 0) throw ConfigError("requested words must be positive");
  const auto sample = corpus::load_sample(request.sample_dir);
  auto g = make_writing_gateways(config);
  const auto options = pipeline_options(config, words);
  const std::string started_at = iso_now();
  RunOutcome outcome;
  outcome.artifact = author::run_pipeline(sample, options, *g.writer, *g.embedder);
  outcome.run_dir = request.run_dir.value_or(config.output_root / sample.sample_id /
                                             (std::string(author::to_string(config.mode)) + "-" + std::to_string(words)));
  author::RunMetadata meta{config.writer.model_name, config.embedder.embedding_model_name, config.seed, started_at};
  author::write_run_directory(outcome.artifact, options, meta, outcome.run_dir);
  return outcome;
}

std::vector<evaluator::ChecklistItem> load_checklist(const config::RunConfig& config) {
  if (!config.checklist) return evaluator::bundled_checklist();
  return evaluator::parse_checklist(read_file(*config.checklist));
}

evaluator::EvaluationResult eval(const config::RunConfig& config, const EvalRequest& request) {
  // Fail on missing artifacts before any backend is built.
  load_summary(request.run_dir);
  load_run_meta(request.run_dir);
  const auto sample = corpus::load_sample(request.sample_dir);
  const auto checklist = load_checklist(config);
  Gateways g;
  add_judging_gateways(config, g);
  const auto pairs = qa_pairs_for(sample, *g.evaluator, request.run_dir / "qa.json");
  return evaluate_run_dir(config, request.run_dir, pairs, g, checklist);
}

std::string SweepCell::id() const {
  return grid + "_a" + format_double(params.a) + "_b" + format_double(params.b) + "_k" + std::to_string(params.k);
}

std::vector<SweepCell> ab_grid(const retrieval::RetrievalParams& base) {
  std::vector<SweepCell> cells;
  for (double a : {5.0, 20.0, 60.0}) {
    for (double b : {0.1, 0.3, 0.5}) {
      SweepCell cell{"ab", base};
      cell.params.a = a;
      cell.params.b = b;
      cells.push_back(cell);
    }
  }
  return cells;
}

std::vector<SweepCell> k_grid(const retrieval::RetrievalParams& base) {
  std::vector<SweepCell> cells;
  for (std::size_t k : {4, 8, 12, 16}) {
    SweepCell cell{"k", base};
    cell.params.a = 10.0;
    cell.params.b = 0.2;
    cell.params.k = k;
    cells.push_back(cell);
  }
  return cells;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "grid,a,b,k,word_count,step_count,S_l,S_c,single_mean,cross_mean,S_q,pos1,pos2,pos3\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    out += row.cell.grid + "," + format_double(row.cell.params.a) + "," + format_double(row.cell.params.b) + "," +
           std::to_string(row.cell.params.k) + "," + std::to_string(row.word_count) + "," +
           std::to_string(row.step_count) + "," + format_double(r.s_l) + "," + format_double(r.consistency.s_c) + "," +
           format_double(r.consistency.single_mean) + "," + format_double(r.consistency.cross_mean) + "," +
           format_double(r.quality.s_q);
    for (const auto& m : r.positional_means) out += "," + (m ? format_double(*m) : std::string());
    out += "\n";
  }
  return out;
}

SweepResult sweep(const config::RunConfig& config, const SweepRequest& request) {
  const int words = request.requested_words.value_or(config.requested_lengths.front());
  const auto sample = corpus::load_sample(request.sample_dir);
  const auto checklist = load_checklist(config);
  Gateways g = make_writing_gateways(config);
  add_judging_gateways(config, g);
  fs::create_directories(request.out_dir);
  const auto pairs = qa_pairs_for(sample, *g.evaluator, request.out_dir / "qa.json");

  std::vector<SweepCell> cells;
  if (request.ab) {
    auto ab = ab_grid(config.retrieval);
    cells.insert(cells.end(), ab.begin(), ab.end());
  }
  if (request.k) {
    auto k = k_grid(config.retrieval);
    cells.insert(cells.end(), k.begin(), k.end());
  }

  const fs::path checkpoint_path = request.out_dir / "checkpoint.jsonl";
  auto done = read_checkpoint(checkpoint_path);
  SweepResult result;
  std::vector<SweepCell> pending;
  for (const auto& cell : cells) {
    if (done.count(cell.id())) {
      ++result.resumed_cells;
    } else {
      pending.push_back(cell);
    }
  }
  if (request.max_cells && pending.size() > *request.max_cells) {
    pending.resize(*request.max_cells);
    result.interrupted = true;
  }

  // Terminate a line torn by an earlier crash so the next record starts clean.
  const bool torn_tail = fs::exists(checkpoint_path) && fs::file_size(checkpoint_path) > 0 &&
                         !read_file(checkpoint_path).ends_with('\n');
  std::mutex checkpoint_mutex;
  std::ofstream checkpoint(checkpoint_path, std::ios::app | std::ios::binary);
  if (!checkpoint) throw IoError("cannot open checkpoint " + checkpoint_path.string());
  if (torn_tail) checkpoint << '\n' << std::flush;

  auto run_cell = [&](const SweepCell& cell) {
    config::RunConfig cell_config = config;
    cell_config.retrieval = cell.params;
    const auto options = pipeline_options(cell_config, words);
    const fs::path cell_dir = request.out_dir / "cells" / cell.id();
    try {
      const std::string started_at = iso_now();
      const auto artifact = author::run_pipeline(sample, options, *g.writer, *g.embedder);
      author::RunMetadata meta{config.writer.model_name, config.embedder.embedding_model_name, config.seed,
                               started_at};
      author::write_run_directory(artifact, options, meta, cell_dir);
      const auto evaluation = evaluate_run_dir(cell_config, cell_dir, pairs, g, checklist);
      SweepRow row{cell, artifact.word_count, artifact.step_texts.size(), evaluation.report};
      nlohmann::json record{{"cell", cell.id()}, {"row", row_to_json(row)}};
      const std::lock_guard lock(checkpoint_mutex);
      checkpoint << record.dump() << '\n' << std::flush;
      done[cell.id()] = row;
      spdlog::info("sweep cell {} done: S_c={}", cell.id(), row.report.consistency.s_c);
    } catch (Error& e) {
      e.add_context("sweep cell " + cell.id());
      throw;
    }
  };

  if (request.parallel) {
    std::vector<std::future<void>> futures;
    for (const auto& cell : pending) futures.push_back(std::async(std::launch::async, run_cell, cell));
    std::exception_ptr failure;
    for (auto& f : futures) {
      try {
        f.get();
      } catch (...) {
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (const auto& cell : pending) run_cell(cell);
  }
  result.executed_cells = pending.size();

  for (const auto& cell : cells) {
    const auto it = done.find(cell.id());
    if (it == done.end()) continue;
    (cell.grid == "ab" ? result.ab_rows : result.k_rows).push_back(it->second);
  }
  if (request.ab) write_file(request.out_dir / "ab_grid.csv", sweep_csv(result.ab_rows));
  if (request.k) write_file(request.out_dir / "k_sweep.csv", sweep_csv(result.k_rows));
  return result;
}

std::vector<fs::path> curves(const fs::path& run_dir, const fs::path& out_dir) {
  const fs::path retrieval_dir = run_dir / "retrieval";
  std::vector<fs::path> inputs;
  if (fs::is_directory(retrieval_dir)) {
    for (const auto& entry : fs::directory_iterator(retrieval_dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".csv") inputs.push_back(entry.path());
    }
  }
  if (inputs.empty()) {
    throw MissingArtifact("run directory " + run_dir.string() + " has no retrieval traces (agentwrite run?)");
  }
  std::sort(inputs.begin(), inputs.end());
  const std::string header = "index,x,R,P,I,selected";
  std::string combined = "step," + header + "\n";
  std::vector<fs::path> outputs;
  for (const auto& input : inputs) {
    const std::string contents = read_file(input);
    std::size_t pos = contents.find('\n');
    if (contents.substr(0, pos) != header) throw InvalidInput(input.string() + " does not have a curve header");
    std::string body;
    while (pos != std::string::npos && pos + 1 < contents.size()) {
      const std::size_t end = contents.find('\n', pos + 1);
      const std::string line = contents.substr(pos + 1, end == std::string::npos ? std::string::npos : end - pos - 1);
      pos = end;
      if (line.empty()) continue;
      const auto fields = csv_split(line);
      if (fields.size() != 6) throw InvalidInput(input.string() + ": malformed curve row \"" + line + "\"");
      body += line + "\n";
      combined += step_of(input) + "," + line + "\n";
    }
    const fs::path output = out_dir / ("step_" + step_of(input) + ".csv");
    write_file(output, header + "\n" + body);
    outputs.push_back(output);
  }
  const fs::path all = out_dir / "curves.csv";
  write_file(all, combined);
  outputs.push_back(all);
  return outputs;
}

evaluator::QaGenerationResult generate_qa(const config::RunConfig& config, const fs::path& sample_dir,
                                          const fs::path& out_file) {
  const auto sample = corpus::load_sample(sample_dir);
  auto generator = config::make_gateway(config.evaluator, config.seed);
  auto result = evaluator::generate_qa_pairs(*generator, sample);
  write_file(out_file, dump_qa_file(result.pairs));
  if (result.shortfall) {
    std::string raw;
    for (const auto& r : result.raw_replies) raw += r + "\n";
    write_file(fs::path(out_file).replace_extension(".raw.txt"), raw);
  }
  return result;
}

}  // namespace longwrite::commands
