#include "longwrite/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

#include <spdlog/spdlog.h>

#include "longwrite/error.hpp"
#include "longwrite/templates.hpp"
#include "longwrite/text.hpp"

namespace longwrite::corpus {

namespace {

constexpr std::string_view kBeginDocument = "\\begin{document}";
constexpr std::string_view kDocumentClass = "\\documentclass";

struct TailMarker {
  std::string_view text;
  RegionKind kind;
  bool needs_word_break;  // control words must not run into further letters
};

constexpr std::array<TailMarker, 7> kTailMarkers{{
    {"\\end{document}", RegionKind::DocumentEnd, false},
    {"\\appendix", RegionKind::Appendix, true},
    {"\\begin{appendices}", RegionKind::Appendix, false},
    {"\\begin{thebibliography}", RegionKind::Bibliography, false},
    {"\\bibliographystyle{", RegionKind::Bibliography, false},
    {"\\bibliography{", RegionKind::Bibliography, false},
    {"\\printbibliography", RegionKind::Bibliography, true},
}};

bool escaped(std::string_view text, std::size_t pos) {
  std::size_t backslashes = 0;
  while (pos > backslashes && text[pos - backslashes - 1] == '\\') ++backslashes;
  return backslashes % 2 == 1;
}

std::vector<RemovedRegion> find_comments(std::string_view raw) {
  std::vector<RemovedRegion> regions;
  std::size_t line_start = 0;
  while (line_start < raw.size()) {
    std::size_t line_end = raw.find('\n', line_start);
    const bool has_newline = line_end != std::string_view::npos;
    if (!has_newline) line_end = raw.size();
    for (std::size_t p = line_start; p < line_end; ++p) {
      if (raw[p] != '%' || escaped(raw, p)) continue;
      std::size_t first = line_start;
      while (first < p && is_space(raw[first])) ++first;
      if (first == p) {
        regions.push_back({RegionKind::Comment, line_start, has_newline ? line_end + 1 : line_end});
      } else {
        regions.push_back({RegionKind::Comment, p, line_end});
      }
      break;
    }
    line_start = has_newline ? line_end + 1 : raw.size();
  }
  return regions;
}

// Finds `needle` in `text` from `from`, skipping hits that continue with a letter
// when `word_break` is set (so `\appendix` does not match `\appendixname`).
std::size_t find_marker(std::string_view text, std::string_view needle, bool word_break,
                        std::size_t from) {
  std::size_t pos = text.find(needle, from);
  while (pos != std::string_view::npos && word_break) {
    std::size_t after = pos + needle.size();
    if (after >= text.size() || !std::isalpha(static_cast<unsigned char>(text[after]))) break;
    pos = text.find(needle, pos + 1);
  }
  return pos;
}

}  // namespace

std::string_view to_string(RegionKind kind) {
  switch (kind) {
    case RegionKind::Comment: return "comment";
    case RegionKind::Preamble: return "preamble";
    case RegionKind::Appendix: return "appendix";
    case RegionKind::Bibliography: return "bibliography";
    case RegionKind::DocumentEnd: return "document_end";
  }
  return "unknown";
}

CleanResult clean_tex_report(std::string_view raw, std::string_view source_name) {
  const auto comments = find_comments(raw);

  // Comment-free text plus a map from each kept byte back to its raw offset.
  std::string stripped;
  std::vector<std::size_t> origin;
  stripped.reserve(raw.size());
  origin.reserve(raw.size() + 1);
  std::size_t next = 0;
  for (const auto& region : comments) {
    for (std::size_t p = next; p < region.begin; ++p) {
      stripped += raw[p];
      origin.push_back(p);
    }
    next = region.end;
  }
  for (std::size_t p = next; p < raw.size(); ++p) {
    stripped += raw[p];
    origin.push_back(p);
  }
  origin.push_back(raw.size());

  CleanResult result;
  std::vector<RemovedRegion> structural;

  std::size_t body_begin = 0;
  const std::size_t begin_marker = stripped.find(kBeginDocument);
  if (begin_marker != std::string::npos) {
    body_begin = begin_marker + kBeginDocument.size();
    structural.push_back({RegionKind::Preamble, 0, origin[body_begin]});
  } else if (stripped.find(kDocumentClass) != std::string::npos) {
    throw MalformedSource(std::string(source_name) + ": missing \\begin{document}");
  }

  std::size_t body_end = stripped.size();
  std::optional<RegionKind> tail_kind;
  bool saw_appendix = false;
  for (const auto& marker : kTailMarkers) {
    const std::size_t pos = find_marker(stripped, marker.text, marker.needs_word_break, body_begin);
    if (pos == std::string::npos) continue;
    if (marker.kind == RegionKind::Appendix) saw_appendix = true;
    if (pos < body_end) {
      body_end = pos;
      tail_kind = marker.kind;
    }
  }
  if (tail_kind) structural.push_back({*tail_kind, origin[body_end], raw.size()});
  if (!saw_appendix) {
    result.warnings.push_back(std::string(source_name) + ": no appendix marker, body kept up to " +
                              (tail_kind ? std::string(to_string(*tail_kind)) : std::string("end of input")));
  }

  result.text = stripped.substr(body_begin, body_end - body_begin);

  const std::size_t keep_begin = origin[body_begin];
  const std::size_t keep_end = origin[body_end];
  result.removed = structural;
  for (const auto& region : comments) {
    if (region.begin >= keep_begin && region.end <= keep_end) result.removed.push_back(region);
  }
  std::sort(result.removed.begin(), result.removed.end(),
            [](const RemovedRegion& a, const RemovedRegion& b) { return a.begin < b.begin; });
  return result;
}

Document Document::from_raw(std::string id, std::string raw) {
  auto cleaned = clean_tex_report(raw, id);
  for (const auto& warning : cleaned.warnings) spdlog::warn("{}", warning);
  Document doc;
  doc.id = std::move(id);
  doc.raw_text = std::move(raw);
  doc.cleaned_text = std::move(cleaned.text);
  doc.word_count = count_words(doc.cleaned_text);
  doc.removed = std::move(cleaned.removed);
  return doc;
}

SampleTriplet load_sample(const std::filesystem::path& directory) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(directory, ec)) throw IoError("not a directory: " + directory.string());

  std::vector<fs::path> papers;
  for (const auto& entry : fs::directory_iterator(directory, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".tex") papers.push_back(entry.path());
  }
  if (ec) throw IoError("cannot list " + directory.string());
  std::sort(papers.begin(), papers.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  if (papers.size() != 3) {
    throw LayoutError(directory.string() + ": expected 3 .tex papers, found " +
                      std::to_string(papers.size()));
  }

  SampleTriplet triplet;
  triplet.sample_id = directory.filename().string();
  if (triplet.sample_id.empty()) triplet.sample_id = directory.parent_path().filename().string();
  for (std::size_t i = 0; i < 3; ++i) {
    triplet.papers[i] = Document::from_raw(papers[i].filename().string(), read_file(papers[i]));
  }
  const auto qa_path = directory / "qa.json";
  if (fs::exists(qa_path, ec)) triplet.qa_pairs = parse_qa_file(read_file(qa_path));
  return triplet;
}

std::string tagged_papers(const SampleTriplet& triplet) {
  std::vector<std::string> blocks;
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string n = std::to_string(i + 1);
    blocks.push_back(templates::render_template(
        templates::kPaperBlock, {{"n", n}, {"paper", triplet.papers[i].cleaned_text}}));
  }
  return join(blocks, "\n\n");
}

std::string build_instruction(const SampleTriplet& triplet, int target_words) {
  if (target_words <= 0) throw DomainError("target_words must be positive");
  const std::string papers = tagged_papers(triplet);
  const std::string length = std::to_string(target_words);
  return templates::render_template(templates::kSummaryInstruction,
                                    {{"papers", papers}, {"length", length}});
}

std::string cleaning_report_csv(std::string_view file_name, const std::vector<RemovedRegion>& removed,
                                bool with_header) {
  std::string out = with_header ? "file,kind,begin,end\n" : "";
  for (const auto& region : removed) {
    out += csv_escape(file_name) + "," + std::string(to_string(region.kind)) + "," +
           std::to_string(region.begin) + "," + std::to_string(region.end) + "\n";
  }
  return out;
}

}  // namespace longwrite::corpus
