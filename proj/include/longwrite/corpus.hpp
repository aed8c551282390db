#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "longwrite/qa.hpp"

namespace longwrite::corpus {

enum class RegionKind { Comment, Preamble, Appendix, Bibliography, DocumentEnd };

std::string_view to_string(RegionKind kind);

/// A byte span of the raw source that cleaning dropped.
struct RemovedRegion {
  RegionKind kind;
  std::size_t begin;
  std::size_t end;
};

struct CleanResult {
  std::string text;
  std::vector<RemovedRegion> removed;  // sorted by begin, non-overlapping
  std::vector<std::string> warnings;
};

/// Strips comments, the preamble and everything from the first appendix or
/// bibliography marker onward. Input that has neither `\documentclass` nor
/// `\begin{document}` is treated as an already-extracted body, which makes
/// cleaning idempotent. Throws MalformedSource when a preamble is present but
/// the document-begin marker is not; `source_name` is used in that message.
CleanResult clean_tex_report(std::string_view raw, std::string_view source_name = "<input>");

inline std::string clean_tex(std::string_view raw, std::string_view source_name = "<input>") {
  return clean_tex_report(raw, source_name).text;
}

struct Document {
  std::string id;
  std::string raw_text;
  std::string cleaned_text;
  std::size_t word_count = 0;
  std::vector<RemovedRegion> removed;

  static Document from_raw(std::string id, std::string raw);
};

struct SampleTriplet {
  std::string sample_id;
  std::array<Document, 3> papers;
  std::vector<QAPair> qa_pairs;
};

/// Loads `<dir>/*.tex` (exactly three, taken in filename order) and an
/// optional `<dir>/qa.json`.
SampleTriplet load_sample(const std::filesystem::path& directory);

/// The three papers wrapped in their numbered tags, separated by blank lines.
/// This is both the `{{ papers }}` slot of the instruction and the text the
/// chunker splits.
std::string tagged_papers(const SampleTriplet& triplet);

std::string build_instruction(const SampleTriplet& triplet, int target_words);

/// One CSV row per removed region: file,kind,begin,end.
std::string cleaning_report_csv(std::string_view file_name, const std::vector<RemovedRegion>& removed,
                                bool with_header);

}  // namespace longwrite::corpus
