#include "longwrite/chunking.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "longwrite/error.hpp"
#include "longwrite/text.hpp"

namespace longwrite::chunking {

namespace {

struct Span {
  std::size_t begin;
  std::size_t end;
};

struct Piece {
  Span span;
  bool oversize;
};

std::size_t skip_inline_space(std::string_view text, std::size_t pos, std::size_t end) {
  while (pos < end && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\r')) ++pos;
  return pos;
}

// Segment end positions for one separator inside `span`. Every cut sits right
// after whitespace, so no word straddles two segments.
std::vector<std::size_t> cut_points(std::string_view text, Span span, Separator separator) {
  std::vector<std::size_t> cuts;
  std::size_t p = span.begin;
  while (p < span.end) {
    std::size_t cut = 0;
    switch (separator) {
      case Separator::BlankLine:
        if (text[p] == '\n') {
          std::size_t q = skip_inline_space(text, p + 1, span.end);
          if (q < span.end && text[q] == '\n') cut = q + 1;
        }
        break;
      case Separator::LineBreak:
        if (text[p] == '\n') cut = p + 1;
        break;
      case Separator::SentenceEnd:
        if ((text[p] == '.' || text[p] == '!' || text[p] == '?') && p + 1 < span.end &&
            is_space(text[p + 1])) {
          std::size_t q = p + 1;
          while (q < span.end && is_space(text[q])) ++q;
          cut = q;
        }
        break;
      case Separator::Space:
        if (is_space(text[p])) {
          std::size_t q = p;
          while (q < span.end && is_space(text[q])) ++q;
          cut = q;
        }
        break;
    }
    if (cut != 0) {
      if (cut < span.end) cuts.push_back(cut);
      p = cut;
    } else {
      ++p;
    }
  }
  return cuts;
}

class Splitter {
 public:
  Splitter(std::string_view text, const ChunkingConfig& config) : text_(text), config_(config) {}

  std::vector<Piece> run() {
    std::vector<Piece> out;
    split({0, text_.size()}, 0, out);
    return out;
  }

 private:
  std::size_t words(Span s) const { return count_words(text_.substr(s.begin, s.end - s.begin)); }

  bool fits(Span s) const {
    return words(s) <= config_.target_size && s.end - s.begin <= config_.byte_cap();
  }

  void split(Span span, std::size_t level, std::vector<Piece>& out) {
    if (fits(span)) {
      out.push_back({span, false});
      return;
    }
    std::vector<std::size_t> cuts;
    for (; level < config_.separators.size(); ++level) {
      cuts = cut_points(text_, span, config_.separators[level]);
      if (!cuts.empty()) break;
    }
    if (cuts.empty()) {
      spdlog::warn("chunking: indivisible piece of {} bytes ({} words) at offset {} exceeds the size bound",
                   span.end - span.begin, words(span), span.begin);
      out.push_back({span, true});
      return;
    }

    std::vector<Span> pending;
    std::size_t begin = span.begin;
    cuts.push_back(span.end);
    for (std::size_t cut : cuts) {
      Span segment{begin, cut};
      begin = cut;
      if (fits(segment)) {
        pending.push_back(segment);
        continue;
      }
      merge(pending, out);
      pending.clear();
      split(segment, level + 1, out);
    }
    merge(pending, out);
  }

  void merge(const std::vector<Span>& pending, std::vector<Piece>& out) const {
    if (pending.empty()) return;
    Span current = pending.front();
    std::size_t current_words = words(current);
    for (std::size_t i = 1; i < pending.size(); ++i) {
      const std::size_t next_words = words(pending[i]);
      const bool word_ok = current_words + next_words <= config_.target_size;
      const bool byte_ok = pending[i].end - current.begin <= config_.byte_cap();
      if (word_ok && byte_ok) {
        current.end = pending[i].end;
        current_words += next_words;
      } else {
        out.push_back({current, false});
        current = pending[i];
        current_words = next_words;
      }
    }
    out.push_back({current, false});
  }

  std::string_view text_;
  const ChunkingConfig& config_;
};

// Start of the `count`-th word counted backwards from the end of `span`, or
// span.end when the span holds no words.
std::size_t trailing_words_start(std::string_view text, Span span, std::size_t count) {
  std::size_t pos = span.end;
  std::size_t start = span.end;
  std::size_t seen = 0;
  while (pos > span.begin && seen < count) {
    while (pos > span.begin && is_space(text[pos - 1])) --pos;
    if (pos == span.begin) break;
    while (pos > span.begin && !is_space(text[pos - 1])) --pos;
    start = pos;
    ++seen;
  }
  return start;
}

std::size_t utf8_safe_prefix(std::string_view text, std::size_t limit) {
  if (text.size() <= limit) return text.size();
  std::size_t n = limit;
  while (n > 0 && (static_cast<unsigned char>(text[n]) & 0xC0) == 0x80) --n;
  return n;
}

}  // namespace

std::string_view to_string(Separator separator) {
  switch (separator) {
    case Separator::BlankLine: return "blank_line";
    case Separator::LineBreak: return "line_break";
    case Separator::SentenceEnd: return "sentence_end";
    case Separator::Space: return "space";
  }
  return "unknown";
}

Separator separator_from_string(std::string_view name) {
  for (auto s : {Separator::BlankLine, Separator::LineBreak, Separator::SentenceEnd, Separator::Space}) {
    if (to_string(s) == name) return s;
  }
  throw InvalidInput("unknown separator '" + std::string(name) + "'");
}

void ChunkingConfig::validate() const {
  if (target_size == 0) throw DomainError("chunk target_size must be positive");
  if (overlap >= target_size) throw DomainError("chunk overlap must be smaller than target_size");
  if (separators.empty()) throw DomainError("separator hierarchy must not be empty");
  if (max_bytes_per_word == 0) throw DomainError("max_bytes_per_word must be positive");
}

std::vector<Chunk> split_recursive(std::string_view text, const ChunkingConfig& config) {
  config.validate();
  if (text.empty()) throw EmptyInput("cannot chunk empty text");

  const auto pieces = Splitter(text, config).run();
  std::vector<Chunk> chunks;
  chunks.reserve(pieces.size());
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const Span core = pieces[i].span;
    std::size_t start = core.begin;
    if (i > 0 && config.overlap > 0) {
      // The prefix never covers the predecessor's whole core, which keeps
      // start offsets strictly increasing.
      const Span prev = pieces[i - 1].span;
      const std::size_t prev_words = count_words(text.substr(prev.begin, prev.end - prev.begin));
      const std::size_t take = std::min(config.overlap, prev_words > 0 ? prev_words - 1 : 0);
      if (take > 0) start = trailing_words_start(text, prev, take);
    }
    Chunk chunk;
    chunk.index = i;
    chunk.start_offset = start;
    chunk.core_offset = core.begin;
    chunk.end_offset = core.end;
    chunk.text = std::string(text.substr(start, core.end - start));
    chunk.relative_position = relative_position(i, pieces.size());
    chunk.oversize = pieces[i].oversize;
    chunks.push_back(std::move(chunk));
  }
  return chunks;
}

double relative_position(std::size_t i, std::size_t n) {
  if (n == 0 || i >= n) {
    throw DomainError("relative_position needs 0 <= i < n (i=" + std::to_string(i) +
                      ", n=" + std::to_string(n) + ")");
  }
  return static_cast<double>(i) / static_cast<double>(n);
}

std::string chunk_dump_csv(const std::vector<Chunk>& chunks) {
  std::string out = "index,start_offset,end_offset,word_count,preview\n";
  for (const auto& chunk : chunks) {
    std::string preview(std::string_view(chunk.text).substr(0, utf8_safe_prefix(chunk.text, 80)));
    for (char& c : preview) {
      if (c == '\n' || c == '\r' || c == '\t') c = ' ';
    }
    out += std::to_string(chunk.index) + "," + std::to_string(chunk.start_offset) + "," +
           std::to_string(chunk.end_offset) + "," + std::to_string(count_words(chunk.text)) + "," +
           csv_escape(preview) + "\n";
  }
  return out;
}

}  // namespace longwrite::chunking
