#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace longwrite::chunking {

/// Structural boundaries, coarsest first in the default hierarchy.
enum class Separator { BlankLine, LineBreak, SentenceEnd, Space };

std::string_view to_string(Separator separator);
Separator separator_from_string(std::string_view name);

struct ChunkingConfig {
  std::size_t target_size = 1000;  // words per chunk, excluding the overlap prefix
  std::size_t overlap = 100;       // words carried over from the predecessor
  std::vector<Separator> separators{Separator::BlankLine, Separator::LineBreak,
                                    Separator::SentenceEnd, Separator::Space};
  // A piece is also oversize when it exceeds target_size * max_bytes_per_word
  // bytes, so very long unbroken runs still get split.
  std::size_t max_bytes_per_word = 16;

  /// Throws DomainError unless overlap < target_size and separators is non-empty.
  void validate() const;
  std::size_t byte_cap() const { return target_size * max_bytes_per_word; }
};

struct Chunk {
  std::size_t index = 0;
  std::size_t start_offset = 0;  // includes the overlap prefix
  std::size_t core_offset = 0;   // first byte not shared with the predecessor
  std::size_t end_offset = 0;
  std::string text;              // input[start_offset, end_offset)
  double relative_position = 0.0;
  bool oversize = false;         // indivisible piece above the size bound

  std::string_view overlap_prefix() const {
    return std::string_view(text).substr(0, core_offset - start_offset);
  }
  std::string_view core() const { return std::string_view(text).substr(core_offset - start_offset); }
};

/// Splits at the coarsest separator that yields pieces within the size bound,
/// recursing to finer separators for oversize pieces, then greedily merges
/// adjacent pieces up to target_size words. Every chunk after the first is
/// prefixed with the trailing `overlap` words of its predecessor's core.
/// Throws EmptyInput for empty text.
std::vector<Chunk> split_recursive(std::string_view text, const ChunkingConfig& config);

/// i / n. Throws DomainError unless 0 <= i < n.
double relative_position(std::size_t i, std::size_t n);

/// index,start_offset,end_offset,word_count,preview (first 80 bytes).
std::string chunk_dump_csv(const std::vector<Chunk>& chunks);

}  // namespace longwrite::chunking
