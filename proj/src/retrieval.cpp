#include "longwrite/retrieval.hpp"

#include <algorithm>
#include <cmath>

#include "longwrite/error.hpp"
#include "longwrite/text.hpp"

namespace longwrite::retrieval {

void RetrievalParams::validate() const {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("retrieval parameter a must be positive");
  if (!(b >= 0.0) || !std::isfinite(b)) throw DomainError("retrieval parameter b must be non-negative");
  if (k == 0) throw DomainError("retrieval parameter k must be at least 1");
}

double relevance(const Embedding& chunk, const Embedding& key) {
  if (chunk.dim() != key.dim() || chunk.dim() == 0) {
    throw DimError("embedding dimension mismatch (" + std::to_string(chunk.dim()) + " vs " +
                   std::to_string(key.dim()) + ")");
  }
  double dot = 0.0;
  double chunk_norm = 0.0;
  double key_norm = 0.0;
  for (std::size_t i = 0; i < chunk.dim(); ++i) {
    dot += chunk.values[i] * key.values[i];
    chunk_norm += chunk.values[i] * chunk.values[i];
    key_norm += key.values[i] * key.values[i];
  }
  if (chunk_norm == 0.0 || key_norm == 0.0) throw DegenerateEmbedding("zero-norm embedding");
  const double cosine = dot / (std::sqrt(chunk_norm) * std::sqrt(key_norm));
  return std::clamp(cosine, -1.0, 1.0);
}

double position_curve(double x, double a, double b) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("position x must lie in [0, 1]");
  if (!(a > 0.0)) throw DomainError("position parameter a must be positive");
  if (!(b >= 0.0)) throw DomainError("position parameter b must be non-negative");
  // |(2x - 1)^a| == |2x - 1|^a, and the right-hand form stays real for
  // non-integer a.
  return b * std::pow(std::abs(2.0 * x - 1.0), a);
}

double position_score(std::size_t i, std::size_t n, double a, double b) {
  const double x = chunking::relative_position(i, n);
  if (!(a > 0.0)) throw DomainError("position parameter a must be positive");
  if (!(b >= 0.0)) throw DomainError("position parameter b must be non-negative");
  if (x == 0.0) return b;
  // |2x - 1| from the integer |2i - n| so mirrored chunks get identical scores.
  const std::size_t twice = 2 * i;
  const double distance = static_cast<double>(twice > n ? twice - n : n - twice) / static_cast<double>(n);
  return b * std::pow(distance, a);
}

std::vector<RetrievedChunk> score_chunks(std::span<const chunking::Chunk> chunks,
                                         std::span<const Embedding> chunk_embeddings,
                                         const Embedding& step_embedding, const RetrievalParams& params) {
  params.validate();
  if (chunks.empty()) throw EmptyInput("no chunks to retrieve from");
  if (chunks.size() != chunk_embeddings.size()) {
    throw InvalidInput("chunk and embedding counts differ (" + std::to_string(chunks.size()) + " vs " +
                       std::to_string(chunk_embeddings.size()) + ")");
  }
  std::vector<RetrievedChunk> scored;
  scored.reserve(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    RetrievedChunk item;
    item.chunk = chunks[i];
    item.relevance = relevance(chunk_embeddings[i], step_embedding);
    item.position_score = position_score(i, chunks.size(), params.a, params.b);
    item.importance = importance(item.relevance, item.position_score);
    scored.push_back(std::move(item));
  }
  return scored;
}

std::vector<RetrievedChunk> select_top_k(std::vector<RetrievedChunk> scored, const RetrievalParams& params) {
  params.validate();
  if (params.min_importance) {
    std::erase_if(scored, [&](const RetrievedChunk& c) { return c.importance < *params.min_importance; });
  }
  const auto by_rank = [](const RetrievedChunk& lhs, const RetrievedChunk& rhs) {
    if (lhs.importance != rhs.importance) return lhs.importance > rhs.importance;
    return lhs.chunk.index < rhs.chunk.index;
  };
  const std::size_t keep = std::min(params.k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(), by_rank);
  scored.resize(keep);
  return scored;
}

std::vector<RetrievedChunk> retrieve_top_k(std::span<const chunking::Chunk> chunks,
                                           std::span<const Embedding> chunk_embeddings,
                                           const Embedding& step_embedding, const RetrievalParams& params) {
  return select_top_k(score_chunks(chunks, chunk_embeddings, step_embedding, params), params);
}

std::vector<RetrievedChunk> order_for_restatement(std::vector<RetrievedChunk> retrieved) {
  std::stable_sort(retrieved.begin(), retrieved.end(),
                   [](const RetrievedChunk& lhs, const RetrievedChunk& rhs) {
                     return lhs.importance < rhs.importance;
                   });
  return retrieved;
}

std::string curve_csv(const std::vector<RetrievedChunk>& scored, const std::vector<std::size_t>& selected_indices) {
  std::string out = "index,x,R,P,I,selected\n";
  for (const auto& item : scored) {
    const bool selected = std::find(selected_indices.begin(), selected_indices.end(), item.chunk.index) !=
                          selected_indices.end();
    out += std::to_string(item.chunk.index) + "," + format_double(item.chunk.relative_position) + "," +
           format_double(item.relevance) + "," + format_double(item.position_score) + "," +
           format_double(item.importance) + "," + (selected ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace longwrite::retrieval
