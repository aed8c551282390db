#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "longwrite/chunking.hpp"

namespace longwrite::retrieval {

/// A dense embedding. All vectors in one run share a dimension.
struct Embedding {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
};

struct RetrievalParams {
  double a = 60.0;  // steepness of the position penalty toward the ends
  double b = 0.3;   // maximum position penalty, reached at x = 0 and x = 1
  std::size_t k = 12;
  // Chunks below this importance are never selected. Off by default.
  std::optional<double> min_importance;

  /// Throws DomainError unless a > 0, b >= 0 and k >= 1.
  void validate() const;
};

struct RetrievedChunk {
  chunking::Chunk chunk;
  double relevance = 0.0;
  double position_score = 0.0;
  double importance = 0.0;
};

/// Cosine similarity. Throws DimError on mismatched dimensions and
/// DegenerateEmbedding on a zero-norm vector.
double relevance(const Embedding& chunk, const Embedding& key);

/// The continuous position penalty b * |2x - 1|^a on x in [0, 1].
double position_curve(double x, double a, double b);

/// Position penalty of chunk i of n, evaluated at x = i / n.
double position_score(std::size_t i, std::size_t n, double a, double b);

inline double importance(double relevance_score, double position_penalty) {
  return relevance_score - position_penalty;
}

/// R, P and I for every chunk in index order.
std::vector<RetrievedChunk> score_chunks(std::span<const chunking::Chunk> chunks,
                                         std::span<const Embedding> chunk_embeddings,
                                         const Embedding& step_embedding, const RetrievalParams& params);

/// The min(k, N) chunks with the highest importance, sorted by descending
/// importance with ties going to the lower chunk index.
std::vector<RetrievedChunk> select_top_k(std::vector<RetrievedChunk> scored, const RetrievalParams& params);

std::vector<RetrievedChunk> retrieve_top_k(std::span<const chunking::Chunk> chunks,
                                           std::span<const Embedding> chunk_embeddings,
                                           const Embedding& step_embedding, const RetrievalParams& params);

/// Stable ascending sort by importance: the most important chunk ends up last.
std::vector<RetrievedChunk> order_for_restatement(std::vector<RetrievedChunk> retrieved);

/// Curve export: index,x,R,P,I,selected for every scored chunk.
std::string curve_csv(const std::vector<RetrievedChunk>& scored, const std::vector<std::size_t>& selected_indices);

}  // namespace longwrite::retrieval
