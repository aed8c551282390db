#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "longwrite/error.hpp"
#include "longwrite/retrieval.hpp"
#include "support.hpp"

using namespace longwrite;
using namespace longwrite::retrieval;

namespace {

std::vector<chunking::Chunk> make_chunks(std::size_t n) {
  std::vector<chunking::Chunk> chunks(n);
  for (std::size_t i = 0; i < n; ++i) {
    chunks[i].index = i;
    chunks[i].text = "chunk " + std::to_string(i);
    chunks[i].relative_position = static_cast<double>(i) / static_cast<double>(n);
  }
  return chunks;
}

// Oracle pieces written without the library: integer power by repeated
// multiplication and a plain cosine.
double oracle_position(std::size_t i, std::size_t n, int a, double b) {
  const double base = (2.0 * static_cast<double>(i) - static_cast<double>(n)) / static_cast<double>(n);
  double p = 1.0;
  for (int j = 0; j < a; ++j) p *= base;
  return b * std::fabs(p);
}

double oracle_cosine(const std::vector<double>& x, const std::vector<double>& y) {
  double dot = 0, nx = 0, ny = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    nx += x[i] * x[i];
    ny += y[i] * y[i];
  }
  return dot / std::sqrt(nx * ny);
}

std::vector<std::size_t> oracle_rank(const std::vector<double>& importance, std::size_t k) {
  std::vector<std::size_t> idx(importance.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    if (importance[x] != importance[y]) return importance[x] > importance[y];
    return x < y;
  });
  idx.resize(std::min(k, idx.size()));
  return idx;
}

Embedding vec(std::vector<double> v) { return Embedding{std::move(v)}; }

}  // namespace

TEST(Relevance, Examples) {
  EXPECT_DOUBLE_EQ(relevance(vec({1, 0, 0}), vec({1, 0, 0})), 1.0);
  EXPECT_DOUBLE_EQ(relevance(vec({1, 0}), vec({0, 1})), 0.0);
  EXPECT_NEAR(relevance(vec({1, 1}), vec({1, 0})), std::sqrt(2.0) / 2.0, 1e-15);
  EXPECT_THROW(relevance(vec({1, 0}), vec({1, 0, 0})), DimError);
  EXPECT_THROW(relevance(vec({0, 0}), vec({1, 0})), DegenerateEmbedding);
}

TEST(PositionScore, Examples) {
  EXPECT_DOUBLE_EQ(position_score(0, 10, 60, 0.3), 0.3);
  EXPECT_DOUBLE_EQ(position_score(5, 10, 60, 0.3), 0.0);
  EXPECT_DOUBLE_EQ(position_score(2, 8, 2, 0.5), 0.125);
  EXPECT_THROW(position_score(10, 10, 60, 0.3), DomainError);
  EXPECT_THROW(position_score(0, 10, 0, 0.3), DomainError);
  EXPECT_THROW(position_score(0, 10, 60, -0.1), DomainError);
}

TEST(PositionScore, ShapeOnGrid) {
  for (double a : {5.0, 20.0, 60.0}) {
    for (double b : {0.1, 0.3, 0.5}) {
      EXPECT_EQ(position_curve(0.0, a, b), b);
      EXPECT_EQ(position_curve(1.0, a, b), b);
      EXPECT_EQ(position_curve(0.5, a, b), 0.0);
      double previous = 0.0;
      for (int j = 0; j <= 1000; ++j) {
        const double x = j / 1000.0;
        EXPECT_LE(std::fabs(position_curve(x, a, b) - position_curve(1.0 - x, a, b)), 1e-12);
        if (x >= 0.5) {
          const double value = position_curve(x, a, b);
          EXPECT_GE(value, previous);
          previous = value;
        }
      }
    }
  }
}

TEST(PositionScore, DiscreteSymmetry) {
  for (std::size_t n = 2; n <= 40; ++n) {
    for (std::size_t i = 1; i < n; ++i) {
      EXPECT_EQ(position_score(i, n, 20, 0.3), position_score(n - i, n, 20, 0.3));
    }
  }
}

TEST(Importance, Examples) {
  EXPECT_NEAR(importance(0.8, 0.3), 0.5, 1e-15);
  EXPECT_EQ(importance(0.5, 0.0), 0.5);
  EXPECT_NEAR(importance(0.2, 0.3), -0.1, 1e-15);
}

TEST(SelectTopK, WorkedExample) {
  // R = [0.9, 0.8, 0.1], P = [0.3, 0.0, 0.3] gives I = [0.6, 0.8, -0.2].
  std::vector<RetrievedChunk> scored(3);
  const double r[] = {0.9, 0.8, 0.1};
  const double p[] = {0.3, 0.0, 0.3};
  for (std::size_t i = 0; i < 3; ++i) {
    scored[i].chunk.index = i;
    scored[i].relevance = r[i];
    scored[i].position_score = p[i];
    scored[i].importance = importance(r[i], p[i]);
  }
  RetrievalParams params;
  params.k = 2;
  const auto top = select_top_k(scored, params);
  ASSERT_EQ(top.size(), 2u);
  EXPECT_EQ(top[0].chunk.index, 1u);
  EXPECT_EQ(top[1].chunk.index, 0u);
  const auto ordered = order_for_restatement(top);
  EXPECT_EQ(ordered[0].chunk.index, 0u);
  EXPECT_EQ(ordered[1].chunk.index, 1u);
}

TEST(RetrieveTopK, SaturatesAndBreaksTies) {
  const auto chunks = make_chunks(4);
  // Chunks 1 and 3 sit at x = 1/4 and 3/4 with equal penalties and equal
  // relevance, so only the index decides.
  std::vector<Embedding> embeddings{vec({1, 0}), vec({1, 1}), vec({0, 1}), vec({1, 1})};
  RetrievalParams params;
  params.a = 2;
  params.b = 0.2;
  params.k = 10;
  const auto top = retrieve_top_k(chunks, embeddings, vec({1, 0}), params);
  ASSERT_EQ(top.size(), 4u);
  for (std::size_t i = 1; i < top.size(); ++i) EXPECT_GE(top[i - 1].importance, top[i].importance);
  const auto pos1 = std::find_if(top.begin(), top.end(), [](auto& c) { return c.chunk.index == 1; });
  const auto pos3 = std::find_if(top.begin(), top.end(), [](auto& c) { return c.chunk.index == 3; });
  EXPECT_EQ(pos1->importance, pos3->importance);
  EXPECT_LT(pos1, pos3);
}

TEST(RetrieveTopK, Errors) {
  RetrievalParams params;
  EXPECT_THROW(retrieve_top_k({}, {}, vec({1}), params), EmptyInput);
  const auto chunks = make_chunks(2);
  std::vector<Embedding> one{vec({1})};
  EXPECT_THROW(retrieve_top_k(chunks, one, vec({1}), params), InvalidInput);
  params.k = 0;
  std::vector<Embedding> two{vec({1}), vec({1})};
  EXPECT_THROW(retrieve_top_k(chunks, two, vec({1}), params), DomainError);
}

TEST(RetrieveTopK, MinimumImportanceCutoff) {
  const auto chunks = make_chunks(3);
  std::vector<Embedding> embeddings{vec({1, 0}), vec({0, 1}), vec({1, 0})};
  RetrievalParams params;
  params.b = 0.0;
  params.min_importance = 0.5;
  const auto top = retrieve_top_k(chunks, embeddings, vec({1, 0}), params);
  ASSERT_EQ(top.size(), 2u);
  EXPECT_EQ(top[0].chunk.index, 0u);
  EXPECT_EQ(top[1].chunk.index, 2u);
}

TEST(RetrieveTopK, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal;
  for (int instance = 0; instance < 200; ++instance) {
    const std::size_t n = 1 + rng() % 64;
    const std::size_t dim = 2 + rng() % 8;
    const int a = 1 + static_cast<int>(rng() % 60);
    const double b = (rng() % 6) / 10.0;
    const std::size_t k = 1 + rng() % 20;
    const auto chunks = make_chunks(n);
    std::vector<Embedding> embeddings;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> v(dim);
      // A few duplicated vectors force ties.
      if (i > 0 && rng() % 5 == 0) {
        v = embeddings[rng() % i].values;
      } else {
        for (auto& x : v) x = normal(rng);
      }
      embeddings.push_back(vec(v));
    }
    std::vector<double> key(dim);
    for (auto& x : key) x = normal(rng);
    RetrievalParams params;
    params.a = a;
    params.b = b;
    params.k = k;
    const auto top = retrieve_top_k(chunks, embeddings, vec(key), params);

    std::vector<double> oracle_importance(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = std::clamp(oracle_cosine(embeddings[i].values, key), -1.0, 1.0);
      oracle_importance[i] = r - oracle_position(i, n, a, b);
    }
    const auto expected = oracle_rank(oracle_importance, k);
    ASSERT_EQ(top.size(), expected.size());
    for (std::size_t j = 0; j < top.size(); ++j) {
      EXPECT_EQ(top[j].chunk.index, expected[j]) << "instance " << instance;
      EXPECT_NEAR(top[j].importance, oracle_importance[expected[j]], 1e-12);
      EXPECT_EQ(top[j].importance, top[j].relevance - top[j].position_score);
      EXPECT_GE(top[j].position_score, 0.0);
      EXPECT_LE(top[j].position_score, b);
    }

    const auto ordered = order_for_restatement(top);
    EXPECT_TRUE(std::is_permutation(ordered.begin(), ordered.end(), top.begin(),
                                    [](auto& x, auto& y) { return x.chunk.index == y.chunk.index; }));
    for (std::size_t j = 1; j < ordered.size(); ++j) EXPECT_LE(ordered[j - 1].importance, ordered[j].importance);
    const auto twice = order_for_restatement(ordered);
    for (std::size_t j = 0; j < ordered.size(); ++j) EXPECT_EQ(twice[j].chunk.index, ordered[j].chunk.index);

    // b = 0 ranks by relevance alone.
    params.b = 0.0;
    const auto pure = retrieve_top_k(chunks, embeddings, vec(key), params);
    std::vector<double> cosines(n);
    for (std::size_t i = 0; i < n; ++i) cosines[i] = std::clamp(oracle_cosine(embeddings[i].values, key), -1.0, 1.0);
    const auto cosine_rank = oracle_rank(cosines, k);
    ASSERT_EQ(pure.size(), cosine_rank.size());
    for (std::size_t j = 0; j < pure.size(); ++j) EXPECT_EQ(pure[j].chunk.index, cosine_rank[j]);
  }
}

TEST(OrderForRestatement, StableAndSingle) {
  std::vector<RetrievedChunk> items(3);
  for (std::size_t i = 0; i < 3; ++i) {
    items[i].chunk.index = i;
    items[i].importance = 0.4;
  }
  const auto ordered = order_for_restatement(items);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(ordered[i].chunk.index, i);
  const auto single = order_for_restatement({items[1]});
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].chunk.index, 1u);
}

TEST(CurveCsv, RowsMatchScores) {
  const auto chunks = make_chunks(5);
  std::vector<Embedding> embeddings(5, vec({1, 1}));
  const auto scored = score_chunks(chunks, embeddings, vec({1, 0}), RetrievalParams{});
  const auto csv = curve_csv(scored, {2});
  EXPECT_EQ(csv.rfind("index,x,R,P,I,selected\n", 0), 0u);
  EXPECT_NE(csv.find("\n2,0.4,"), std::string::npos);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
}
