#pragma once

// Synthetic corpora with known topics, and the aligned top-word purity used
// to check that a model recovers them.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "cetm/corpus.hpp"
#include "cetm/error.hpp"
#include "cetm/model.hpp"

namespace cetm {

struct PlantedOptions {
  std::size_t num_docs = 500;
  std::size_t vocab = 200;
  std::size_t topics = 5;
  double alpha = 0.1;
  double decay = 8.0;              // within-block weight exp(-rank / decay)
  double background = 0.02;        // topic mass spread over the other blocks
  std::size_t min_length = 40, max_length = 80;
  std::uint64_t seed = 1;
};

struct PlantedCorpus {
  Corpus corpus;
  Eigen::MatrixXd phi;            // topics x corpus vocabulary
  std::vector<std::int32_t> owner;  // argmax planted topic of each vocabulary word
};

// Each topic owns a contiguous block of vocab/topics words with geometrically
// decaying weights; documents draw proportions from Dirichlet(alpha).
inline PlantedCorpus make_planted_corpus(const PlantedOptions& o) {
  if (o.topics == 0 || o.vocab < o.topics || o.min_length == 0 || o.max_length < o.min_length)
    throw ConfigError("invalid planted corpus options");
  const std::size_t K = o.topics, V = o.vocab, block = V / K;
  Eigen::MatrixXd phi_full = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(V));
  for (std::size_t k = 0; k < K; ++k) {
    double in_block = 0.0;
    for (std::size_t r = 0; r < block; ++r) in_block += std::exp(-static_cast<double>(r) / o.decay);
    const double outside = static_cast<double>(V - block);
    for (std::size_t v = 0; v < V; ++v) {
      const bool mine = v / block == k && v < K * block;
      const double p = mine ? (1.0 - o.background) * std::exp(-static_cast<double>(v - k * block) / o.decay) / in_block
                            : o.background / outside;
      phi_full(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(v)) = p;
    }
  }

  std::mt19937_64 rng(o.seed);
  std::gamma_distribution<double> gamma(o.alpha, 1.0);
  std::uniform_int_distribution<std::size_t> length(o.min_length, o.max_length);
  std::vector<std::discrete_distribution<std::size_t>> word_of;
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<double> w(V);
    for (std::size_t v = 0; v < V; ++v) w[v] = phi_full(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(v));
    word_of.emplace_back(w.begin(), w.end());
  }
  auto name = [](std::size_t v) {
    std::string s = std::to_string(v);
    return "w" + std::string(3 - std::min<std::size_t>(3, s.size()), '0') + s;
  };
  std::vector<std::vector<std::string>> docs;
  std::vector<double> theta(K);
  for (std::size_t d = 0; d < o.num_docs; ++d) {
    double sum = 0.0;
    for (auto& x : theta) sum += (x = gamma(rng));
    if (!(sum > 0.0)) {
      theta.assign(K, 0.0);
      theta[d % K] = sum = 1.0;
    }
    std::discrete_distribution<std::size_t> topic_of(theta.begin(), theta.end());
    std::vector<std::string> doc;
    const std::size_t n = length(rng);
    for (std::size_t i = 0; i < n; ++i) doc.push_back(name(word_of[topic_of(rng)](rng)));
    docs.push_back(std::move(doc));
  }

  PlantedCorpus out;
  out.corpus = Corpus::from_tokens(docs);
  const auto& vocab = out.corpus.vocabulary;
  out.phi.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(vocab.size()));
  out.owner.resize(vocab.size());
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    const std::size_t v = std::stoul(vocab.word(static_cast<WordId>(id)).substr(1));
    out.phi.col(static_cast<Eigen::Index>(id)) = phi_full.col(static_cast<Eigen::Index>(v));
    Eigen::Index arg;
    phi_full.col(static_cast<Eigen::Index>(v)).maxCoeff(&arg);
    out.owner[id] = static_cast<std::int32_t>(arg);
  }
  return out;
}

// Minimum-cost perfect matching on a square cost matrix (Hungarian method,
// O(n^3)). Returns match[row] = column.
inline std::vector<std::size_t> hungarian_min(const Eigen::MatrixXd& cost) {
  const auto n = static_cast<std::size_t>(cost.rows());
  if (cost.cols() != cost.rows()) throw ConfigError("assignment needs a square cost matrix");
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials and matching, column 0 is a sentinel.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) minv[j] = cur, way[j] = j0;
        if (minv[j] < delta) delta = minv[j], j1 = j;
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) u[p[j]] += delta, v[j] -= delta;
        else minv[j] -= delta;
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> match(n);
  for (std::size_t j = 1; j <= n; ++j) match[p[j] - 1] = j - 1;
  return match;
}

// Fraction of learned top-n words owned by the planted topic matched to their
// learned topic, after a maximum-overlap one-to-one matching.
inline double aligned_purity(const Eigen::MatrixXd& learned_topic_word, const std::vector<std::int32_t>& owner,
                             std::size_t planted_topics, std::size_t n = 10) {
  const auto T = static_cast<std::size_t>(learned_topic_word.rows());
  if (T != planted_topics) throw ConfigError("purity needs as many learned topics as planted ones");
  Eigen::MatrixXd overlap = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(T));
  for (std::size_t t = 0; t < T; ++t)
    for (const auto& wp : top_words(learned_topic_word.row(static_cast<Eigen::Index>(t)).transpose(), n))
      overlap(static_cast<Eigen::Index>(t), owner[static_cast<std::size_t>(wp.id)]) += 1.0;
  const auto match = hungarian_min(-overlap);
  double hits = 0.0;
  for (std::size_t t = 0; t < T; ++t) hits += overlap(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(match[t]));
  return hits / static_cast<double>(T * n);
}

}  // namespace cetm
