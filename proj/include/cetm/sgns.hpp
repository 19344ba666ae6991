#pragma once

// Skip-gram with negative sampling, used to pretrain word embeddings for the
// "pretrained" model variants.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cetm/corpus.hpp"
#include "cetm/error.hpp"
#include "cetm/io.hpp"

namespace cetm {

// #V x H, one row per vocabulary word.
struct EmbeddingMatrix {
  Eigen::MatrixXd rows;

  std::size_t size() const { return static_cast<std::size_t>(rows.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(rows.cols()); }
  bool all_finite() const { return rows.allFinite(); }
};

struct SgnsConfig {
  int window = 5;
  int negatives = 5;
  double subsample = 1e-4;
  int epochs = 5;
  double learning_rate = 0.025;
  double min_learning_rate_ratio = 1e-4;
  double unigram_power = 0.75;
};

struct SgnsResult {
  EmbeddingMatrix embeddings;
  std::vector<double> epoch_mean_loss;  // per training pair
  std::vector<std::size_t> epoch_pairs;
};

namespace sgns {

inline double log_sigmoid(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

struct PairGradient {
  double loss = 0.0;
  std::vector<double> center;                 // d/du
  std::vector<double> context;                // d/dv_pos
  std::vector<std::vector<double>> negatives; // d/dv_neg[k]
};

// loss = -log sig(u.v) - sum_k log sig(-u.v_k)
inline PairGradient loss_and_grad(std::span<const double> center, std::span<const double> context,
                                  std::span<const std::span<const double>> negatives) {
  const std::size_t H = center.size();
  if (context.size() != H) throw ConfigError("context vector dimension mismatch");
  PairGradient g;
  g.center.assign(H, 0.0);
  g.context.assign(H, 0.0);
  auto dot = [H](std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t h = 0; h < H; ++h) s += a[h] * b[h];
    return s;
  };
  const double sp = dot(center, context);
  g.loss = -log_sigmoid(sp);
  const double cp = sigmoid(sp) - 1.0;
  for (std::size_t h = 0; h < H; ++h) {
    g.center[h] += cp * context[h];
    g.context[h] = cp * center[h];
  }
  for (auto neg : negatives) {
    if (neg.size() != H) throw ConfigError("negative vector dimension mismatch");
    const double sn = dot(center, neg);
    g.loss -= log_sigmoid(-sn);
    const double cn = sigmoid(sn);
    std::vector<double> gn(H);
    for (std::size_t h = 0; h < H; ++h) {
      g.center[h] += cn * neg[h];
      gn[h] = cn * center[h];
    }
    g.negatives.push_back(std::move(gn));
  }
  return g;
}

// One plain SGD step on a (center, context, negatives) example. targets[0] is
// the positive context row of `out`, the rest are negatives. Output rows are
// updated in order, each using the center vector from before the step; the
// center is updated last with the accumulated gradient. Returns the loss at
// the pre-step parameters when targets are distinct.
inline double sgd_step(double* center, double* out, std::size_t H, std::span<const std::size_t> targets,
                       double lr, std::vector<double>& grad_center) {
  grad_center.assign(H, 0.0);
  double loss = 0.0;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const double label = k == 0 ? 1.0 : 0.0;
    double* v = out + targets[k] * H;
    double s = 0.0;
    for (std::size_t h = 0; h < H; ++h) s += center[h] * v[h];
    loss -= label > 0 ? log_sigmoid(s) : log_sigmoid(-s);
    const double g = sigmoid(s) - label;
    for (std::size_t h = 0; h < H; ++h) {
      grad_center[h] += g * v[h];
      v[h] -= lr * g * center[h];
    }
  }
  for (std::size_t h = 0; h < H; ++h) center[h] -= lr * grad_center[h];
  return loss;
}

}  // namespace sgns

// Input vectors start uniform in [-0.5/H, 0.5/H].
inline EmbeddingMatrix initial_sgns_embeddings(std::size_t vocab_size, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-0.5 / static_cast<double>(dim),
                                              0.5 / static_cast<double>(dim));
  EmbeddingMatrix e{Eigen::MatrixXd(static_cast<Eigen::Index>(vocab_size), static_cast<Eigen::Index>(dim))};
  for (Eigen::Index v = 0; v < e.rows.rows(); ++v)
    for (Eigen::Index h = 0; h < e.rows.cols(); ++h) e.rows(v, h) = unif(rng);
  return e;
}

// Sequential and bit-deterministic for a given seed.
inline SgnsResult pretrain_sgns(const Corpus& corpus, std::size_t dim, const SgnsConfig& config,
                                std::uint64_t seed) {
  if (dim == 0) throw ConfigError("embedding dimension must be at least 1");
  if (corpus.num_docs() == 0 || corpus.total_tokens() == 0) throw ConfigError("cannot pretrain on an empty corpus");
  if (config.window < 1 || config.negatives < 0 || config.epochs < 1 || !(config.learning_rate > 0))
    throw ConfigError("invalid skip-gram configuration");

  const std::size_t V = corpus.vocab_size();
  const std::size_t H = dim;
  SgnsResult result{initial_sgns_embeddings(V, H, seed), {}, {}};

  // Row-major working copies for cache-friendly row updates.
  std::vector<double> in(V * H), out(V * H, 0.0);
  for (std::size_t v = 0; v < V; ++v)
    for (std::size_t h = 0; h < H; ++h)
      in[v * H + h] = result.embeddings.rows(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(h));

  std::vector<double> counts(V, 0.0);
  for (const auto& d : corpus.documents)
    for (auto id : d.tokens()) counts[static_cast<std::size_t>(id)] += 1.0;
  const double total = static_cast<double>(corpus.total_tokens());

  std::vector<double> weights(V);
  for (std::size_t v = 0; v < V; ++v) weights[v] = std::pow(counts[v], config.unigram_power);
  std::discrete_distribution<std::size_t> noise(weights.begin(), weights.end());

  std::vector<double> keep(V, 1.0);
  if (config.subsample > 0) {
    const double thr = config.subsample * total;
    for (std::size_t v = 0; v < V; ++v)
      keep[v] = std::min(1.0, (std::sqrt(counts[v] / thr) + 1.0) * thr / counts[v]);
  }

  std::mt19937_64 rng(seed ^ 0x5eedULL);
  std::uniform_real_distribution<double> unif01(0.0, 1.0);
  const double schedule_total = static_cast<double>(config.epochs) * total;
  double processed = 0.0;
  std::vector<double> grad_center(H);
  std::vector<std::size_t> sentence, targets;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t pairs = 0;
    for (const auto& doc : corpus.documents) {
      sentence.clear();
      for (auto id : doc.tokens()) {
        auto w = static_cast<std::size_t>(id);
        if (keep[w] >= 1.0 || unif01(rng) < keep[w]) sentence.push_back(w);
      }
      const double lr = config.learning_rate *
                        std::max(config.min_learning_rate_ratio, 1.0 - processed / schedule_total);
      processed += static_cast<double>(doc.length());
      const auto n = static_cast<std::ptrdiff_t>(sentence.size());
      for (std::ptrdiff_t pos = 0; pos < n; ++pos) {
        const int reach = config.window - static_cast<int>(rng() % static_cast<std::uint64_t>(config.window));
        for (std::ptrdiff_t c = pos - reach; c <= pos + reach; ++c) {
          if (c < 0 || c >= n || c == pos) continue;
          const std::size_t center = sentence[static_cast<std::size_t>(pos)];
          const std::size_t context = sentence[static_cast<std::size_t>(c)];
          targets.clear();
          targets.push_back(context);
          for (int k = 0; k < config.negatives; ++k) {
            std::size_t t = noise(rng);
            if (t != context) targets.push_back(t);
          }
          const double pair_loss = sgns::sgd_step(&in[center * H], out.data(), H, targets, lr, grad_center);
          loss_sum += pair_loss;
          ++pairs;
        }
      }
    }
    result.epoch_mean_loss.push_back(pairs ? loss_sum / static_cast<double>(pairs) : 0.0);
    result.epoch_pairs.push_back(pairs);
  }

  for (std::size_t v = 0; v < V; ++v)
    for (std::size_t h = 0; h < H; ++h)
      result.embeddings.rows(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(h)) = in[v * H + h];
  if (!result.embeddings.all_finite()) throw NumericError("skip-gram produced non-finite embeddings");
  return result;
}

// ---------------------------------------------------------------------------
// Text format: "#V H" then one line per word: surface form followed by H floats.

inline void save_embeddings(const EmbeddingMatrix& e, const Vocabulary& vocab,
                            const std::filesystem::path& path) {
  if (vocab.size() != e.size()) throw ConfigError("embedding rows do not match vocabulary size");
  std::string text = std::to_string(e.size()) + " " + std::to_string(e.dim()) + "\n";
  char buf[40];
  for (std::size_t v = 0; v < e.size(); ++v) {
    text += vocab.word(static_cast<WordId>(v));
    for (std::size_t h = 0; h < e.dim(); ++h) {
      std::snprintf(buf, sizeof buf, " %.17g",
                    e.rows(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(h)));
      text += buf;
    }
    text += '\n';
  }
  atomic_write(path, text);
}

struct LoadedEmbeddings {
  std::vector<std::string> words;
  EmbeddingMatrix embeddings;
};

inline LoadedEmbeddings load_embeddings(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  auto fail = [&](const std::string& msg) { throw ParseError(path.string() + ": " + msg); };
  long long V = -1, H = -1;
  std::string header;
  if (!std::getline(in, header)) fail("missing header line");
  {
    std::istringstream hs(header);
    if (!(hs >> V >> H) || V < 0 || H <= 0) fail("header must be \"#V H\"");
  }
  LoadedEmbeddings out;
  out.embeddings.rows.resize(V, H);
  std::string line;
  for (long long v = 0; v < V; ++v) {
    if (!std::getline(in, line)) fail("expected " + std::to_string(V) + " rows, got " + std::to_string(v));
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) fail("row " + std::to_string(v + 1) + " is empty");
    for (long long h = 0; h < H; ++h) {
      double x;
      if (!(ls >> x)) fail("row " + std::to_string(v + 1) + " has fewer than " + std::to_string(H) + " values");
      out.embeddings.rows(v, h) = x;
    }
    out.words.push_back(std::move(word));
  }
  return out;
}

// Reorders loaded rows to the corpus vocabulary; every vocabulary word must
// be present.
inline EmbeddingMatrix align_embeddings(const LoadedEmbeddings& loaded, const Vocabulary& vocab,
                                        std::size_t expected_dim = 0) {
  if (expected_dim != 0 && loaded.embeddings.dim() != expected_dim)
    throw ConfigError("embedding dimension " + std::to_string(loaded.embeddings.dim()) +
                      " does not match requested " + std::to_string(expected_dim));
  if (loaded.words.size() != vocab.size())
    throw ConfigError("embedding file has " + std::to_string(loaded.words.size()) +
                      " words but the corpus vocabulary has " + std::to_string(vocab.size()));
  std::unordered_map<std::string, std::size_t> row;
  for (std::size_t i = 0; i < loaded.words.size(); ++i) row.emplace(loaded.words[i], i);
  EmbeddingMatrix e{Eigen::MatrixXd(static_cast<Eigen::Index>(vocab.size()),
                                    static_cast<Eigen::Index>(loaded.embeddings.dim()))};
  for (std::size_t v = 0; v < vocab.size(); ++v) {
    auto it = row.find(vocab.word(static_cast<WordId>(v)));
    if (it == row.end())
      throw ConfigError("embedding file has no vector for \"" + vocab.word(static_cast<WordId>(v)) + "\"");
    e.rows.row(static_cast<Eigen::Index>(v)) = loaded.embeddings.rows.row(static_cast<Eigen::Index>(it->second));
  }
  return e;
}

}  // namespace cetm
