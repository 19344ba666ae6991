#pragma once

// k-means document clustering. The cluster centres feed the modified model's
// topic network and the cluster labels pick each document's prior mean.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "cetm/corpus.hpp"
#include "cetm/error.hpp"
#include "cetm/io.hpp"
#include "cetm/sgns.hpp"

namespace cetm {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

inline constexpr const char* kMeanEmbedding = "mean-embedding";
inline constexpr const char* kTfIdf = "tfidf";

struct DocumentVectors {
  std::variant<RowMatrix, SparseRows> points;
  std::string representation;

  std::size_t size() const {
    return std::visit([](const auto& p) { return static_cast<std::size_t>(p.rows()); }, points);
  }
  std::size_t dim() const {
    return std::visit([](const auto& p) { return static_cast<std::size_t>(p.cols()); }, points);
  }
};

// Row d is the count-weighted mean of the embeddings of document d's tokens.
inline RowMatrix mean_embedding_vectors(const Corpus& corpus, const EmbeddingMatrix& emb) {
  if (emb.size() != corpus.vocab_size())
    throw ConfigError("embedding rows do not match vocabulary size");
  RowMatrix out = RowMatrix::Zero(static_cast<Eigen::Index>(corpus.num_docs()), static_cast<Eigen::Index>(emb.dim()));
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    const auto& doc = corpus.documents[d];
    auto row = out.row(static_cast<Eigen::Index>(d));
    for (const auto& wc : doc.counts()) row += static_cast<double>(wc.count) * emb.rows.row(wc.id);
    row /= static_cast<double>(doc.length());
  }
  return out;
}

// L2-normalized raw-count TF times smoothed IDF ln((1+D)/(1+df)) + 1.
inline SparseRows tfidf_vectors(const Corpus& corpus) {
  const auto D = static_cast<double>(corpus.num_docs());
  std::vector<double> df(corpus.vocab_size(), 0.0);
  for (const auto& doc : corpus.documents)
    for (const auto& wc : doc.counts()) df[static_cast<std::size_t>(wc.id)] += 1.0;
  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    const auto& counts = corpus.documents[d].counts();
    double norm2 = 0.0;
    std::vector<double> vals;
    for (const auto& wc : counts) {
      double x = wc.count * (std::log((1.0 + D) / (1.0 + df[static_cast<std::size_t>(wc.id)])) + 1.0);
      vals.push_back(x);
      norm2 += x * x;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t k = 0; k < counts.size(); ++k)
      entries.emplace_back(static_cast<int>(d), counts[k].id, vals[k] * inv);
  }
  SparseRows m(static_cast<Eigen::Index>(corpus.num_docs()), static_cast<Eigen::Index>(corpus.vocab_size()));
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

inline DocumentVectors vectorize_documents(const Corpus& corpus, const EmbeddingMatrix* embeddings) {
  if (embeddings) return {mean_embedding_vectors(corpus, *embeddings), kMeanEmbedding};
  return {tfidf_vectors(corpus), kTfIdf};
}

struct ClusterModel {
  RowMatrix centres;                // k x R
  std::vector<std::int32_t> assignment;
  std::string representation;
  double inertia = 0.0;
  std::vector<double> inertia_trace;  // after each Lloyd iteration of the kept run
  std::size_t reseeds = 0;          // empty clusters moved to the farthest point

  std::size_t k() const { return static_cast<std::size_t>(centres.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(centres.cols()); }
};

struct KMeansOptions {
  std::size_t k = 50;
  std::uint64_t seed = 1;
  int max_iter = 300;
  int restarts = 10;
};

namespace detail {

inline double sq_distance(const RowMatrix& points, Eigen::Index i, const RowMatrix& centres, Eigen::Index c) {
  return (points.row(i) - centres.row(c)).squaredNorm();
}

inline double sq_distance(const SparseRows& points, Eigen::Index i, const RowMatrix& centres, Eigen::Index c) {
  double d = centres.row(c).squaredNorm();
  for (SparseRows::InnerIterator it(points, i); it; ++it) {
    const double ci = centres(c, it.col());
    d += it.value() * it.value() - 2.0 * it.value() * ci;
  }
  return std::max(d, 0.0);
}

inline void add_row(const RowMatrix& points, Eigen::Index i, RowMatrix& acc, Eigen::Index c) {
  acc.row(c) += points.row(i);
}

inline void add_row(const SparseRows& points, Eigen::Index i, RowMatrix& acc, Eigen::Index c) {
  for (SparseRows::InnerIterator it(points, i); it; ++it) acc(c, it.col()) += it.value();
}

// Centre c currently averages n points; make it the mean with point i added
// (sign +1) or removed (sign -1).
template <class Points>
void shift_mean(const Points& points, Eigen::Index i, RowMatrix& centres, Eigen::Index c, std::size_t n, int sign) {
  const double old_n = static_cast<double>(n);
  const double new_n = old_n + sign;
  centres.row(c) *= old_n;
  if (sign > 0) {
    add_row(points, i, centres, c);
  } else {
    RowMatrix neg = RowMatrix::Zero(1, centres.cols());
    add_row(points, i, neg, 0);
    centres.row(c) -= neg.row(0);
  }
  centres.row(c) /= new_n;
}

inline void set_row(const RowMatrix& points, Eigen::Index i, RowMatrix& centres, Eigen::Index c) {
  centres.row(c) = points.row(i);
}

inline void set_row(const SparseRows& points, Eigen::Index i, RowMatrix& centres, Eigen::Index c) {
  centres.row(c).setZero();
  add_row(points, i, centres, c);
}

template <class Points>
RowMatrix kmeanspp_seed(const Points& points, std::size_t k, std::mt19937_64& rng) {
  const Eigen::Index n = points.rows();
  RowMatrix centres = RowMatrix::Zero(static_cast<Eigen::Index>(k), points.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  set_row(points, pick(rng), centres, 0);
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = sq_distance(points, i, centres, 0);
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double x : d2) total += x;
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      chosen = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        r -= d2[static_cast<std::size_t>(i)];
        if (r < 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    set_row(points, chosen, centres, static_cast<Eigen::Index>(c));
    for (Eigen::Index i = 0; i < n; ++i)
      d2[static_cast<std::size_t>(i)] =
          std::min(d2[static_cast<std::size_t>(i)], sq_distance(points, i, centres, static_cast<Eigen::Index>(c)));
  }
  return centres;
}

// Hartigan refinement from a converged Lloyd state: move single points while
// that strictly lowers the within-cluster sum of squares. A partition where no
// such move exists is also a Lloyd fixed point, so the result keeps every
// Lloyd invariant while escaping many of its poor local optima.
template <class Points>
void hartigan(const Points& points, RowMatrix& centres, ClusterModel& m, int max_pass) {
  const Eigen::Index n = points.rows();
  const Eigen::Index k = centres.rows();
  std::vector<std::size_t> members(static_cast<std::size_t>(k), 0);
  for (auto a : m.assignment) ++members[static_cast<std::size_t>(a)];
  for (int pass = 0; pass < max_pass; ++pass) {
    bool moved = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& a = m.assignment[static_cast<std::size_t>(i)];
      const auto na = members[static_cast<std::size_t>(a)];
      if (na <= 1) continue;
      const double leave = static_cast<double>(na) / static_cast<double>(na - 1) * sq_distance(points, i, centres, a);
      Eigen::Index best = -1;
      double best_cost = leave * (1.0 - 1e-12);
      for (Eigen::Index c = 0; c < k; ++c) {
        if (c == a) continue;
        const auto nc = static_cast<double>(members[static_cast<std::size_t>(c)]);
        const double join = nc / (nc + 1.0) * sq_distance(points, i, centres, c);
        if (join < best_cost) {
          best_cost = join;
          best = c;
        }
      }
      if (best < 0) continue;
      shift_mean(points, i, centres, a, na, -1);
      shift_mean(points, i, centres, best, members[static_cast<std::size_t>(best)], +1);
      --members[static_cast<std::size_t>(a)];
      ++members[static_cast<std::size_t>(best)];
      a = static_cast<std::int32_t>(best);
      moved = true;
    }
    if (!moved) break;
    // Exact means again, so incremental rounding never accumulates.
    RowMatrix sums = RowMatrix::Zero(k, points.cols());
    for (Eigen::Index i = 0; i < n; ++i) add_row(points, i, sums, m.assignment[static_cast<std::size_t>(i)]);
    for (Eigen::Index c = 0; c < k; ++c)
      if (members[static_cast<std::size_t>(c)] > 0)
        centres.row(c) = sums.row(c) / static_cast<double>(members[static_cast<std::size_t>(c)]);
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) inertia += sq_distance(points, i, centres, m.assignment[static_cast<std::size_t>(i)]);
    m.inertia_trace.push_back(inertia);
  }
}

// Lloyd iterations from the given centres. A point changes cluster only when
// another centre is strictly closer; ties otherwise go to the lowest index.
template <class Points>
ClusterModel lloyd(const Points& points, RowMatrix centres, int max_iter) {
  const Eigen::Index n = points.rows();
  const Eigen::Index k = centres.rows();
  ClusterModel m;
  m.assignment.assign(static_cast<std::size_t>(n), -1);
  bool converged = false;
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& a = m.assignment[static_cast<std::size_t>(i)];
      Eigen::Index best = a;
      double best_d = a >= 0 ? sq_distance(points, i, centres, a) : std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < k; ++c) {
        const double d = sq_distance(points, i, centres, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (best != a) {
        a = static_cast<std::int32_t>(best);
        changed = true;
      }
    }
    if (!changed && iter > 0) {
      converged = true;
      break;
    }

    RowMatrix sums = RowMatrix::Zero(k, points.cols());
    std::vector<std::size_t> members(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto a = m.assignment[static_cast<std::size_t>(i)];
      add_row(points, i, sums, a);
      ++members[static_cast<std::size_t>(a)];
    }
    for (Eigen::Index c = 0; c < k; ++c) {
      if (members[static_cast<std::size_t>(c)] > 0) {
        centres.row(c) = sums.row(c) / static_cast<double>(members[static_cast<std::size_t>(c)]);
      }
    }
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) inertia += sq_distance(points, i, centres, m.assignment[static_cast<std::size_t>(i)]);
    // Empty clusters jump to the point farthest from its own centre. The move
    // leaves the inertia of the current assignment unchanged.
    for (Eigen::Index c = 0; c < k; ++c) {
      if (members[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d = sq_distance(points, i, centres, m.assignment[static_cast<std::size_t>(i)]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      set_row(points, far, centres, c);
      ++m.reseeds;
    }
    m.inertia_trace.push_back(inertia);
  }
  if (converged) hartigan(points, centres, m, max_iter);
  m.centres = std::move(centres);
  m.inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) m.inertia += sq_distance(points, i, m.centres, m.assignment[static_cast<std::size_t>(i)]);
  return m;
}

}  // namespace detail

// k-means++ seeding, Lloyd iterations, then Hartigan refinement; the restart with the lowest
// inertia is kept (first one on ties).
template <class Points>
ClusterModel kmeans(const Points& points, const KMeansOptions& options) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (options.k == 0) throw ConfigError("k-means needs k >= 1");
  if (options.k > n)
    throw ConfigError("k-means with k=" + std::to_string(options.k) + " but only " + std::to_string(n) + " points");
  if (options.max_iter < 1 || options.restarts < 1) throw ConfigError("k-means needs max_iter >= 1 and restarts >= 1");
  std::mt19937_64 rng(options.seed);
  ClusterModel best;
  bool have = false;
  std::size_t reseeds = 0;
  for (int r = 0; r < options.restarts; ++r) {
    auto model = detail::lloyd(points, detail::kmeanspp_seed(points, options.k, rng), options.max_iter);
    reseeds += model.reseeds;
    if (!have || model.inertia < best.inertia) {
      best = std::move(model);
      have = true;
    }
  }
  best.reseeds = reseeds;
  return best;
}

inline ClusterModel cluster_documents(const DocumentVectors& vectors, const KMeansOptions& options) {
  auto model = std::visit([&](const auto& p) { return kmeans(p, options); }, vectors.points);
  model.representation = vectors.representation;
  return model;
}

// ---------------------------------------------------------------------------
// Cluster file: {"centres": [[...]], "assignment": [...], "representation": "...", "inertia": x}

inline json cluster_to_json(const ClusterModel& m) {
  json centres = json::array();
  for (Eigen::Index c = 0; c < m.centres.rows(); ++c) {
    std::vector<double> row(m.centres.row(c).data(), m.centres.row(c).data() + m.centres.cols());
    centres.push_back(std::move(row));
  }
  return json{{"centres", std::move(centres)},
              {"assignment", m.assignment},
              {"representation", m.representation},
              {"inertia", m.inertia}};
}

inline ClusterModel cluster_from_json(const json& j, const std::string& origin) {
  auto fail = [&](const std::string& msg) { throw ParseError(origin + ": " + msg); };
  if (!j.is_object() || !j.contains("centres") || !j.contains("assignment") || !j.contains("representation"))
    fail("cluster file needs centres, assignment and representation");
  ClusterModel m;
  try {
    auto rows = j["centres"].get<std::vector<std::vector<double>>>();
    if (rows.empty()) fail("no centres");
    m.centres.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t c = 0; c < rows.size(); ++c) {
      if (rows[c].size() != rows[0].size()) fail("centres have unequal dimensions");
      for (std::size_t r = 0; r < rows[c].size(); ++r)
        m.centres(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) = rows[c][r];
    }
    m.assignment = j["assignment"].get<std::vector<std::int32_t>>();
    m.representation = j["representation"].get<std::string>();
    m.inertia = j.value("inertia", 0.0);
  } catch (const json::exception& e) {
    fail(std::string("wrong value type: ") + e.what());
  }
  for (auto a : m.assignment)
    if (a < 0 || static_cast<std::size_t>(a) >= m.k()) fail("assignment refers to a missing centre");
  return m;
}

inline void save_clusters(const ClusterModel& m, const std::filesystem::path& path) {
  atomic_write(path, cluster_to_json(m).dump() + "\n");
}

inline ClusterModel load_clusters(const std::filesystem::path& path) {
  return cluster_from_json(load_json(path), path.string());
}

}  // namespace cetm
