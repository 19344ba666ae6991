#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "cetm/cetm.hpp"

namespace testing_util {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("cetm_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Random corpus with every vocabulary word present at least once.
inline cetm::Corpus random_corpus(std::size_t docs, std::size_t vocab, std::size_t min_len, std::size_t max_len,
                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> word(0, vocab - 1), len(min_len, max_len);
  std::vector<std::vector<std::string>> toks(docs);
  std::size_t next = 0;
  for (auto& d : toks) {
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t v = next < vocab ? next++ : word(rng);
      d.push_back("w" + std::to_string(v));
    }
  }
  return cetm::Corpus::from_tokens(toks);
}

// Random centres with documents assigned round-robin.
inline cetm::ClusterModel round_robin_clusters(std::size_t docs, std::size_t k, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  cetm::ClusterModel m;
  m.centres.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < m.centres.size(); ++i) m.centres.data()[i] = g(rng);
  for (std::size_t d = 0; d < docs; ++d) m.assignment.push_back(static_cast<std::int32_t>(d % k));
  m.representation = "test";
  return m;
}

inline cetm::Model small_model(cetm::ModelKind kind, const cetm::Corpus& corpus, std::size_t topics, std::size_t dim,
                               std::size_t hidden, double init_std, std::uint64_t seed,
                               const cetm::ClusterModel* clusters = nullptr) {
  cetm::ModelConfig cfg;
  cfg.kind = kind;
  cfg.num_topics = topics;
  cfg.dim = dim;
  cfg.hidden = hidden;
  cfg.init_std = init_std;
  return cetm::make_model(cfg, corpus, clusters, nullptr, false, seed);
}

}  // namespace testing_util
