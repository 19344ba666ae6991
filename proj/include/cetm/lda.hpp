#pragma once

// Collapsed Gibbs sampling for LDA, the frequency-based baseline.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cetm/corpus.hpp"
#include "cetm/error.hpp"

namespace cetm {

struct LdaConfig {
  std::size_t num_topics = 50;
  double alpha = -1.0;  // negative: 50 / #T
  double beta = 0.01;
  int sweeps = 1000;
  std::uint64_t seed = 1;

  double resolved_alpha() const { return alpha > 0 ? alpha : 50.0 / static_cast<double>(num_topics); }
};

class LdaSampler {
 public:
  LdaSampler(const Corpus& corpus, std::size_t num_topics, double alpha, double beta, std::uint64_t seed)
      : corpus_(&corpus),
        T_(num_topics),
        V_(corpus.vocab_size()),
        alpha_(alpha),
        beta_(beta),
        rng_(seed),
        n_tv_(num_topics * corpus.vocab_size(), 0),
        n_dt_(corpus.num_docs() * num_topics, 0),
        n_t_(num_topics, 0),
        weights_(num_topics) {
    if (num_topics == 0) throw ConfigError("LDA needs at least one topic");
    if (!(alpha > 0) || !(beta > 0)) throw ConfigError("LDA hyperparameters must be positive");
    std::uniform_int_distribution<std::size_t> pick(0, T_ - 1);
    z_.resize(corpus.num_docs());
    for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
      const auto& tokens = corpus.documents[d].tokens();
      z_[d].resize(tokens.size());
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        const std::size_t t = pick(rng_);
        z_[d][i] = static_cast<std::int32_t>(t);
        add(d, static_cast<std::size_t>(tokens[i]), t, +1);
      }
    }
  }

  // One systematic-scan sweep over every token.
  void sweep() {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double vbeta = static_cast<double>(V_) * beta_;
    for (std::size_t d = 0; d < z_.size(); ++d) {
      const auto& tokens = corpus_->documents[d].tokens();
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto v = static_cast<std::size_t>(tokens[i]);
        add(d, v, static_cast<std::size_t>(z_[d][i]), -1);
        double total = 0.0;
        for (std::size_t t = 0; t < T_; ++t) {
          total += (n_dt_[d * T_ + t] + alpha_) * (n_tv_[t * V_ + v] + beta_) / (n_t_[t] + vbeta);
          weights_[t] = total;
        }
        const double u = unif(rng_) * total;
        std::size_t t = 0;
        while (t + 1 < T_ && weights_[t] <= u) ++t;
        z_[d][i] = static_cast<std::int32_t>(t);
        add(d, v, t, +1);
      }
    }
    ++sweeps_;
  }

  // Recounts every table from z; true when they all agree.
  bool counts_consistent() const {
    std::vector<std::int64_t> tv(n_tv_.size(), 0), dt(n_dt_.size(), 0), t(n_t_.size(), 0);
    for (std::size_t d = 0; d < z_.size(); ++d) {
      const auto& tokens = corpus_->documents[d].tokens();
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto k = static_cast<std::size_t>(z_[d][i]);
        ++tv[k * V_ + static_cast<std::size_t>(tokens[i])];
        ++dt[d * T_ + k];
        ++t[k];
      }
    }
    return tv == n_tv_ && dt == n_dt_ && t == n_t_;
  }

  // (n_tv + beta) / (n_t + V beta)
  Eigen::MatrixXd topic_word() const {
    Eigen::MatrixXd phi(static_cast<Eigen::Index>(T_), static_cast<Eigen::Index>(V_));
    const double vbeta = static_cast<double>(V_) * beta_;
    for (std::size_t t = 0; t < T_; ++t)
      for (std::size_t v = 0; v < V_; ++v)
        phi(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(v)) =
            (static_cast<double>(n_tv_[t * V_ + v]) + beta_) / (static_cast<double>(n_t_[t]) + vbeta);
    return phi;
  }

  const std::vector<std::vector<std::int32_t>>& assignments() const { return z_; }
  std::int64_t topic_word_count(std::size_t t, std::size_t v) const { return n_tv_[t * V_ + v]; }
  std::int64_t doc_topic_count(std::size_t d, std::size_t t) const { return n_dt_[d * T_ + t]; }
  std::int64_t topic_count(std::size_t t) const { return n_t_[t]; }
  std::size_t num_topics() const { return T_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  int sweeps_done() const { return sweeps_; }

 private:
  void add(std::size_t d, std::size_t v, std::size_t t, int delta) {
    n_tv_[t * V_ + v] += delta;
    n_dt_[d * T_ + t] += delta;
    n_t_[t] += delta;
  }

  const Corpus* corpus_;
  std::size_t T_, V_;
  double alpha_, beta_;
  std::mt19937_64 rng_;
  std::vector<std::vector<std::int32_t>> z_;
  std::vector<std::int64_t> n_tv_, n_dt_, n_t_;
  std::vector<double> weights_;
  int sweeps_ = 0;
};

// Runs the configured number of sweeps and keeps the last sample.
inline LdaSampler fit_lda(const Corpus& corpus, const LdaConfig& config) {
  if (config.sweeps < 0) throw ConfigError("sweeps must be non-negative");
  LdaSampler s(corpus, config.num_topics, config.resolved_alpha(), config.beta, config.seed);
  for (int i = 0; i < config.sweeps; ++i) s.sweep();
  return s;
}

}  // namespace cetm
