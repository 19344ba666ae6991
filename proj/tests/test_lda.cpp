#include <gtest/gtest.h>

#include "cetm/lda.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace cetm;

TEST(Lda, SingleTopicIsSmoothedFrequency) {
  auto c = testing_util::random_corpus(8, 12, 3, 9, 4);
  LdaConfig cfg;
  cfg.num_topics = 1;
  cfg.sweeps = 5;
  auto s = fit_lda(c, cfg);
  for (const auto& z : s.assignments())
    for (auto t : z) EXPECT_EQ(t, 0);
  const auto phi = s.topic_word();
  const double N = static_cast<double>(c.total_tokens()), V = static_cast<double>(c.vocab_size());
  for (std::size_t v = 0; v < c.vocab_size(); ++v) {
    const double want = (c.g0[v] * N + cfg.beta) / (N + V * cfg.beta);
    EXPECT_NEAR(phi(0, static_cast<Eigen::Index>(v)), want, 1e-14);
  }
}

namespace {

// Total-variation distance between the sampled joint assignment frequencies
// and the enumerated posterior.
double posterior_tv(const std::vector<std::vector<std::string>>& words, const std::vector<std::vector<int>>& ids,
                    std::size_t V, double alpha, double beta) {
  const auto c = Corpus::from_tokens(words);
  const auto exact = oracle::lda_exact_posterior(ids, V, 2, alpha, beta);
  LdaSampler s(c, 2, alpha, beta, 11);
  for (int i = 0; i < 100; ++i) s.sweep();
  std::vector<double> freq(exact.size(), 0.0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    s.sweep();
    std::size_t code = 0, place = 1;
    for (const auto& z : s.assignments())
      for (auto t : z) code += static_cast<std::size_t>(t) * place, place *= 2;
    freq[code] += 1.0 / n;
  }
  double tv = 0.0;
  for (std::size_t k = 0; k < exact.size(); ++k) tv += 0.5 * std::abs(freq[k] - exact[k]);
  return tv;
}

}  // namespace

TEST(Lda, MatchesExactPosteriorOnTwoTokens) {
  EXPECT_LT(posterior_tv({{"a", "b"}}, {{0, 1}}, 2, 0.5, 0.1), 0.02);
}

TEST(Lda, MatchesExactPosteriorOnFiveTokens) {
  EXPECT_LT(posterior_tv({{"a", "b"}, {"a", "c", "c"}}, {{0, 1}, {0, 2, 2}}, 3, 0.5, 0.1), 0.02);
}

TEST(Lda, CountsStayConsistent) {
  auto c = testing_util::random_corpus(15, 25, 4, 20, 8);
  LdaSampler s(c, 4, 0.3, 0.05, 2);
  ASSERT_TRUE(s.counts_consistent());
  for (int i = 0; i < 25; ++i) {
    s.sweep();
    ASSERT_TRUE(s.counts_consistent()) << "after sweep " << i + 1;
  }
  EXPECT_EQ(s.sweeps_done(), 25);
  std::int64_t total = 0;
  for (std::size_t t = 0; t < 4; ++t) total += s.topic_count(t);
  EXPECT_EQ(total, static_cast<std::int64_t>(c.total_tokens()));
}

TEST(Lda, TopicWordByHand) {
  // Two topics over two words; after a sweep, phi follows the counts exactly.
  const auto c = Corpus::from_tokens({{"x", "x", "y"}});
  LdaSampler s(c, 2, 1.0, 0.5, 3);
  s.sweep();
  const auto phi = s.topic_word();
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t v = 0; v < 2; ++v) {
      const double want = (static_cast<double>(s.topic_word_count(t, v)) + 0.5) / (static_cast<double>(s.topic_count(t)) + 1.0);
      EXPECT_DOUBLE_EQ(phi(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(v)), want);
    }
  EXPECT_EQ(s.doc_topic_count(0, 0) + s.doc_topic_count(0, 1), 3);
}

TEST(Lda, EmptyTopicIsUniform) {
  const auto c = Corpus::from_tokens({{"x", "y", "z"}});
  LdaSampler s(c, 6, 0.1, 0.2, 1);
  const auto phi = s.topic_word();
  for (std::size_t t = 0; t < 6; ++t) {
    if (s.topic_count(t) != 0) continue;
    for (Eigen::Index v = 0; v < 3; ++v) EXPECT_DOUBLE_EQ(phi(static_cast<Eigen::Index>(t), v), 1.0 / 3.0);
  }
}

TEST(Lda, RowsSumToOne) {
  auto c = testing_util::random_corpus(10, 30, 5, 15, 3);
  LdaConfig cfg;
  cfg.num_topics = 5;
  cfg.sweeps = 10;
  const auto phi = fit_lda(c, cfg).topic_word();
  for (Eigen::Index t = 0; t < phi.rows(); ++t) EXPECT_NEAR(phi.row(t).sum(), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(cfg.resolved_alpha(), 10.0);
}

TEST(Lda, ConfigErrors) {
  auto c = testing_util::random_corpus(3, 5, 2, 4, 1);
  EXPECT_THROW(LdaSampler(c, 0, 1.0, 1.0, 1), ConfigError);
  EXPECT_THROW(LdaSampler(c, 2, 0.0, 1.0, 1), ConfigError);
  EXPECT_THROW(LdaSampler(c, 2, 1.0, -1.0, 1), ConfigError);
  LdaConfig cfg;
  cfg.sweeps = -1;
  EXPECT_THROW(fit_lda(c, cfg), ConfigError);
}

TEST(Lda, Deterministic) {
  auto c = testing_util::random_corpus(10, 20, 5, 15, 9);
  LdaConfig cfg;
  cfg.num_topics = 3;
  cfg.sweeps = 20;
  EXPECT_EQ(fit_lda(c, cfg).topic_word(), fit_lda(c, cfg).topic_word());
}
