#pragma once

// Independent reference computations used by the unit tests and the
// acceptance runner. None of these call the library routine they check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "cetm/cetm.hpp"

namespace oracle {

struct Estimate {
  double value = 0.0;
  double se = 0.0;  // standard error
};

inline Estimate mean_and_se(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size() - 1);
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

// E_q[log q(x) - log p(x)] for q = N(m, diag(s)^2), p = N(m0, I).
inline Estimate monte_carlo_kl(const Eigen::VectorXd& m, const Eigen::VectorXd& log_s, const Eigen::VectorXd& m0,
                               std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> vals(samples);
  for (auto& v : vals) {
    double d = 0.0;
    for (Eigen::Index t = 0; t < m.size(); ++t) {
      const double e = g(rng);
      const double x = m(t) + std::exp(log_s(t)) * e;
      d += -0.5 * e * e - log_s(t) + 0.5 * (x - m0(t)) * (x - m0(t));
    }
    v = d;
  }
  return mean_and_se(vals);
}

// log p(w_d) = log E_{x ~ N(m0, I)} prod_i sum_t softmax(x)_t beta_t(w_i), by
// plain Monte Carlo over the prior. The standard error is for the log, by the
// delta method.
inline Estimate monte_carlo_log_marginal(const Eigen::MatrixXd& beta, const std::vector<int>& tokens,
                                         const Eigen::VectorXd& m0, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const auto T = m0.size();
  std::vector<double> vals(samples);
  Eigen::VectorXd theta(T);
  for (auto& v : vals) {
    double z = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) z += (theta(t) = std::exp(m0(t) + g(rng)));
    theta /= z;
    double p = 1.0;
    for (int w : tokens) {
      double q = 0.0;
      for (Eigen::Index t = 0; t < T; ++t) q += theta(t) * beta(t, w);
      p *= q;
    }
    v = p;
  }
  const auto e = mean_and_se(vals);
  return {std::log(e.value), e.se / e.value};
}

// Average of single-sample ELBO estimates for one document, fresh noise per draw.
inline Estimate average_elbo(const cetm::Model& model, const cetm::Corpus& corpus, std::size_t doc, std::size_t draws,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const std::size_t idx[] = {doc};
  Eigen::MatrixXd noise(static_cast<Eigen::Index>(model.num_topics()), 1);
  std::vector<double> vals(draws);
  for (auto& v : vals) {
    for (Eigen::Index t = 0; t < noise.rows(); ++t) noise(t, 0) = g(rng);
    v = cetm::evaluate_batch(model, corpus, idx, noise, nullptr).total();
  }
  return mean_and_se(vals);
}

// Central differences of the batch ELBO against the analytic gradient at
// `per_block` random coordinates of every non-empty block.
struct GradientCheck {
  std::size_t checked = 0;
  double max_rel = 0.0;
  std::vector<std::string> blocks;
  std::vector<std::string> failures;
};

inline GradientCheck finite_difference_check(const cetm::Model& model, const cetm::Corpus& corpus,
                                             const std::vector<std::size_t>& docs, const Eigen::MatrixXd& noise,
                                             std::size_t per_block, double h, double tol, std::uint64_t seed) {
  cetm::ModelParams analytic;
  cetm::evaluate_batch(model, corpus, docs, noise, &analytic);
  cetm::Model probe = model;
  std::mt19937_64 rng(seed);
  GradientCheck out;
  std::vector<std::string> names;
  model.params.for_each_block([&](std::string_view n, const Eigen::MatrixXd&) { names.emplace_back(n); });
  for (const auto& name : names) {
    if (model.freeze_word_emb && name == "word_emb") continue;
    Eigen::MatrixXd& w = *probe.params.block(name);
    const Eigen::MatrixXd& g = *analytic.block(name);
    std::uniform_int_distribution<Eigen::Index> pick(0, w.size() - 1);
    out.blocks.push_back(name);
    for (std::size_t k = 0; k < per_block; ++k) {
      const Eigen::Index i = pick(rng);
      const double keep = w.data()[i];
      w.data()[i] = keep + h;
      const double up = cetm::evaluate_batch(probe, corpus, docs, noise, nullptr).total();
      w.data()[i] = keep - h;
      const double down = cetm::evaluate_batch(probe, corpus, docs, noise, nullptr).total();
      w.data()[i] = keep;
      const double numeric = (up - down) / (2.0 * h);
      const double a = g.data()[i];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      out.max_rel = std::max(out.max_rel, rel);
      ++out.checked;
      if (!(rel < tol))
        out.failures.push_back(name + "[" + std::to_string(i) + "]: analytic " + std::to_string(a) + " numeric " +
                               std::to_string(numeric));
    }
  }
  return out;
}

// Mean over topics of the mean NPMI over ordered pairs of distinct top words,
// counting document presence by direct scans of the token lists.
inline double brute_force_tc(const std::vector<std::vector<int>>& docs, const std::vector<std::vector<int>>& topics) {
  const double D = static_cast<double>(docs.size());
  auto has = [](const std::vector<int>& d, int w) { return std::find(d.begin(), d.end(), w) != d.end(); };
  double total = 0.0;
  for (const auto& top : topics) {
    double sum = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < top.size(); ++i)
      for (std::size_t j = 0; j < top.size(); ++j) {
        if (i == j) continue;
        double nu = 0, nv = 0, nuv = 0;
        for (const auto& d : docs) {
          const bool a = has(d, top[i]), b = has(d, top[j]);
          nu += a;
          nv += b;
          nuv += a && b;
        }
        const double pu = nu / D, pv = nv / D, puv = nuv / D;
        double v;
        if (puv == 0.0) v = -1.0;
        else if (puv == 1.0) v = 1.0;
        else v = std::log(puv / (pu * pv)) / -std::log(puv);
        sum += v;
        ++pairs;
      }
    total += sum / pairs;
  }
  return total / static_cast<double>(topics.size());
}

inline double brute_force_wswf(const std::vector<std::vector<int>>& docs, const std::vector<std::vector<int>>& topics,
                               const std::vector<std::vector<double>>& probs) {
  double tokens = 0.0;
  for (const auto& d : docs) tokens += static_cast<double>(d.size());
  double total = 0.0;
  for (std::size_t t = 0; t < topics.size(); ++t) {
    double s = 0.0;
    for (std::size_t i = 0; i < topics[t].size(); ++i) {
      double c = 0.0;
      for (const auto& d : docs) c += static_cast<double>(std::count(d.begin(), d.end(), topics[t][i]));
      s += probs[t][i] * std::log(c / tokens);
    }
    total += s;
  }
  return total / static_cast<double>(topics.size());
}

// Minimum within-cluster sum of squares over all k^n assignments.
inline double brute_force_inertia(const cetm::RowMatrix& p, std::size_t k) {
  const auto n = static_cast<std::size_t>(p.rows());
  std::vector<std::size_t> a(n, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(p.cols());
      int m = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (a[i] == c) mean += p.row(static_cast<Eigen::Index>(i)), ++m;
      if (m == 0) continue;
      mean /= m;
      for (std::size_t i = 0; i < n; ++i)
        if (a[i] == c) total += (p.row(static_cast<Eigen::Index>(i)) - mean).squaredNorm();
    }
    best = std::min(best, total);
    std::size_t i = 0;
    while (i < n && ++a[i] == k) a[i++] = 0;
    if (i == n) break;
  }
  return best;
}

// Exact collapsed posterior over topic assignments for a tiny corpus: the
// probability of every joint assignment z (enumerated as base-T digits over
// the tokens in corpus order).
inline std::vector<double> lda_exact_posterior(const std::vector<std::vector<int>>& docs, std::size_t V, std::size_t T,
                                               double alpha, double beta) {
  std::size_t N = 0;
  for (const auto& d : docs) N += d.size();
  std::size_t states = 1;
  for (std::size_t i = 0; i < N; ++i) states *= T;
  std::vector<double> logp(states);
  for (std::size_t s = 0; s < states; ++s) {
    std::vector<double> ndt(docs.size() * T, 0), ntv(T * V, 0), nt(T, 0);
    std::size_t code = s;
    for (std::size_t d = 0; d < docs.size(); ++d)
      for (int w : docs[d]) {
        const std::size_t z = code % T;
        code /= T;
        ndt[d * T + z] += 1;
        ntv[z * V + static_cast<std::size_t>(w)] += 1;
        nt[z] += 1;
      }
    double lp = 0.0;
    for (std::size_t d = 0; d < docs.size(); ++d)
      for (std::size_t t = 0; t < T; ++t) lp += std::lgamma(ndt[d * T + t] + alpha) - std::lgamma(alpha);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t v = 0; v < V; ++v) lp += std::lgamma(ntv[t * V + v] + beta) - std::lgamma(beta);
      lp += std::lgamma(static_cast<double>(V) * beta) - std::lgamma(nt[t] + static_cast<double>(V) * beta);
    }
    logp[s] = lp;
  }
  const double mx = *std::max_element(logp.begin(), logp.end());
  double z = 0.0;
  for (double& l : logp) z += (l = std::exp(l - mx));
  for (double& l : logp) l /= z;
  return logp;
}

}  // namespace oracle
