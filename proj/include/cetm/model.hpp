#pragma once

// Embedded topic model and its cluster-regularized variant.
//
// Both variants share the amortized Gaussian posterior over per-document
// logits x_d ~ N(m_d, diag(s_d)^2), produced by an encoder on the
// L1-normalized bag of words, and the mixture likelihood
//
//   log p(w_d | x_d) = sum_i log sum_t softmax(x_d)_t beta_t(w_di).
//
// Baseline: beta_t = softmax_v(E_V(v) . E_T(t)), prior x_d ~ N(0, I).
// Modified: beta_t(v) ∝ exp(E_V(v) . NN2(c_t)) G0(v) where c_t is the t-th
//           k-means centre, prior x_d ~ N(lambda_d e_{n(d)}, I) with n(d) the
//           document's cluster and lambda_d = exp(log_lambda_d).
//
// Gradients are written out by hand; the finite-difference tests in
// tests/model_gradient_test.cpp pin them.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cetm/cluster.hpp"
#include "cetm/corpus.hpp"
#include "cetm/error.hpp"
#include "cetm/sgns.hpp"

namespace cetm {

enum class ModelKind { etm, modified };

inline std::string to_string(ModelKind k) { return k == ModelKind::etm ? "etm" : "modified"; }

inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "etm") return ModelKind::etm;
  if (s == "modified") return ModelKind::modified;
  throw ConfigError("unknown model kind \"" + std::string(s) + "\"");
}

enum class Activation { tanh, identity };

struct ModelConfig {
  ModelKind kind = ModelKind::modified;
  std::size_t num_topics = 50;
  std::size_t dim = 200;       // H
  std::size_t hidden = 800;    // encoder width
  double init_std = 0.02;
  Activation topic_activation = Activation::tanh;
};

// Trainable tensors. Biases are single-column matrices so every block can be
// visited uniformly; blocks that the model kind does not use stay empty.
struct ModelParams {
  Eigen::MatrixXd word_emb;    // V x H
  Eigen::MatrixXd topic_emb;   // T x H (baseline)
  Eigen::MatrixXd xi_w1;       // H x R (modified topic network)
  Eigen::MatrixXd xi_b1;       // H x 1
  Eigen::MatrixXd xi_w2;       // H x H
  Eigen::MatrixXd xi_b2;       // H x 1
  Eigen::MatrixXd enc_w1;      // hidden x V
  Eigen::MatrixXd enc_b1;
  Eigen::MatrixXd enc_w2;      // hidden x hidden
  Eigen::MatrixXd enc_b2;
  Eigen::MatrixXd enc_wm;      // T x hidden
  Eigen::MatrixXd enc_bm;
  Eigen::MatrixXd enc_ws;      // T x hidden
  Eigen::MatrixXd enc_bs;
  Eigen::MatrixXd log_lambda;  // D x 1 (modified)

  template <class Self, class F>
  static void visit(Self& self, F&& f) {
    f(std::string_view("word_emb"), self.word_emb);
    f(std::string_view("topic_emb"), self.topic_emb);
    f(std::string_view("xi_w1"), self.xi_w1);
    f(std::string_view("xi_b1"), self.xi_b1);
    f(std::string_view("xi_w2"), self.xi_w2);
    f(std::string_view("xi_b2"), self.xi_b2);
    f(std::string_view("enc_w1"), self.enc_w1);
    f(std::string_view("enc_b1"), self.enc_b1);
    f(std::string_view("enc_w2"), self.enc_w2);
    f(std::string_view("enc_b2"), self.enc_b2);
    f(std::string_view("enc_wm"), self.enc_wm);
    f(std::string_view("enc_bm"), self.enc_bm);
    f(std::string_view("enc_ws"), self.enc_ws);
    f(std::string_view("enc_bs"), self.enc_bs);
    f(std::string_view("log_lambda"), self.log_lambda);
  }

  // Calls f(name, matrix) for every non-empty block, in a fixed order.
  template <class F>
  void for_each_block(F&& f) {
    visit(*this, [&](std::string_view n, Eigen::MatrixXd& m) {
      if (m.size() > 0) f(n, m);
    });
  }
  template <class F>
  void for_each_block(F&& f) const {
    visit(*this, [&](std::string_view n, const Eigen::MatrixXd& m) {
      if (m.size() > 0) f(n, m);
    });
  }

  ModelParams zeros_like() const {
    ModelParams z;
    auto src = this;
    visit(z, [&](std::string_view n, Eigen::MatrixXd& m) {
      visit(*src, [&](std::string_view n2, const Eigen::MatrixXd& s) {
        if (n == n2) m = Eigen::MatrixXd::Zero(s.rows(), s.cols());
      });
    });
    return z;
  }

  Eigen::MatrixXd* block(std::string_view name) {
    Eigen::MatrixXd* out = nullptr;
    visit(*this, [&](std::string_view n, Eigen::MatrixXd& m) {
      if (n == name) out = &m;
    });
    return out;
  }

  const Eigen::MatrixXd* block(std::string_view name) const {
    const Eigen::MatrixXd* out = nullptr;
    visit(*this, [&](std::string_view n, const Eigen::MatrixXd& m) {
      if (n == name) out = &m;
    });
    return out;
  }

  std::size_t num_values() const {
    std::size_t n = 0;
    for_each_block([&](std::string_view, const Eigen::MatrixXd& m) { n += static_cast<std::size_t>(m.size()); });
    return n;
  }

  bool all_finite() const {
    bool ok = true;
    for_each_block([&](std::string_view, const Eigen::MatrixXd& m) { ok = ok && m.allFinite(); });
    return ok;
  }
};

// Parameter group a block belongs to: E_V, E_T, xi, eta or log_lambda.
inline std::string_view block_group(std::string_view name) {
  if (name == "word_emb") return "E_V";
  if (name == "topic_emb") return "E_T";
  if (name.starts_with("xi_")) return "xi";
  if (name.starts_with("enc_")) return "eta";
  return "log_lambda";
}

struct Model {
  ModelConfig config;
  ModelParams params;
  bool freeze_word_emb = false;
  Eigen::MatrixXd centres;                 // R x T, column t feeds topic t (modified)
  std::vector<std::int32_t> cluster_of_doc;  // n(d) (modified)
  Eigen::RowVectorXd log_g0;               // 1 x V (modified)

  ModelKind kind() const { return config.kind; }
  std::size_t num_topics() const { return config.num_topics; }
  std::size_t vocab_size() const { return static_cast<std::size_t>(params.word_emb.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(params.word_emb.cols()); }
  std::size_t hidden() const { return static_cast<std::size_t>(params.enc_w1.rows()); }
};

// ---------------------------------------------------------------------------
// Numerics

namespace detail {

inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

inline double logistic(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

template <class Derived>
double log_sum_exp(const Eigen::DenseBase<Derived>& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.derived().array() - m).exp().sum());
}

inline void fill_normal(Eigen::MatrixXd& m, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, stddev);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = n(rng);
}

}  // namespace detail

inline Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double lse = detail::log_sum_exp(logits);
  return (logits.array() - lse).exp().matrix();
}

// Baseline topic-word distribution: softmax over v of E_V(v) . topic_vec.
inline Eigen::VectorXd etm_word_dist(const Eigen::MatrixXd& word_emb, const Eigen::VectorXd& topic_vec) {
  return softmax(word_emb * topic_vec);
}

// Modified distribution: exp(E_V(v) . topic_vec) G0(v), normalized.
inline Eigen::VectorXd modified_word_dist(const Eigen::MatrixXd& word_emb, const Eigen::VectorXd& topic_vec,
                                          std::span<const double> g0) {
  if (g0.size() != static_cast<std::size_t>(word_emb.rows())) throw ConfigError("G0 length does not match vocabulary");
  Eigen::VectorXd logits = word_emb * topic_vec;
  for (Eigen::Index v = 0; v < logits.size(); ++v) logits(v) += std::log(g0[static_cast<std::size_t>(v)]);
  return softmax(logits);
}

// ---------------------------------------------------------------------------
// Topic side

struct TopicForward {
  Eigen::MatrixXd pre;        // H x T, topic-network hidden pre-activation (modified)
  Eigen::MatrixXd act;        // H x T, its activation
  Eigen::MatrixXd topic_emb;  // T x H
  Eigen::MatrixXd log_beta;   // T x V
};

// Row j is NN2(centre j): linear(H<-R) -> activation -> linear(H<-H).
inline Eigen::MatrixXd topic_embedding_modified(const ModelParams& p, const Eigen::MatrixXd& centres,
                                                Activation act, Eigen::MatrixXd* pre_out = nullptr,
                                                Eigen::MatrixXd* act_out = nullptr) {
  if (centres.rows() != p.xi_w1.cols())
    throw ConfigError("centre dimension " + std::to_string(centres.rows()) + " does not match topic network input " +
                      std::to_string(p.xi_w1.cols()));
  Eigen::MatrixXd pre = (p.xi_w1 * centres).colwise() + p.xi_b1.col(0);
  Eigen::MatrixXd a = act == Activation::tanh ? Eigen::MatrixXd(pre.array().tanh()) : pre;
  Eigen::MatrixXd out = (p.xi_w2 * a).colwise() + p.xi_b2.col(0);
  if (pre_out) *pre_out = std::move(pre);
  if (act_out) *act_out = std::move(a);
  return out.transpose();
}

inline TopicForward topic_forward(const Model& model) {
  TopicForward f;
  if (model.kind() == ModelKind::etm) {
    f.topic_emb = model.params.topic_emb;
  } else {
    f.topic_emb = topic_embedding_modified(model.params, model.centres, model.config.topic_activation, &f.pre, &f.act);
  }
  f.log_beta = f.topic_emb * model.params.word_emb.transpose();
  if (model.kind() == ModelKind::modified) f.log_beta.rowwise() += model.log_g0;
  for (Eigen::Index t = 0; t < f.log_beta.rows(); ++t) {
    const double lse = detail::log_sum_exp(f.log_beta.row(t));
    f.log_beta.row(t).array() -= lse;
  }
  return f;
}

// T x V matrix of p(v | t) for the model's variant.
inline Eigen::MatrixXd topic_word_matrix(const Model& model) { return topic_forward(model).log_beta.array().exp(); }

inline Eigen::VectorXd topic_word_dist(const Model& model, std::size_t t) {
  if (t >= model.num_topics()) throw ConfigError("topic index out of range");
  return topic_word_matrix(model).row(static_cast<Eigen::Index>(t)).transpose();
}

// ---------------------------------------------------------------------------
// Encoder and prior

struct VariationalStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd log_std;
};

namespace detail {

// V x B sparse matrix of L1-normalized counts, one column per document.
inline Eigen::SparseMatrix<double> normalized_bow(const Corpus& corpus, std::span<const std::size_t> docs) {
  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t b = 0; b < docs.size(); ++b) {
    const auto& doc = corpus.documents.at(docs[b]);
    const double len = static_cast<double>(doc.length());
    for (const auto& wc : doc.counts())
      entries.emplace_back(wc.id, static_cast<int>(b), static_cast<double>(wc.count) / len);
  }
  Eigen::SparseMatrix<double> x(static_cast<Eigen::Index>(corpus.vocab_size()), static_cast<Eigen::Index>(docs.size()));
  x.setFromTriplets(entries.begin(), entries.end());
  return x;
}

struct EncoderForward {
  Eigen::MatrixXd a1, h1, a2, h2, mean, log_std;
};

inline EncoderForward encoder_forward(const ModelParams& p, const Eigen::SparseMatrix<double>& x) {
  EncoderForward f;
  f.a1 = p.enc_w1 * x;
  f.a1.colwise() += p.enc_b1.col(0);
  f.h1 = f.a1.unaryExpr([](double v) { return softplus(v); });
  f.a2 = p.enc_w2 * f.h1;
  f.a2.colwise() += p.enc_b2.col(0);
  f.h2 = f.a2.unaryExpr([](double v) { return softplus(v); });
  f.mean = p.enc_wm * f.h2;
  f.mean.colwise() += p.enc_bm.col(0);
  f.log_std = p.enc_ws * f.h2;
  f.log_std.colwise() += p.enc_bs.col(0);
  return f;
}

}  // namespace detail

inline VariationalStats encode(const Model& model, const Corpus& corpus, std::size_t doc) {
  const std::size_t idx[] = {doc};
  auto f = detail::encoder_forward(model.params, detail::normalized_bow(corpus, idx));
  return {f.mean.col(0), f.log_std.col(0)};
}

// Mean of the document's prior: 0 for the baseline, lambda_d e_{n(d)} for the
// modified model.
inline Eigen::VectorXd prior_mean(const Model& model, std::size_t doc) {
  Eigen::VectorXd m0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.num_topics()));
  if (model.kind() == ModelKind::modified) {
    m0(model.cluster_of_doc.at(doc)) = std::exp(model.params.log_lambda(static_cast<Eigen::Index>(doc), 0));
  }
  return m0;
}

// KL( N(m, diag(s)^2) || N(m0, I) ) = 1/2 (|s|^2 + |m - m0|^2 - T) - sum log s.
inline double kl_to_prior(const VariationalStats& q, const Eigen::VectorXd& m0) {
  if (q.mean.size() != m0.size() || q.log_std.size() != m0.size()) throw ConfigError("KL dimension mismatch");
  const double s2 = (2.0 * q.log_std.array()).exp().sum();
  return 0.5 * (s2 + (q.mean - m0).squaredNorm() - static_cast<double>(m0.size())) - q.log_std.sum();
}

// sum_i log sum_t p(w_i | t) softmax(x)_t, in log-space.
inline double doc_log_likelihood(const Eigen::MatrixXd& log_beta, const Document& doc, const Eigen::VectorXd& x) {
  const Eigen::VectorXd log_theta = x.array() - detail::log_sum_exp(x);
  double ll = 0.0;
  for (const auto& wc : doc.counts()) ll += wc.count * detail::log_sum_exp(log_theta + log_beta.col(wc.id));
  return ll;
}

inline Eigen::VectorXd infer_doc_topics(const Model& model, const Corpus& corpus, std::size_t doc) {
  return softmax(encode(model, corpus, doc).mean);
}

// ---------------------------------------------------------------------------
// ELBO

// Standard normal draws, column b for the b-th document of the batch.
inline Eigen::MatrixXd sample_noise(std::size_t topics, std::size_t batch, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd eps(static_cast<Eigen::Index>(topics), static_cast<Eigen::Index>(batch));
  detail::fill_normal(eps, 1.0, rng);
  return eps;
}

struct BatchTerms {
  Eigen::VectorXd elbo;            // per document
  Eigen::VectorXd log_likelihood;  // at the sampled x
  Eigen::VectorXd kl;
  double total() const { return elbo.sum(); }
};

// Single-sample estimate sum_d [log p(w_d | m_d + s_d * eps_d) - kl_weight KL_d].
// When grad is non-null it receives the gradient of that sum (zeroed first,
// same block shapes as the parameters; E_V stays zero when frozen).
inline BatchTerms evaluate_batch(const Model& model, const Corpus& corpus, std::span<const std::size_t> docs,
                                 const Eigen::MatrixXd& noise, ModelParams* grad, double kl_weight = 1.0) {
  const auto& p = model.params;
  const auto T = static_cast<Eigen::Index>(model.num_topics());
  const auto B = static_cast<Eigen::Index>(docs.size());
  if (noise.rows() != T || noise.cols() != B) throw ConfigError("noise matrix must be T x batch");
  if (corpus.vocab_size() != model.vocab_size()) throw ConfigError("corpus vocabulary does not match the model");

  const TopicForward topic = topic_forward(model);
  const Eigen::SparseMatrix<double> x_in = detail::normalized_bow(corpus, docs);
  const detail::EncoderForward enc = detail::encoder_forward(p, x_in);

  const Eigen::MatrixXd std_dev = enc.log_std.array().exp();
  const Eigen::MatrixXd x = enc.mean + std_dev.cwiseProduct(noise);
  Eigen::MatrixXd log_theta(T, B);
  for (Eigen::Index b = 0; b < B; ++b) log_theta.col(b) = x.col(b).array() - detail::log_sum_exp(x.col(b));

  Eigen::MatrixXd prior(T, B);
  for (Eigen::Index b = 0; b < B; ++b) prior.col(b) = prior_mean(model, docs[static_cast<std::size_t>(b)]);

  BatchTerms out{Eigen::VectorXd(B), Eigen::VectorXd(B), Eigen::VectorXd(B)};
  Eigen::MatrixXd g_log_theta, g_beta;  // d LL / d log theta (T x B), sum_d c r (T x V)
  if (grad) {
    g_log_theta = Eigen::MatrixXd::Zero(T, B);
    g_beta = Eigen::MatrixXd::Zero(T, static_cast<Eigen::Index>(model.vocab_size()));
  }
  Eigen::VectorXd joint(T);
  for (Eigen::Index b = 0; b < B; ++b) {
    const auto& doc = corpus.documents[docs[static_cast<std::size_t>(b)]];
    double ll = 0.0;
    for (const auto& wc : doc.counts()) {
      joint = log_theta.col(b) + topic.log_beta.col(wc.id);
      const double lq = detail::log_sum_exp(joint);
      ll += wc.count * lq;
      if (grad) {
        // c * posterior responsibility of each topic for this word
        const Eigen::VectorXd r = wc.count * (joint.array() - lq).exp();
        g_log_theta.col(b) += r;
        g_beta.col(wc.id) += r;
      }
    }
    const double kl = 0.5 * ((2.0 * enc.log_std.col(b).array()).exp().sum() +
                             (enc.mean.col(b) - prior.col(b)).squaredNorm() - static_cast<double>(T)) -
                      enc.log_std.col(b).sum();
    out.log_likelihood(b) = ll;
    out.kl(b) = kl;
    out.elbo(b) = ll - kl_weight * kl;
  }
  if (!grad) return out;

  *grad = p.zeros_like();
  auto& g = *grad;

  // Through log theta = x - lse(x): dx = g - theta * sum(g), and sum(g) = length.
  Eigen::MatrixXd dx(T, B);
  for (Eigen::Index b = 0; b < B; ++b) {
    const double len = static_cast<double>(corpus.documents[docs[static_cast<std::size_t>(b)]].length());
    dx.col(b) = g_log_theta.col(b) - len * log_theta.col(b).array().exp().matrix();
  }
  const Eigen::MatrixXd d_mean = dx - kl_weight * (enc.mean - prior);
  const Eigen::MatrixXd d_log_std =
      dx.cwiseProduct(noise).cwiseProduct(std_dev) - kl_weight * (std_dev.array().square() - 1.0).matrix();

  if (model.kind() == ModelKind::modified) {
    for (Eigen::Index b = 0; b < B; ++b) {
      const auto d = static_cast<Eigen::Index>(docs[static_cast<std::size_t>(b)]);
      const auto n = model.cluster_of_doc[static_cast<std::size_t>(d)];
      const double lambda = prior(n, b);
      g.log_lambda(d, 0) += kl_weight * (enc.mean(n, b) - lambda) * lambda;
    }
  }

  // Encoder backward.
  g.enc_wm = d_mean * enc.h2.transpose();
  g.enc_bm = d_mean.rowwise().sum();
  g.enc_ws = d_log_std * enc.h2.transpose();
  g.enc_bs = d_log_std.rowwise().sum();
  Eigen::MatrixXd d_h2 = p.enc_wm.transpose() * d_mean + p.enc_ws.transpose() * d_log_std;
  Eigen::MatrixXd d_a2 = d_h2.cwiseProduct(enc.a2.unaryExpr([](double v) { return detail::logistic(v); }));
  g.enc_w2 = d_a2 * enc.h1.transpose();
  g.enc_b2 = d_a2.rowwise().sum();
  Eigen::MatrixXd d_h1 = p.enc_w2.transpose() * d_a2;
  Eigen::MatrixXd d_a1 = d_h1.cwiseProduct(enc.a1.unaryExpr([](double v) { return detail::logistic(v); }));
  g.enc_w1 = d_a1 * x_in.transpose();
  g.enc_b1 = d_a1.rowwise().sum();

  // Through log beta_t = l_t - lse(l_t): dl = G - beta * rowsum(G).
  const Eigen::MatrixXd beta = topic.log_beta.array().exp();
  const Eigen::VectorXd g_rows = g_beta.rowwise().sum();
  const Eigen::MatrixXd d_logits = g_beta - beta.cwiseProduct(g_rows.replicate(1, beta.cols()));

  if (!model.freeze_word_emb) g.word_emb = d_logits.transpose() * topic.topic_emb;
  const Eigen::MatrixXd d_topic = d_logits * p.word_emb;  // T x H
  if (model.kind() == ModelKind::etm) {
    g.topic_emb = d_topic;
  } else {
    const Eigen::MatrixXd d_out = d_topic.transpose();  // H x T
    g.xi_w2 = d_out * topic.act.transpose();
    g.xi_b2 = d_out.rowwise().sum();
    Eigen::MatrixXd d_pre = p.xi_w2.transpose() * d_out;
    if (model.config.topic_activation == Activation::tanh)
      d_pre = d_pre.cwiseProduct((1.0 - topic.act.array().square()).matrix());
    g.xi_w1 = d_pre * model.centres.transpose();
    g.xi_b1 = d_pre.rowwise().sum();
  }
  return out;
}

inline double elbo_minibatch(const Model& model, const Corpus& corpus, std::span<const std::size_t> docs,
                             std::uint64_t seed) {
  return evaluate_batch(model, corpus, docs, sample_noise(model.num_topics(), docs.size(), seed), nullptr).total();
}

inline ModelParams grad_elbo(const Model& model, const Corpus& corpus, std::span<const std::size_t> docs,
                             std::uint64_t seed) {
  ModelParams g;
  evaluate_batch(model, corpus, docs, sample_noise(model.num_topics(), docs.size(), seed), &g);
  return g;
}

// ---------------------------------------------------------------------------
// Construction

// Weights ~ N(0, init_std^2), biases zero, lambda = 1. Pretrained embeddings
// replace the random E_V when given.
inline Model make_model(const ModelConfig& config, const Corpus& corpus, const ClusterModel* clusters,
                        const EmbeddingMatrix* pretrained, bool freeze_word_emb, std::uint64_t seed) {
  if (config.num_topics == 0 || config.dim == 0 || config.hidden == 0)
    throw ConfigError("topics, embedding dimension and hidden width must be positive");
  const auto V = static_cast<Eigen::Index>(corpus.vocab_size());
  const auto T = static_cast<Eigen::Index>(config.num_topics);
  const auto H = static_cast<Eigen::Index>(config.dim);
  const auto W = static_cast<Eigen::Index>(config.hidden);
  Model m;
  m.config = config;
  m.freeze_word_emb = freeze_word_emb;
  std::mt19937_64 rng(seed);
  auto normal = [&](Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd x(r, c);
    detail::fill_normal(x, config.init_std, rng);
    return x;
  };
  auto& p = m.params;
  if (pretrained) {
    if (pretrained->size() != corpus.vocab_size() || pretrained->dim() != config.dim)
      throw ConfigError("pretrained embeddings are " + std::to_string(pretrained->size()) + "x" +
                        std::to_string(pretrained->dim()) + ", expected " + std::to_string(V) + "x" +
                        std::to_string(H));
    p.word_emb = pretrained->rows;
  } else {
    if (freeze_word_emb) throw ConfigError("freezing word embeddings requires pretrained embeddings");
    p.word_emb = normal(V, H);
  }
  if (config.kind == ModelKind::etm) {
    p.topic_emb = normal(T, H);
  } else {
    if (!clusters) throw ConfigError("the modified model needs a cluster model");
    if (clusters->k() != config.num_topics)
      throw ConfigError("cluster model has " + std::to_string(clusters->k()) + " centres but the model has " +
                        std::to_string(T) + " topics");
    if (clusters->assignment.size() != corpus.num_docs())
      throw ConfigError("cluster assignment covers " + std::to_string(clusters->assignment.size()) +
                        " documents but the corpus has " + std::to_string(corpus.num_docs()));
    const auto R = static_cast<Eigen::Index>(clusters->dim());
    m.centres = clusters->centres.transpose();
    m.cluster_of_doc = clusters->assignment;
    m.log_g0.resize(V);
    for (Eigen::Index v = 0; v < V; ++v) m.log_g0(v) = std::log(corpus.g0[static_cast<std::size_t>(v)]);
    p.xi_w1 = normal(H, R);
    p.xi_b1 = Eigen::MatrixXd::Zero(H, 1);
    p.xi_w2 = normal(H, H);
    p.xi_b2 = Eigen::MatrixXd::Zero(H, 1);
    p.log_lambda = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(corpus.num_docs()), 1);
  }
  p.enc_w1 = normal(W, V);
  p.enc_b1 = Eigen::MatrixXd::Zero(W, 1);
  p.enc_w2 = normal(W, W);
  p.enc_b2 = Eigen::MatrixXd::Zero(W, 1);
  p.enc_wm = normal(T, W);
  p.enc_bm = Eigen::MatrixXd::Zero(T, 1);
  p.enc_ws = normal(T, W);
  p.enc_bs = Eigen::MatrixXd::Zero(T, 1);
  return m;
}

// ---------------------------------------------------------------------------
// Top words

struct WordProb {
  WordId id;
  double prob;
};

// The n most probable words, descending; ties go to the smaller id.
inline std::vector<WordProb> top_words(const Eigen::VectorXd& dist, std::size_t n) {
  std::vector<WordProb> all;
  all.reserve(static_cast<std::size_t>(dist.size()));
  for (Eigen::Index v = 0; v < dist.size(); ++v) all.push_back({static_cast<WordId>(v), dist(v)});
  n = std::min(n, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(),
                    [](const WordProb& a, const WordProb& b) { return a.prob > b.prob || (a.prob == b.prob && a.id < b.id); });
  all.resize(n);
  return all;
}

}  // namespace cetm
