#pragma once

// Stochastic ELBO ascent for the neural models, plus the driver that trains
// and scores several model variants on one corpus.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cetm/checkpoint.hpp"
#include "cetm/cluster.hpp"
#include "cetm/corpus.hpp"
#include "cetm/error.hpp"
#include "cetm/io.hpp"
#include "cetm/lda.hpp"
#include "cetm/metrics.hpp"
#include "cetm/model.hpp"
#include "cetm/optim.hpp"
#include "cetm/sgns.hpp"

namespace cetm {

struct TrainConfig {
  ModelConfig model;
  int epochs = 100;
  std::size_t batch_size = 512;
  double learning_rate = 2e-3;
  OptimizerKind optimizer = OptimizerKind::adam;
  double weight_decay = 1.2e-6;
  double clip_norm = 5.0;
  int kl_anneal_epochs = 0;  // 0: full KL weight from the start
  std::uint64_t seed = 1;
  std::optional<bool> freeze_word_emb;  // unset: freeze iff pretrained
  std::string pretrained_path;

  void validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(learning_rate > 0)) throw ConfigError("learning_rate must be > 0");
    if (weight_decay < 0) throw ConfigError("weight_decay must be >= 0");
    if (kl_anneal_epochs < 0) throw ConfigError("kl_anneal_epochs must be >= 0");
  }

  // Small corpora get at least four steps per epoch.
  std::size_t effective_batch(std::size_t num_docs) const {
    if (num_docs >= 4 * batch_size) return batch_size;
    return std::max<std::size_t>(1, (num_docs + 3) / 4);
  }
};

inline json train_config_to_json(const TrainConfig& c) {
  json j{{"model", to_string(c.model.kind)},
         {"topics", c.model.num_topics},
         {"dim", c.model.dim},
         {"hidden", c.model.hidden},
         {"init_std", c.model.init_std},
         {"epochs", c.epochs},
         {"batch_size", c.batch_size},
         {"learning_rate", c.learning_rate},
         {"optimizer", to_string(c.optimizer)},
         {"weight_decay", c.weight_decay},
         {"clip_norm", c.clip_norm},
         {"kl_anneal_epochs", c.kl_anneal_epochs},
         {"seed", c.seed},
         {"pretrained", c.pretrained_path}};
  if (c.freeze_word_emb) j["freeze_word_emb"] = *c.freeze_word_emb;
  return j;
}

// Unknown keys are rejected so typos do not silently fall back to defaults.
inline TrainConfig train_config_from_json(const json& j, TrainConfig c = {}) {
  if (!j.is_object()) throw ConfigError("training config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "model") c.model.kind = parse_model_kind(v.get<std::string>());
      else if (key == "topics") c.model.num_topics = v.get<std::size_t>();
      else if (key == "dim") c.model.dim = v.get<std::size_t>();
      else if (key == "hidden") c.model.hidden = v.get<std::size_t>();
      else if (key == "init_std") c.model.init_std = v.get<double>();
      else if (key == "epochs") c.epochs = v.get<int>();
      else if (key == "batch_size") c.batch_size = v.get<std::size_t>();
      else if (key == "learning_rate") c.learning_rate = v.get<double>();
      else if (key == "optimizer") c.optimizer = parse_optimizer_kind(v.get<std::string>());
      else if (key == "weight_decay") c.weight_decay = v.get<double>();
      else if (key == "clip_norm") c.clip_norm = v.get<double>();
      else if (key == "kl_anneal_epochs") c.kl_anneal_epochs = v.get<int>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "freeze_word_emb") c.freeze_word_emb = v.get<bool>();
      else if (key == "pretrained") c.pretrained_path = v.get<std::string>();
      else throw ConfigError("unknown training config key \"" + key + "\"");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("training config has a value of the wrong type: ") + e.what());
  }
  return c;
}

struct TrainReport {
  std::vector<double> epoch_elbo;  // mean per document
  std::vector<double> epoch_log_likelihood;
  std::vector<double> epoch_kl;
  double wall_seconds = 0.0;
  std::size_t steps = 0;
  std::size_t batch_size = 0;
  std::size_t clipped_steps = 0;
  std::vector<std::string> warnings;
  std::string checkpoint_path;
};

// Timing is left out so the file is reproducible; it goes in the run manifest.
inline json train_report_to_json(const TrainReport& r) {
  return json{{"epoch_elbo", r.epoch_elbo},
              {"epoch_log_likelihood", r.epoch_log_likelihood},
              {"epoch_kl", r.epoch_kl},
              {"steps", r.steps},
              {"batch_size", r.batch_size},
              {"clipped_steps", r.clipped_steps},
              {"warnings", r.warnings},
              {"checkpoint", r.checkpoint_path}};
}

struct FitResult {
  Model model;
  TrainReport report;
};

namespace detail {

inline void require_finite(const ModelParams& grad, int epoch, std::size_t step) {
  grad.for_each_block([&](std::string_view name, const Eigen::MatrixXd& g) {
    if (!g.allFinite())
      throw NumericError("non-finite gradient in parameter block " + std::string(name) + " (" +
                         std::string(block_group(name)) + ") at epoch " + std::to_string(epoch + 1) + ", step " +
                         std::to_string(step));
  });
}

}  // namespace detail

inline FitResult fit(const Corpus& corpus, const ClusterModel* clusters, const EmbeddingMatrix* pretrained,
                     const TrainConfig& config) {
  config.validate();
  if (config.model.kind == ModelKind::modified && !clusters)
    throw ConfigError("the modified model requires a cluster model");
  const bool freeze = config.freeze_word_emb.value_or(pretrained != nullptr);

  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(config.seed);
  FitResult out{make_model(config.model, corpus, clusters, pretrained, freeze, rng()), {}};
  Model& model = out.model;
  TrainReport& report = out.report;

  Optimizer opt({config.optimizer, config.learning_rate, 0.9, 0.999, 1e-8, config.weight_decay});
  const std::size_t D = corpus.num_docs();
  const std::size_t B = config.effective_batch(D);
  report.batch_size = B;
  if (B != config.batch_size)
    report.warnings.push_back("batch size reduced from " + std::to_string(config.batch_size) + " to " +
                              std::to_string(B) + " for a corpus of " + std::to_string(D) + " documents");

  std::vector<std::size_t> order(D);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto skip = [&](std::string_view name) { return freeze && name == "word_emb"; };
  ModelParams grad;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double kl_weight =
        config.kl_anneal_epochs > 0 ? std::min(1.0, (epoch + 1.0) / config.kl_anneal_epochs) : 1.0;
    double elbo = 0.0, ll = 0.0, kl = 0.0;
    for (std::size_t begin = 0; begin < D; begin += B) {
      const std::size_t end = std::min(D, begin + B);
      const std::span<const std::size_t> batch(order.data() + begin, end - begin);
      const auto noise = sample_noise(model.num_topics(), batch.size(), rng());
      const auto terms = evaluate_batch(model, corpus, batch, noise, &grad, kl_weight);
      if (!std::isfinite(terms.total()))
        throw NumericError("non-finite ELBO at epoch " + std::to_string(epoch + 1) + ", step " +
                           std::to_string(report.steps + 1));
      detail::require_finite(grad, epoch, report.steps + 1);
      // Minimize the negative mean ELBO of the batch.
      const double scale = -1.0 / static_cast<double>(batch.size());
      grad.for_each_block([&](std::string_view, Eigen::MatrixXd& g) { g *= scale; });
      if (clip_global_norm(grad, config.clip_norm)) ++report.clipped_steps;
      opt.step(model.params, grad, skip);
      ++report.steps;
      ll += terms.log_likelihood.sum();
      kl += terms.kl.sum();
      elbo += terms.log_likelihood.sum() - terms.kl.sum();
    }
    if (!model.params.all_finite())
      throw NumericError("parameters became non-finite at epoch " + std::to_string(epoch + 1));
    report.epoch_elbo.push_back(elbo / static_cast<double>(D));
    report.epoch_log_likelihood.push_back(ll / static_cast<double>(D));
    report.epoch_kl.push_back(kl / static_cast<double>(D));
  }
  if (report.clipped_steps > 0)
    report.warnings.push_back("gradient clipped at norm " + format_double(config.clip_norm) + " on " +
                              std::to_string(report.clipped_steps) + " of " + std::to_string(report.steps) + " steps");
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

// ---------------------------------------------------------------------------
// Experiment driver

struct VariantSpec {
  std::string label;    // e.g. "modified+pretrain"
  std::string kind;     // "lda", "etm" or "modified"
  bool pretrained = false;
};

// LDA, ETM and the modified model, each neural one with and without
// pretrained word embeddings.
inline std::vector<VariantSpec> five_model_matrix() {
  return {{"lda", "lda", false},
          {"etm", "etm", false},
          {"etm+pretrain", "etm", true},
          {"modified", "modified", false},
          {"modified+pretrain", "modified", true}};
}

struct ExperimentConfig {
  std::vector<VariantSpec> variants = five_model_matrix();
  TrainConfig train;
  LdaConfig lda;
  SgnsConfig sgns;
  KMeansOptions kmeans;
  std::size_t top_n = 10;
  std::filesystem::path out_dir = "experiment";
};

struct ExperimentRow {
  VariantSpec variant;
  MetricsReport metrics;
  std::string checkpoint_path;
  std::string checkpoint_sha256;
};

inline json experiment_to_json(const std::vector<ExperimentRow>& rows) {
  json out = json::array();
  for (const auto& r : rows)
    out.push_back({{"label", r.variant.label},
                   {"kind", r.variant.kind},
                   {"pretrained", r.variant.pretrained},
                   {"tc", r.metrics.tc},
                   {"wswf", r.metrics.wswf},
                   {"per_topic_tc", r.metrics.per_topic_tc},
                   {"per_topic_wswf", r.metrics.per_topic_wswf},
                   {"checkpoint", r.checkpoint_path},
                   {"checkpoint_sha256", r.checkpoint_sha256}});
  return json{{"rows", std::move(out)}};
}

// Trains and scores every requested variant. Embeddings are pretrained once
// when any variant needs them; the modified variants cluster on mean
// embeddings when pretrained and on TF-IDF otherwise.
inline std::vector<ExperimentRow> run_experiment(const Corpus& corpus, const ExperimentConfig& cfg) {
  const std::size_t T = cfg.train.model.num_topics;
  std::optional<EmbeddingMatrix> emb;
  std::optional<ClusterModel> clusters_plain, clusters_emb;
  std::vector<ExperimentRow> rows;
  KMeansOptions km = cfg.kmeans;
  km.k = T;
  for (const auto& v : cfg.variants) {
    if (v.kind != "lda" && v.kind != "etm" && v.kind != "modified")
      throw ConfigError("unknown variant kind \"" + v.kind + "\"");
    if (v.pretrained && v.kind == "lda") throw ConfigError("LDA has no word embeddings to pretrain");
    if (v.pretrained && !emb) emb = pretrain_sgns(corpus, cfg.train.model.dim, cfg.sgns, cfg.train.seed).embeddings;

    Checkpoint ckpt;
    ckpt.kind = v.kind;
    ckpt.vocab = corpus.vocabulary.words();
    ckpt.seed = cfg.train.seed;
    if (v.kind == "lda") {
      LdaConfig lc = cfg.lda;
      lc.num_topics = T;
      lc.seed = cfg.train.seed;
      const auto lda = fit_lda(corpus, lc);
      ckpt.lda_phi = lda.topic_word();
      ckpt.lda_alpha = lc.resolved_alpha();
      ckpt.lda_beta = lc.beta;
      ckpt.lda_sweeps = lc.sweeps;
    } else {
      TrainConfig tc = cfg.train;
      tc.model.kind = parse_model_kind(v.kind);
      const ClusterModel* cl = nullptr;
      if (tc.model.kind == ModelKind::modified) {
        auto& slot = v.pretrained ? clusters_emb : clusters_plain;
        if (!slot) slot = cluster_documents(vectorize_documents(corpus, v.pretrained ? &*emb : nullptr), km);
        cl = &*slot;
        ckpt.cluster_hash = sha256_hex(cluster_to_json(*cl).dump());
      }
      auto result = fit(corpus, cl, v.pretrained ? &*emb : nullptr, tc);
      ckpt.model = std::move(result.model);
    }
    ExperimentRow row{v, {}, (cfg.out_dir / (v.label + ".ckpt")).string(), {}};
    const std::string bytes = serialize_checkpoint(ckpt);
    atomic_write(row.checkpoint_path, bytes);
    row.checkpoint_sha256 = sha256_hex(bytes);
    row.metrics = evaluate_topics(corpus, topic_table_from_matrix(ckpt.topic_word(), corpus.vocabulary, cfg.top_n),
                                  cfg.top_n, v.label);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace cetm
