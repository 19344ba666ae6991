// Command-line front end: preprocess -> pretrain -> cluster -> train -> eval
// -> topics / plot, plus a driver that runs the multi-model comparison.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cetm/cetm.hpp"

namespace fs = std::filesystem;
using namespace cetm;

namespace {

#ifdef CETM_DATA_DIR
const fs::path kDefaultStopwords = fs::path(CETM_DATA_DIR) / "stopwords" / "pronouns_prepositions.txt";
#else
const fs::path kDefaultStopwords;
#endif

void require_file(const std::string& flag, const std::string& path) {
  if (!fs::exists(path)) throw ConfigError(flag + " " + path + " does not exist");
}

// --- preprocess -------------------------------------------------------------

struct PreprocessArgs {
  std::string input, out, lemmas;
  std::vector<std::string> stopwords;
  bool no_default_stopwords = false;
  std::size_t min_freq = 5;
};

void cmd_preprocess(const PreprocessArgs& a) {
  require_file("--input", a.input);
  PreprocessOptions opt;
  opt.min_freq = a.min_freq;
  RunManifest man{"preprocess"};
  man.add_input(a.input);
  std::vector<std::string> lists = a.stopwords;
  if (!a.no_default_stopwords && !kDefaultStopwords.empty()) lists.insert(lists.begin(), kDefaultStopwords.string());
  for (const auto& s : lists) {
    require_file("--stopwords", s);
    auto words = load_word_list(s);
    opt.stopwords.insert(words.begin(), words.end());
    man.add_input(s);
  }
  if (!a.lemmas.empty()) {
    require_file("--lemmas", a.lemmas);
    opt.lemmas = load_lemma_dictionary(a.lemmas);
    man.add_input(a.lemmas);
  }
  const auto raw = read_raw_documents(a.input);
  const auto result = preprocess(raw, opt);
  save_corpus(result.corpus, a.out);
  man.config = {{"min_freq", a.min_freq}, {"stopword_lists", lists}, {"lemmas", a.lemmas}};
  man.outputs = {a.out};
  man.timing = {{"dropped_documents", result.dropped_documents}};
  write_manifests(man);
  const auto& c = result.corpus;
  std::printf("documents=%zu vocabulary=%zu tokens=%zu avg_length=%.1f dropped=%zu\n", c.num_docs(), c.vocab_size(),
              c.total_tokens(), static_cast<double>(c.total_tokens()) / static_cast<double>(c.num_docs()),
              result.dropped_documents);
  for (const auto& o : result.dropped_origins) std::fprintf(stderr, "dropped empty document: %s\n", o.c_str());
}

// --- pretrain ---------------------------------------------------------------

struct PretrainArgs {
  std::string corpus, out;
  std::size_t dim = 200;
  std::uint64_t seed = 1;
  SgnsConfig sgns;
};

void cmd_pretrain(const PretrainArgs& a) {
  require_file("--corpus", a.corpus);
  const auto corpus = load_corpus(a.corpus);
  const auto result = pretrain_sgns(corpus, a.dim, a.sgns, a.seed);
  save_embeddings(result.embeddings, corpus.vocabulary, a.out);
  RunManifest man{"pretrain"};
  man.add_input(a.corpus);
  man.seed = a.seed;
  man.config = {{"dim", a.dim},
                {"window", a.sgns.window},
                {"negatives", a.sgns.negatives},
                {"subsample", a.sgns.subsample},
                {"epochs", a.sgns.epochs},
                {"learning_rate", a.sgns.learning_rate},
                {"epoch_mean_loss", result.epoch_mean_loss}};
  man.outputs = {a.out};
  write_manifests(man);
  std::printf("vocabulary=%zu dim=%zu final_loss=%.6f\n", result.embeddings.size(), result.embeddings.dim(),
              result.epoch_mean_loss.empty() ? 0.0 : result.epoch_mean_loss.back());
}

// --- cluster ----------------------------------------------------------------

struct ClusterArgs {
  std::string corpus, embeddings, out;
  KMeansOptions km;
};

void cmd_cluster(const ClusterArgs& a) {
  require_file("--corpus", a.corpus);
  const auto corpus = load_corpus(a.corpus);
  RunManifest man{"cluster"};
  man.add_input(a.corpus);
  std::optional<EmbeddingMatrix> emb;
  if (!a.embeddings.empty()) {
    require_file("--embeddings", a.embeddings);
    emb = align_embeddings(load_embeddings(a.embeddings), corpus.vocabulary);
    man.add_input(a.embeddings);
  }
  const auto model = cluster_documents(vectorize_documents(corpus, emb ? &*emb : nullptr), a.km);
  save_clusters(model, a.out);
  man.seed = a.km.seed;
  man.config = {{"k", a.km.k},
                {"restarts", a.km.restarts},
                {"max_iter", a.km.max_iter},
                {"representation", model.representation}};
  man.timing = {{"empty_cluster_reseeds", model.reseeds}};
  man.outputs = {a.out};
  write_manifests(man);
  if (model.reseeds > 0) std::fprintf(stderr, "re-seeded %zu empty clusters\n", model.reseeds);
  std::printf("k=%zu representation=%s inertia=%.6g\n", model.k(), model.representation.c_str(), model.inertia);
}

// --- train ------------------------------------------------------------------

struct TrainArgs {
  std::string corpus, model, pretrained, clusters, config, out, report;  // model: flag, else config, else modified
  std::optional<std::size_t> topics, dim, hidden, batch_size;
  std::optional<int> epochs, kl_anneal;
  std::optional<double> lr, weight_decay;
  std::optional<std::uint64_t> seed;
  std::optional<bool> freeze;
  // LDA
  std::optional<double> alpha;
  double beta = 0.01;
  int sweeps = 1000;
};

void cmd_train(TrainArgs a) {
  require_file("--corpus", a.corpus);
  if (!a.config.empty()) require_file("--config", a.config);
  if (a.model.empty()) {
    const json j = a.config.empty() ? json::object() : load_json(a.config);
    a.model = j.contains("model") && j["model"].is_string() ? j["model"].get<std::string>() : "modified";
  }
  if (a.model != "lda" && a.model != "etm" && a.model != "modified")
    throw ConfigError("--model must be lda, etm or modified");
  if (a.model == "modified" && a.clusters.empty()) throw ConfigError("--model modified requires --clusters");
  if (a.model == "lda" && !a.pretrained.empty()) throw ConfigError("--pretrained does not apply to --model lda");
  if (!a.clusters.empty()) require_file("--clusters", a.clusters);
  if (!a.pretrained.empty()) require_file("--pretrained", a.pretrained);
  if (!a.config.empty()) require_file("--config", a.config);

  TrainConfig cfg;
  if (!a.config.empty()) cfg = train_config_from_json(load_json(a.config));
  if (a.model != "lda") cfg.model.kind = parse_model_kind(a.model);
  if (a.topics) cfg.model.num_topics = *a.topics;
  if (a.dim) cfg.model.dim = *a.dim;
  if (a.hidden) cfg.model.hidden = *a.hidden;
  if (a.batch_size) cfg.batch_size = *a.batch_size;
  if (a.epochs) cfg.epochs = *a.epochs;
  if (a.kl_anneal) cfg.kl_anneal_epochs = *a.kl_anneal;
  if (a.lr) cfg.learning_rate = *a.lr;
  if (a.weight_decay) cfg.weight_decay = *a.weight_decay;
  if (a.seed) cfg.seed = *a.seed;
  if (a.freeze) cfg.freeze_word_emb = *a.freeze;
  if (!a.pretrained.empty()) cfg.pretrained_path = a.pretrained;

  const auto corpus = load_corpus(a.corpus);
  RunManifest man{"train"};
  man.add_input(a.corpus);
  man.seed = cfg.seed;

  Checkpoint ckpt;
  ckpt.kind = a.model;
  ckpt.vocab = corpus.vocabulary.words();
  ckpt.seed = cfg.seed;
  json report;
  if (a.model == "lda") {
    LdaConfig lc;
    lc.num_topics = cfg.model.num_topics;
    if (a.alpha) lc.alpha = *a.alpha;
    lc.beta = a.beta;
    lc.sweeps = a.sweeps;
    lc.seed = cfg.seed;
    const auto start = std::chrono::steady_clock::now();
    const auto lda = fit_lda(corpus, lc);
    ckpt.lda_phi = lda.topic_word();
    ckpt.lda_alpha = lc.resolved_alpha();
    ckpt.lda_beta = lc.beta;
    ckpt.lda_sweeps = lc.sweeps;
    man.config = {{"model", "lda"}, {"topics", lc.num_topics}, {"alpha", lc.resolved_alpha()}, {"beta", lc.beta}, {"sweeps", lc.sweeps}};
    man.timing = {{"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
    report = {{"sweeps", lda.sweeps_done()}, {"checkpoint", a.out}};
  } else {
    std::optional<EmbeddingMatrix> emb;
    if (!cfg.pretrained_path.empty()) {
      require_file("--pretrained", cfg.pretrained_path);
      auto loaded = load_embeddings(cfg.pretrained_path);
      if (!a.dim && !a.config.empty() && load_json(a.config).contains("dim") &&
          loaded.embeddings.dim() != cfg.model.dim)
        throw ConfigError("config dim does not match the pretrained embeddings");
      if (a.dim && loaded.embeddings.dim() != *a.dim) throw ConfigError("--dim does not match the pretrained embeddings");
      cfg.model.dim = loaded.embeddings.dim();
      emb = align_embeddings(loaded, corpus.vocabulary);
      man.add_input(cfg.pretrained_path);
    }
    std::optional<ClusterModel> clusters;
    if (cfg.model.kind == ModelKind::modified) {
      clusters = load_clusters(a.clusters);
      ckpt.cluster_hash = sha256_file(a.clusters);
      man.add_input(a.clusters);
    }
    auto result = fit(corpus, clusters ? &*clusters : nullptr, emb ? &*emb : nullptr, cfg);
    result.report.checkpoint_path = a.out;
    ckpt.model = std::move(result.model);
    man.config = train_config_to_json(cfg);
    man.timing = {{"wall_seconds", result.report.wall_seconds}};
    report = train_report_to_json(result.report);
    for (const auto& w : result.report.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    if (!result.report.epoch_elbo.empty())
      std::printf("epochs=%zu first_elbo=%.6f final_elbo=%.6f\n", result.report.epoch_elbo.size(),
                  result.report.epoch_elbo.front(), result.report.epoch_elbo.back());
  }
  const std::string report_path = a.report.empty() ? a.out + ".report.json" : a.report;
  save_checkpoint(ckpt, a.out);
  atomic_write(report_path, dump_json(report));
  man.outputs = {a.out, report_path};
  write_manifests(man);
}

// --- eval / topics ------------------------------------------------------------

struct EvalArgs {
  std::string corpus, checkpoint, topics_file, out, csv, label;
  std::size_t n = 10;
};

void cmd_eval(const EvalArgs& a) {
  require_file("--corpus", a.corpus);
  if (a.checkpoint.empty() == a.topics_file.empty())
    throw ConfigError("give exactly one of --checkpoint or --topics-file");
  const auto corpus = load_corpus(a.corpus);
  RunManifest man{"eval"};
  man.add_input(a.corpus);
  TopicTable table;
  std::string label = a.label;
  if (!a.checkpoint.empty()) {
    require_file("--checkpoint", a.checkpoint);
    const auto ckpt = load_checkpoint(a.checkpoint);
    if (ckpt.vocab != corpus.vocabulary.words())
      throw ConfigError("checkpoint vocabulary differs from the corpus vocabulary");
    table = topic_table_from_matrix(ckpt.topic_word(), corpus.vocabulary, a.n);
    if (label.empty()) label = ckpt.kind;
    man.add_input(a.checkpoint);
  } else {
    require_file("--topics-file", a.topics_file);
    table = topic_table_from_json(load_json(a.topics_file), a.topics_file);
    man.add_input(a.topics_file);
  }
  const auto report = evaluate_topics(corpus, table, a.n, label);
  atomic_write(a.out, dump_json(report_to_json(report)));
  man.outputs = {a.out};
  if (!a.csv.empty()) {
    atomic_write(a.csv, scatter_csv(per_topic_scatter(report)));
    man.outputs.push_back(a.csv);
  }
  man.config = {{"N", a.n}, {"label", label}};
  write_manifests(man);
  std::printf("topics=%zu N=%zu tc=%.6f wswf=%.6f\n", report.per_topic_tc.size(), a.n, report.tc, report.wswf);
}

struct TopicsArgs {
  std::string checkpoint, out;
  std::size_t n = 10;
};

void cmd_topics(const TopicsArgs& a) {
  require_file("--checkpoint", a.checkpoint);
  const auto ckpt = load_checkpoint(a.checkpoint);
  const Vocabulary vocab(ckpt.vocab);
  const auto table = topic_table_from_matrix(ckpt.topic_word(), vocab, a.n);
  for (std::size_t t = 0; t < table.topics.size(); ++t) {
    std::printf("topic %zu:", t);
    for (const auto& w : table.topics[t].words) std::printf(" %s", w.c_str());
    std::printf("\n");
  }
  if (!a.out.empty()) {
    atomic_write(a.out, dump_json(topic_table_to_json(table)));
    RunManifest man{"topics"};
    man.add_input(a.checkpoint);
    man.config = {{"N", a.n}};
    man.outputs = {a.out};
    write_manifests(man);
  }
}

// --- plot -------------------------------------------------------------------

struct PlotArgs {
  std::vector<std::string> reports, csv;
  std::string svg;
};

void cmd_plot(const PlotArgs& a) {
  if (a.reports.empty()) throw ConfigError("--report is required");
  if (a.csv.empty() && a.svg.empty()) throw ConfigError("give --csv and/or --svg");
  if (!a.csv.empty() && a.csv.size() != a.reports.size())
    throw ConfigError("give one --csv per --report");
  RunManifest man{"plot"};
  std::vector<ScatterSeries> series;
  for (const auto& r : a.reports) {
    require_file("--report", r);
    const auto report = report_from_json(load_json(r), r);
    series.push_back({report.label.empty() ? fs::path(r).stem().string() : report.label, per_topic_scatter(report)});
    man.add_input(r);
  }
  for (std::size_t i = 0; i < a.csv.size(); ++i) {
    atomic_write(a.csv[i], scatter_csv(series[i].points));
    man.outputs.push_back(a.csv[i]);
  }
  if (!a.svg.empty()) {
    atomic_write(a.svg, scatter_svg(series));
    man.outputs.push_back(a.svg);
  }
  write_manifests(man);
}

// --- experiment -------------------------------------------------------------

struct ExperimentArgs {
  std::string corpus, out_dir = "experiment", config;
  std::vector<std::string> variants;
  std::optional<std::size_t> topics, dim, hidden;
  std::optional<int> epochs, sweeps, sgns_epochs;
  std::optional<std::uint64_t> seed;
  std::size_t n = 10;
};

void cmd_experiment(const ExperimentArgs& a) {
  require_file("--corpus", a.corpus);
  ExperimentConfig cfg;
  if (!a.config.empty()) {
    require_file("--config", a.config);
    cfg.train = train_config_from_json(load_json(a.config));
  }
  if (a.topics) cfg.train.model.num_topics = *a.topics;
  if (a.dim) cfg.train.model.dim = *a.dim;
  if (a.hidden) cfg.train.model.hidden = *a.hidden;
  if (a.epochs) cfg.train.epochs = *a.epochs;
  if (a.seed) cfg.train.seed = *a.seed;
  if (a.sweeps) cfg.lda.sweeps = *a.sweeps;
  if (a.sgns_epochs) cfg.sgns.epochs = *a.sgns_epochs;
  cfg.top_n = a.n;
  cfg.out_dir = a.out_dir;
  if (!a.variants.empty()) {
    const auto all = five_model_matrix();
    cfg.variants.clear();
    for (const auto& v : a.variants) {
      auto it = std::find_if(all.begin(), all.end(), [&](const VariantSpec& s) { return s.label == v; });
      if (it == all.end()) throw ConfigError("unknown variant \"" + v + "\"");
      cfg.variants.push_back(*it);
    }
  }
  const auto corpus = load_corpus(a.corpus);
  const auto rows = run_experiment(corpus, cfg);
  const fs::path table = fs::path(a.out_dir) / "experiment.json";
  atomic_write(table, dump_json(experiment_to_json(rows)));
  RunManifest man{"experiment"};
  man.add_input(a.corpus);
  man.seed = cfg.train.seed;
  man.config = train_config_to_json(cfg.train);
  man.outputs = {table.string()};
  for (const auto& r : rows) {
    man.outputs.push_back(r.checkpoint_path);
    const fs::path rp = fs::path(a.out_dir) / (r.variant.label + ".report.json");
    atomic_write(rp, dump_json(report_to_json(r.metrics)));
    man.outputs.push_back(rp.string());
  }
  write_manifests(man);
  std::printf("%-20s %10s %10s\n", "model", "TC", "WSWF");
  for (const auto& r : rows) std::printf("%-20s %10.4f %10.4f\n", r.variant.label.c_str(), r.metrics.tc, r.metrics.wswf);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cluster-regularized embedded topic models: training and topic-quality evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", CETM_VERSION);

  PreprocessArgs pre;
  auto* c_pre = app.add_subcommand("preprocess", "Tokenize raw text into a corpus file");
  c_pre->add_option("--input", pre.input, "Directory of .txt files or JSON-lines file with a \"text\" field")->required();
  c_pre->add_option("--out", pre.out, "Output corpus JSON")->required();
  c_pre->add_option("--min-freq", pre.min_freq, "Drop words seen fewer times in the corpus")->capture_default_str();
  c_pre->add_option("--stopwords", pre.stopwords, "Extra stopword list(s), one word per line");
  c_pre->add_flag("--no-default-stopwords", pre.no_default_stopwords, "Skip the bundled pronoun/preposition list");
  c_pre->add_option("--lemmas", pre.lemmas, "Lemma dictionary: word<TAB>lemma per line");

  PretrainArgs pt;
  auto* c_pt = app.add_subcommand("pretrain", "Pretrain word embeddings with skip-gram negative sampling");
  c_pt->add_option("--corpus", pt.corpus)->required();
  c_pt->add_option("--out", pt.out, "Output embedding text file")->required();
  c_pt->add_option("--dim", pt.dim, "Embedding dimension H")->capture_default_str();
  c_pt->add_option("--seed", pt.seed)->capture_default_str();
  c_pt->add_option("--epochs", pt.sgns.epochs)->capture_default_str();
  c_pt->add_option("--window", pt.sgns.window)->capture_default_str();
  c_pt->add_option("--negatives", pt.sgns.negatives)->capture_default_str();
  c_pt->add_option("--subsample", pt.sgns.subsample)->capture_default_str();
  c_pt->add_option("--lr", pt.sgns.learning_rate)->capture_default_str();

  ClusterArgs cl;
  auto* c_cl = app.add_subcommand("cluster", "k-means clustering of the documents");
  c_cl->add_option("--corpus", cl.corpus)->required();
  c_cl->add_option("--embeddings", cl.embeddings, "Cluster on mean word embeddings (TF-IDF otherwise)");
  c_cl->add_option("--out", cl.out, "Output cluster JSON")->required();
  c_cl->add_option("--k", cl.km.k, "Number of clusters (= number of topics)")->capture_default_str();
  c_cl->add_option("--seed", cl.km.seed)->capture_default_str();
  c_cl->add_option("--restarts", cl.km.restarts)->capture_default_str();
  c_cl->add_option("--max-iter", cl.km.max_iter)->capture_default_str();

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "Train LDA, ETM or the modified model");
  c_tr->add_option("--corpus", tr.corpus)->required();
  c_tr->add_option("--model", tr.model, "lda, etm or modified (default: config \"model\", else modified)")
      ->check(CLI::IsMember({"lda", "etm", "modified"}));
  c_tr->add_option("--pretrained", tr.pretrained, "Pretrained embedding file");
  c_tr->add_option("--clusters", tr.clusters, "Cluster file (required for --model modified)");
  c_tr->add_option("--config", tr.config, "Training config JSON");
  c_tr->add_option("--out", tr.out, "Output checkpoint")->required();
  c_tr->add_option("--report", tr.report, "Training report JSON (default <out>.report.json)");
  c_tr->add_option("--topics", tr.topics, "Number of topics");
  c_tr->add_option("--dim", tr.dim, "Embedding dimension H");
  c_tr->add_option("--hidden", tr.hidden, "Encoder hidden width");
  c_tr->add_option("--epochs", tr.epochs);
  c_tr->add_option("--batch-size", tr.batch_size);
  c_tr->add_option("--lr", tr.lr);
  c_tr->add_option("--weight-decay", tr.weight_decay);
  c_tr->add_option("--kl-anneal", tr.kl_anneal, "Epochs of linear KL warm-up (0 = off)");
  c_tr->add_option("--seed", tr.seed);
  c_tr->add_option("--freeze-word-emb", tr.freeze, "true/false (default: freeze iff pretrained)");
  c_tr->add_option("--alpha", tr.alpha, "LDA alpha (default 50/#T)");
  c_tr->add_option("--beta", tr.beta, "LDA beta")->capture_default_str();
  c_tr->add_option("--sweeps", tr.sweeps, "LDA Gibbs sweeps")->capture_default_str();

  EvalArgs ev;
  auto* c_ev = app.add_subcommand("eval", "Topic coherence and WSWF");
  c_ev->add_option("--corpus", ev.corpus)->required();
  c_ev->add_option("--checkpoint", ev.checkpoint);
  c_ev->add_option("--topics-file", ev.topics_file, "Topic-word JSON instead of a checkpoint");
  c_ev->add_option("--n", ev.n, "Top words per topic")->capture_default_str();
  c_ev->add_option("--out", ev.out, "Report JSON")->required();
  c_ev->add_option("--csv", ev.csv, "Per-topic CSV (topic,tc,wswf)");
  c_ev->add_option("--label", ev.label);

  TopicsArgs tp;
  auto* c_tp = app.add_subcommand("topics", "Print the top words of each topic");
  c_tp->add_option("--checkpoint", tp.checkpoint)->required();
  c_tp->add_option("--n", tp.n)->capture_default_str();
  c_tp->add_option("--out", tp.out, "Also write the topic-word JSON");

  PlotArgs pl;
  auto* c_pl = app.add_subcommand("plot", "Per-topic TC/WSWF scatter as CSV and SVG");
  c_pl->add_option("--report", pl.reports, "Metrics report(s)")->required();
  c_pl->add_option("--csv", pl.csv, "CSV output, one per report");
  c_pl->add_option("--svg", pl.svg, "SVG scatter output");

  ExperimentArgs ex;
  auto* c_ex = app.add_subcommand("experiment", "Train and score several model variants");
  c_ex->add_option("--corpus", ex.corpus)->required();
  c_ex->add_option("--out-dir", ex.out_dir)->capture_default_str();
  c_ex->add_option("--config", ex.config, "Training config JSON");
  c_ex->add_option("--variants", ex.variants, "Subset of lda, etm, etm+pretrain, modified, modified+pretrain");
  c_ex->add_option("--topics", ex.topics);
  c_ex->add_option("--dim", ex.dim);
  c_ex->add_option("--hidden", ex.hidden);
  c_ex->add_option("--epochs", ex.epochs);
  c_ex->add_option("--sweeps", ex.sweeps);
  c_ex->add_option("--sgns-epochs", ex.sgns_epochs);
  c_ex->add_option("--seed", ex.seed);
  c_ex->add_option("--n", ex.n)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c_pre) cmd_preprocess(pre);
    else if (*c_pt) cmd_pretrain(pt);
    else if (*c_cl) cmd_cluster(cl);
    else if (*c_tr) cmd_train(tr);
    else if (*c_ev) cmd_eval(ev);
    else if (*c_tp) cmd_topics(tp);
    else if (*c_pl) cmd_plot(pl);
    else if (*c_ex) cmd_experiment(ex);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", e.kind().c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", e.what());
    return 1;
  }
  return 0;
}
