#pragma once

// Topic quality metrics: NPMI topic coherence over document co-occurrence and
// WSWF, the G0-weighted familiarity of each topic's top words.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cetm/corpus.hpp"
#include "cetm/error.hpp"
#include "cetm/io.hpp"
#include "cetm/model.hpp"

namespace cetm {

// ---------------------------------------------------------------------------
// Topic-word tables, shared by every model exporter:
// {"topics": [{"words": [...], "probs": [...]}], "N": n}

struct TopicWords {
  std::vector<std::string> words;
  std::vector<double> probs;
};

struct TopicTable {
  std::size_t n = 10;
  std::vector<TopicWords> topics;
};

// Top-n rows of a T x V topic-word matrix, descending, ties by word id.
inline TopicTable topic_table_from_matrix(const Eigen::MatrixXd& topic_word, const Vocabulary& vocab, std::size_t n) {
  if (static_cast<std::size_t>(topic_word.cols()) != vocab.size())
    throw ConfigError("topic-word matrix width does not match vocabulary");
  if (n == 0 || n > vocab.size())
    throw ConfigError("N=" + std::to_string(n) + " must be in [1, #V=" + std::to_string(vocab.size()) + "]");
  TopicTable table{n, {}};
  for (Eigen::Index t = 0; t < topic_word.rows(); ++t) {
    TopicWords tw;
    for (const auto& wp : top_words(topic_word.row(t).transpose(), n)) {
      tw.words.push_back(vocab.word(wp.id));
      tw.probs.push_back(wp.prob);
    }
    table.topics.push_back(std::move(tw));
  }
  return table;
}

inline json topic_table_to_json(const TopicTable& t) {
  json topics = json::array();
  for (const auto& tw : t.topics) topics.push_back({{"words", tw.words}, {"probs", tw.probs}});
  return json{{"topics", std::move(topics)}, {"N", t.n}};
}

inline TopicTable topic_table_from_json(const json& j, const std::string& origin) {
  auto fail = [&](const std::string& msg) { throw ParseError(origin + ": " + msg); };
  if (!j.is_object() || !j.contains("topics") || !j["topics"].is_array()) fail("missing array field \"topics\"");
  TopicTable t;
  try {
    t.n = j.value("N", std::size_t{0});
    for (const auto& e : j["topics"]) {
      TopicWords tw{e.at("words").get<std::vector<std::string>>(), e.at("probs").get<std::vector<double>>()};
      if (tw.words.size() != tw.probs.size()) fail("words and probs differ in length");
      t.topics.push_back(std::move(tw));
    }
  } catch (const json::exception& e) {
    fail(std::string("wrong value type: ") + e.what());
  }
  if (t.n == 0 && !t.topics.empty()) t.n = t.topics.front().words.size();
  return t;
}

struct ResolvedTopic {
  std::vector<WordId> ids;
  std::vector<double> probs;
};

// Maps surface forms to vocabulary ids and keeps the first n entries.
inline std::vector<ResolvedTopic> resolve_topics(const TopicTable& table, const Vocabulary& vocab, std::size_t n) {
  std::vector<ResolvedTopic> out;
  for (std::size_t t = 0; t < table.topics.size(); ++t) {
    const auto& tw = table.topics[t];
    if (tw.words.size() < n)
      throw ConfigError("topic " + std::to_string(t) + " lists " + std::to_string(tw.words.size()) +
                        " words, fewer than N=" + std::to_string(n));
    ResolvedTopic r;
    for (std::size_t i = 0; i < n; ++i) {
      auto id = vocab.find(tw.words[i]);
      if (!id) throw UndefinedWordError("topic word \"" + tw.words[i] + "\" is not in the corpus vocabulary");
      r.ids.push_back(*id);
      r.probs.push_back(tw.probs[i]);
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Co-occurrence

// P(u) and P(u, v) over a word list, from document presence (not counts).
struct CooccurrenceStats {
  std::vector<WordId> words;
  Eigen::VectorXd p;   // P(words[i])
  Eigen::MatrixXd pp;  // P(words[i], words[j]); the diagonal equals p
  std::unordered_map<WordId, std::size_t> slot;

  double prob(WordId u) const { return p(static_cast<Eigen::Index>(slot.at(u))); }
  double joint(WordId u, WordId v) const {
    return pp(static_cast<Eigen::Index>(slot.at(u)), static_cast<Eigen::Index>(slot.at(v)));
  }
};

inline CooccurrenceStats cooccurrence_stats(const Corpus& corpus, std::vector<WordId> words) {
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  CooccurrenceStats s;
  s.words = words;
  const auto U = static_cast<Eigen::Index>(words.size());
  std::vector<std::ptrdiff_t> slot_of(corpus.vocab_size(), -1);
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i] < 0 || static_cast<std::size_t>(words[i]) >= corpus.vocab_size())
      throw ConfigError("word id outside the vocabulary");
    slot_of[static_cast<std::size_t>(words[i])] = static_cast<std::ptrdiff_t>(i);
    s.slot.emplace(words[i], i);
  }
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(U, U);
  std::vector<Eigen::Index> present;
  for (const auto& doc : corpus.documents) {
    present.clear();
    for (const auto& wc : doc.counts()) {
      const auto k = slot_of[static_cast<std::size_t>(wc.id)];
      if (k >= 0) present.push_back(static_cast<Eigen::Index>(k));
    }
    for (auto a : present)
      for (auto b : present) counts(a, b) += 1.0;
  }
  const double D = static_cast<double>(corpus.num_docs());
  s.pp = counts / D;
  s.p = s.pp.diagonal();
  return s;
}

// log(P(u,v) / (P(u) P(v))) / -log P(u,v), with -1 when the words never
// co-occur and 1 when P(u,v) = 1.
inline double npmi(double p_u, double p_v, double p_uv) {
  if (!(p_u > 0.0) || !(p_v > 0.0)) throw UndefinedWordError("NPMI of a word that never occurs");
  if (p_uv <= 0.0) return -1.0;
  if (p_uv >= 1.0) return 1.0;
  const double l_uv = std::log(p_uv);
  return (l_uv - std::log(p_u) - std::log(p_v)) / -l_uv;
}

struct PerTopic {
  std::vector<double> per_topic;
  double mean = 0.0;
};

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Mean NPMI over the N(N-1) ordered pairs of distinct top words, per topic.
inline PerTopic topic_coherence(const Corpus& corpus, const std::vector<std::vector<WordId>>& top, std::size_t n) {
  if (n < 2) throw ConfigError("topic coherence needs N >= 2");
  std::vector<WordId> all;
  for (const auto& t : top) {
    if (t.size() < n) throw ConfigError("topic has fewer than N words");
    all.insert(all.end(), t.begin(), t.begin() + static_cast<std::ptrdiff_t>(n));
  }
  const auto stats = cooccurrence_stats(corpus, all);
  PerTopic out;
  for (const auto& t : top) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        sum += npmi(stats.prob(t[i]), stats.prob(t[j]), stats.joint(t[i], t[j]));
      }
    out.per_topic.push_back(sum / static_cast<double>(n * (n - 1)));
  }
  out.mean = mean_of(out.per_topic);
  return out;
}

// Per topic: sum over the top-N words of p(v|t) log G0(v). Not renormalized.
inline PerTopic wswf(std::span<const double> g0, const std::vector<ResolvedTopic>& top, std::size_t n) {
  PerTopic out;
  for (const auto& t : top) {
    if (t.ids.size() < n) throw ConfigError("topic has fewer than N words");
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = g0[static_cast<std::size_t>(t.ids[i])];
      if (!(g > 0.0)) throw UndefinedWordError("WSWF needs G0 > 0 for every top word");
      s += t.probs[i] * std::log(g);
    }
    out.per_topic.push_back(s);
  }
  out.mean = mean_of(out.per_topic);
  return out;
}

// ---------------------------------------------------------------------------
// Reports

struct MetricsReport {
  std::string label;
  std::size_t n = 10;
  std::vector<double> per_topic_tc;
  std::vector<double> per_topic_wswf;
  double tc = 0.0;
  double wswf = 0.0;
  TopicTable top_words;
};

inline MetricsReport evaluate_topics(const Corpus& corpus, const TopicTable& table, std::size_t n,
                                     std::string label = {}) {
  const auto resolved = resolve_topics(table, corpus.vocabulary, n);
  std::vector<std::vector<WordId>> ids;
  for (const auto& r : resolved) ids.push_back(r.ids);
  const auto tc = topic_coherence(corpus, ids, n);
  const auto ws = wswf(corpus.g0, resolved, n);
  MetricsReport r;
  r.label = std::move(label);
  r.n = n;
  r.per_topic_tc = tc.per_topic;
  r.per_topic_wswf = ws.per_topic;
  r.tc = tc.mean;
  r.wswf = ws.mean;
  r.top_words.n = n;
  for (const auto& tw : table.topics)
    r.top_words.topics.push_back({{tw.words.begin(), tw.words.begin() + static_cast<std::ptrdiff_t>(n)},
                                  {tw.probs.begin(), tw.probs.begin() + static_cast<std::ptrdiff_t>(n)}});
  return r;
}

inline json report_to_json(const MetricsReport& r) {
  return json{{"label", r.label},
              {"N", r.n},
              {"tc", r.tc},
              {"wswf", r.wswf},
              {"per_topic_tc", r.per_topic_tc},
              {"per_topic_wswf", r.per_topic_wswf},
              {"top_words", topic_table_to_json(r.top_words)}};
}

inline MetricsReport report_from_json(const json& j, const std::string& origin) {
  MetricsReport r;
  try {
    r.label = j.value("label", std::string{});
    r.n = j.at("N").get<std::size_t>();
    r.tc = j.at("tc").get<double>();
    r.wswf = j.at("wswf").get<double>();
    r.per_topic_tc = j.at("per_topic_tc").get<std::vector<double>>();
    r.per_topic_wswf = j.at("per_topic_wswf").get<std::vector<double>>();
    if (j.contains("top_words")) r.top_words = topic_table_from_json(j["top_words"], origin);
  } catch (const json::exception& e) {
    throw ParseError(origin + ": malformed report: " + e.what());
  }
  if (r.per_topic_tc.size() != r.per_topic_wswf.size()) throw ParseError(origin + ": per-topic columns differ in length");
  return r;
}

// (tc_t, wswf_t) aligned by topic index.
inline std::vector<std::pair<double, double>> per_topic_scatter(const MetricsReport& r) {
  std::vector<std::pair<double, double>> out;
  for (std::size_t t = 0; t < r.per_topic_tc.size(); ++t) out.emplace_back(r.per_topic_tc[t], r.per_topic_wswf[t]);
  return out;
}

inline std::string scatter_csv(const std::vector<std::pair<double, double>>& points) {
  std::string s = "topic,tc,wswf\n";
  for (std::size_t t = 0; t < points.size(); ++t)
    s += std::to_string(t) + "," + format_double(points[t].first) + "," + format_double(points[t].second) + "\n";
  return s;
}

inline std::vector<std::pair<double, double>> parse_scatter_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "topic,tc,wswf") throw ParseError(origin + ": expected header topic,tc,wswf");
  std::vector<std::pair<double, double>> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string topic, tc, ws;
    if (!std::getline(ls, topic, ',') || !std::getline(ls, tc, ',') || !std::getline(ls, ws))
      throw ParseError(origin + ":" + std::to_string(lineno) + ": expected three columns");
    try {
      if (std::stoul(topic) != out.size()) throw ParseError(origin + ":" + std::to_string(lineno) + ": topic out of order");
      out.emplace_back(std::stod(tc), std::stod(ws));
    } catch (const std::logic_error&) {
      throw ParseError(origin + ":" + std::to_string(lineno) + ": not a number");
    }
  }
  return out;
}

struct ScatterSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

// Minimal SVG scatter: TC on x, WSWF on y, one marker colour per series.
inline std::string scatter_svg(const std::vector<ScatterSeries>& series) {
  constexpr double W = 640, H = 480, L = 70, R = 160, T = 30, Bm = 60;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (auto [x, y] : s.points) {
      xmin = std::min(xmin, x), xmax = std::max(xmax, x);
      ymin = std::min(ymin, y), ymax = std::max(ymax, y);
    }
  if (xmin > xmax) xmin = -1, xmax = 1, ymin = -1, ymax = 0;
  if (xmax - xmin < 1e-9) xmin -= 0.5, xmax += 0.5;
  if (ymax - ymin < 1e-9) ymin -= 0.5, ymax += 0.5;
  const double padx = 0.05 * (xmax - xmin), pady = 0.05 * (ymax - ymin);
  xmin -= padx, xmax += padx, ymin -= pady, ymax += pady;
  auto sx = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto sy = [&](double y) { return H - Bm - (y - ymin) / (ymax - ymin) * (H - T - Bm); };
  static const char* colours[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
  char buf[256];
  std::string s;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" viewBox=\"0 0 %g %g\">\n", W, H, W, H);
  s += buf;
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", L, H - Bm, W - R, H - Bm);
  s += buf;
  std::snprintf(buf, sizeof buf, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", L, T, L, H - Bm);
  s += buf;
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4.0, yv = ymin + (ymax - ymin) * i / 4.0;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" text-anchor=\"middle\">%.3g</text>\n", sx(xv),
                  H - Bm + 16, xv);
    s += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" text-anchor=\"end\">%.3g</text>\n",
                  L - 6, sy(yv) + 4, yv);
    s += buf;
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"13\" text-anchor=\"middle\">TC</text>\n",
                (L + W - R) / 2, H - 15);
  s += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"18\" y=\"%.1f\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 %.1f)\">WSWF</text>\n",
                (T + H - Bm) / 2, (T + H - Bm) / 2);
  s += buf;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* colour = colours[k % std::size(colours)];
    for (auto [x, y] : series[k].points) {
      std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"4\" fill=\"%s\" fill-opacity=\"0.75\"/>\n", sx(x),
                    sy(y), colour);
      s += buf;
    }
    const double ly = T + 10 + 20.0 * static_cast<double>(k);
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"5\" fill=\"%s\"/>\n", W - R + 20, ly, colour);
    s += buf;
    std::string label;
    for (char c : series[k].label.empty() ? "series " + std::to_string(k) : series[k].label) {
      if (c == '<') label += "&lt;";
      else if (c == '>') label += "&gt;";
      else if (c == '&') label += "&amp;";
      else label += c;
    }
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\">", W - R + 30, ly + 4);
    s += buf;
    s += label + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace cetm
