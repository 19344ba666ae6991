#pragma once

// Text ingestion, preprocessing, vocabulary construction and the corpus-wide
// relative word frequency G0 that the modified model and WSWF both use.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cetm/error.hpp"
#include "cetm/io.hpp"

namespace cetm {

using WordId = std::int32_t;

class Vocabulary {
 public:
  Vocabulary() = default;

  explicit Vocabulary(std::vector<std::string> words) {
    for (auto& w : words) add(std::move(w));
  }

  // Returns the existing id when the word is already present.
  WordId add(std::string word) {
    if (word.empty()) throw ConfigError("vocabulary words must be non-empty");
    auto [it, inserted] = index_.emplace(word, static_cast<WordId>(words_.size()));
    if (inserted) words_.push_back(std::move(word));
    return it->second;
  }

  std::optional<WordId> find(std::string_view word) const {
    auto it = index_.find(std::string(word));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& word(WordId id) const { return words_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& words() const { return words_; }
  std::size_t size() const { return words_.size(); }

  bool operator==(const Vocabulary& other) const { return words_ == other.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> index_;
};

struct WordCount {
  WordId id;
  std::int32_t count;
  bool operator==(const WordCount&) const = default;
};

class Document {
 public:
  Document() = default;

  explicit Document(std::vector<WordId> tokens) : tokens_(std::move(tokens)) {
    std::map<WordId, std::int32_t> tally;
    for (WordId id : tokens_) ++tally[id];
    counts_.reserve(tally.size());
    for (auto [id, c] : tally) counts_.push_back({id, c});
  }

  const std::vector<WordId>& tokens() const { return tokens_; }
  // Sparse bag of words sorted by id.
  const std::vector<WordCount>& counts() const { return counts_; }
  std::size_t length() const { return tokens_.size(); }

  bool operator==(const Document& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<WordId> tokens_;
  std::vector<WordCount> counts_;
};

// G0(v) = (occurrences of v) / (total tokens).
inline std::vector<double> compute_g0(std::span<const Document> documents, std::size_t vocab_size) {
  std::vector<std::int64_t> counts(vocab_size, 0);
  std::int64_t total = 0;
  for (const auto& doc : documents) {
    for (WordId id : doc.tokens()) {
      if (id < 0 || static_cast<std::size_t>(id) >= vocab_size)
        throw ConfigError("token id " + std::to_string(id) + " outside vocabulary of size " +
                          std::to_string(vocab_size));
      ++counts[static_cast<std::size_t>(id)];
    }
    total += static_cast<std::int64_t>(doc.length());
  }
  if (total == 0) throw EmptyCorpusError("cannot compute G0 of a corpus with zero tokens");
  std::vector<double> g0(vocab_size);
  for (std::size_t v = 0; v < vocab_size; ++v)
    g0[v] = static_cast<double>(counts[v]) / static_cast<double>(total);
  return g0;
}

struct Corpus {
  std::vector<Document> documents;
  Vocabulary vocabulary;
  std::vector<double> g0;

  std::size_t num_docs() const { return documents.size(); }
  std::size_t vocab_size() const { return vocabulary.size(); }

  std::size_t total_tokens() const {
    std::size_t n = 0;
    for (const auto& d : documents) n += d.length();
    return n;
  }

  static Corpus from_documents(std::vector<Document> docs, Vocabulary vocab) {
    Corpus c{std::move(docs), std::move(vocab), {}};
    c.g0 = compute_g0(c.documents, c.vocab_size());
    return c;
  }

  // Builds a corpus from token-string documents; vocabulary ids follow first
  // appearance order.
  static Corpus from_tokens(const std::vector<std::vector<std::string>>& docs) {
    Vocabulary vocab;
    std::vector<Document> out;
    for (const auto& d : docs) {
      std::vector<WordId> ids;
      for (const auto& w : d) ids.push_back(vocab.add(w));
      if (!ids.empty()) out.emplace_back(std::move(ids));
    }
    return from_documents(std::move(out), std::move(vocab));
  }

  bool operator==(const Corpus&) const = default;
};

// ---------------------------------------------------------------------------
// Tokenization

namespace detail {

// Decodes one UTF-8 code point starting at s[i] and advances i. Invalid bytes
// decode as themselves.
inline char32_t next_code_point(std::string_view s, std::size_t& i) {
  auto b0 = static_cast<unsigned char>(s[i]);
  int extra = b0 < 0x80 ? 0 : (b0 >> 5) == 0x6 ? 1 : (b0 >> 4) == 0xE ? 2 : (b0 >> 3) == 0x1E ? 3 : -1;
  if (extra <= 0 || i + static_cast<std::size_t>(extra) >= s.size()) {
    ++i;
    return b0;
  }
  char32_t cp = b0 & (0x3F >> extra);
  for (int k = 1; k <= extra; ++k) {
    auto b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return b0;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += static_cast<std::size_t>(extra) + 1;
  return cp;
}

inline bool is_space(char32_t c) {
  return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
         (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F ||
         c == 0x205F || c == 0x3000;
}

inline bool is_punct(char32_t c) {
  if (c < 0x80) return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
                       (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
  return c == 0xA1 || c == 0xA7 || c == 0xAB || c == 0xB6 || c == 0xB7 || c == 0xBB ||
         c == 0xBF || (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
         (c >= 0x3001 && c <= 0x3003) || (c >= 0x3008 && c <= 0x3011);
}

inline bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

inline bool is_word_char(char32_t c) {
  if (c < 0x80) return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z');
  return !is_punct(c) && !is_space(c);
}

struct CodePoint {
  char32_t value;
  std::size_t begin, end;  // byte range
};

}  // namespace detail

// Splits on Unicode whitespace, strips surrounding punctuation and lowercases
// ASCII letters. Tokens containing digits or any remaining non-letter
// character are discarded.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::vector<detail::CodePoint> piece;
  auto flush = [&] {
    std::size_t lo = 0, hi = piece.size();
    while (lo < hi && detail::is_punct(piece[lo].value)) ++lo;
    while (hi > lo && detail::is_punct(piece[hi - 1].value)) --hi;
    if (lo < hi) {
      bool keep = true;
      for (std::size_t k = lo; k < hi && keep; ++k)
        keep = !detail::is_digit(piece[k].value) && detail::is_word_char(piece[k].value);
      if (keep) {
        std::string tok(text.substr(piece[lo].begin, piece[hi - 1].end - piece[lo].begin));
        for (char& ch : tok)
          if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
        out.push_back(std::move(tok));
      }
    }
    piece.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t begin = i;
    char32_t cp = detail::next_code_point(text, i);
    if (detail::is_space(cp))
      flush();
    else
      piece.push_back({cp, begin, i});
  }
  flush();
  return out;
}

// ---------------------------------------------------------------------------
// Raw input

struct RawDocument {
  std::string text;
  std::string origin;  // "file" or "file:line"
};

// Accepts a directory of plain-text files (one document each, visited in
// sorted path order) or a JSON-lines file whose records carry a "text" field.
inline std::vector<RawDocument> read_raw_documents(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  std::vector<RawDocument> docs;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(path))
      if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) docs.push_back({read_file(f), f.string()});
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::string origin = path.string() + ":" + std::to_string(lineno);
      json rec;
      try {
        rec = json::parse(line);
      } catch (const json::parse_error& e) {
        throw IngestError(origin + ": malformed JSON at byte " + std::to_string(e.byte));
      }
      if (!rec.is_object() || !rec.contains("text") || !rec["text"].is_string())
        throw IngestError(origin + ": record has no string field \"text\"");
      docs.push_back({rec["text"].get<std::string>(), origin});
    }
  }
  return docs;
}

// One entry per line; blank lines and lines starting with '#' are ignored.
inline std::unordered_set<std::string> load_word_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open word list " + path.string());
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    for (auto& tok : tokenize(line)) words.insert(std::move(tok));
  }
  return words;
}

// Tab-separated "word<TAB>lemma" pairs.
inline std::unordered_map<std::string, std::string> load_lemma_dictionary(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open lemma dictionary " + path.string());
  std::unordered_map<std::string, std::string> lemmas;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
      throw IngestError(path.string() + ":" + std::to_string(lineno) +
                        ": expected word<TAB>lemma");
    auto key = tokenize(line.substr(0, tab));
    auto val = tokenize(line.substr(tab + 1));
    if (key.size() == 1 && val.size() == 1) lemmas[key[0]] = val[0];
  }
  return lemmas;
}

// ---------------------------------------------------------------------------
// Preprocessing

struct PreprocessOptions {
  std::size_t min_freq = 5;
  std::unordered_set<std::string> stopwords;
  std::unordered_map<std::string, std::string> lemmas;  // empty: no lemmatization
};

struct PreprocessResult {
  Corpus corpus;
  std::size_t dropped_documents = 0;
  std::vector<std::string> dropped_origins;
};

inline PreprocessResult preprocess(std::span<const RawDocument> raw, const PreprocessOptions& options) {
  if (raw.empty()) throw EmptyCorpusError("no input documents");

  std::vector<std::vector<std::string>> docs;
  docs.reserve(raw.size());
  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& r : raw) {
    std::vector<std::string> kept;
    for (auto& tok : tokenize(r.text)) {
      if (!options.lemmas.empty()) {
        auto it = options.lemmas.find(tok);
        if (it != options.lemmas.end()) tok = it->second;
      }
      if (options.stopwords.contains(tok)) continue;
      ++freq[tok];
      kept.push_back(std::move(tok));
    }
    docs.push_back(std::move(kept));
  }

  PreprocessResult result;
  Vocabulary vocab;
  std::vector<Document> out;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    std::vector<WordId> ids;
    for (auto& tok : docs[d])
      if (freq[tok] >= options.min_freq) ids.push_back(vocab.add(std::move(tok)));
    if (ids.empty()) {
      ++result.dropped_documents;
      result.dropped_origins.push_back(raw[d].origin);
      continue;
    }
    out.emplace_back(std::move(ids));
  }
  if (out.empty()) throw EmptyCorpusError("every document was emptied by preprocessing");
  result.corpus = Corpus::from_documents(std::move(out), std::move(vocab));
  return result;
}

// Renders each document as space-joined surface forms.
inline std::vector<RawDocument> to_raw_documents(const Corpus& corpus) {
  std::vector<RawDocument> out;
  for (std::size_t d = 0; d < corpus.num_docs(); ++d) {
    std::string text;
    for (WordId id : corpus.documents[d].tokens()) {
      if (!text.empty()) text.push_back(' ');
      text += corpus.vocabulary.word(id);
    }
    out.push_back({std::move(text), "doc " + std::to_string(d)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corpus file: {"vocab": [...], "docs": [[ids...]...], "g0": [...]}

inline json corpus_to_json(const Corpus& c) {
  json docs = json::array();
  for (const auto& d : c.documents) docs.push_back(d.tokens());
  return json{{"vocab", c.vocabulary.words()}, {"docs", std::move(docs)}, {"g0", c.g0}};
}

inline Corpus corpus_from_json(const json& j, const std::string& origin) {
  auto fail = [&](const std::string& msg) { throw ParseError(origin + ": " + msg); };
  if (!j.is_object()) fail("corpus file must be a JSON object");
  for (const char* key : {"vocab", "docs", "g0"})
    if (!j.contains(key) || !j[key].is_array()) fail(std::string("missing array field \"") + key + "\"");
  Corpus c;
  try {
    for (const auto& w : j["vocab"]) {
      auto word = w.get<std::string>();
      if (c.vocabulary.find(word)) fail("duplicate vocabulary word \"" + word + "\"");
      c.vocabulary.add(std::move(word));
    }
    const auto V = static_cast<WordId>(c.vocab_size());
    std::size_t index = 0;
    for (const auto& d : j["docs"]) {
      auto ids = d.get<std::vector<WordId>>();
      if (ids.empty()) fail("document " + std::to_string(index) + " is empty");
      for (WordId id : ids)
        if (id < 0 || id >= V) fail("document " + std::to_string(index) + " has token id " +
                                    std::to_string(id) + " outside the vocabulary");
      c.documents.emplace_back(std::move(ids));
      ++index;
    }
    c.g0 = j["g0"].get<std::vector<double>>();
  } catch (const json::exception& e) {
    fail(std::string("wrong value type: ") + e.what());
  } catch (const ConfigError& e) {
    fail(e.what());
  }
  if (c.g0.size() != c.vocab_size()) fail("g0 length does not match vocabulary size");
  for (double p : c.g0)
    if (!(p > 0.0) || !std::isfinite(p)) fail("g0 entries must be positive and finite");
  if (c.documents.empty()) fail("corpus has no documents");
  return c;
}

inline void save_corpus(const Corpus& c, const std::filesystem::path& path) {
  atomic_write(path, corpus_to_json(c).dump() + "\n");
}

inline Corpus load_corpus(const std::filesystem::path& path) {
  return corpus_from_json(load_json(path), path.string());
}

}  // namespace cetm
