#pragma once

// Checkpoint container.
//
//   bytes 0..7   "CETMCKPT"
//   u32 LE       format version
//   u64 LE       header length in bytes
//   header       UTF-8 JSON: kind, sizes, vocabulary, cluster-file hash and
//                the list of tensors {name, rows, cols}
//   payload      every tensor in header order, column-major little-endian f64
//
// The layout depends only on the stored values, so identical training runs
// give byte-identical files.

#include <Eigen/Dense>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cetm/corpus.hpp"
#include "cetm/error.hpp"
#include "cetm/io.hpp"
#include "cetm/model.hpp"

namespace cetm {

inline constexpr char kCheckpointMagic[8] = {'C', 'E', 'T', 'M', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

struct Checkpoint {
  std::string kind;  // "lda", "etm" or "modified"
  std::vector<std::string> vocab;
  std::string cluster_hash;      // sha256 of the cluster file, modified model only
  std::optional<Model> model;    // etm / modified
  Eigen::MatrixXd lda_phi;       // T x V, lda
  double lda_alpha = 0.0, lda_beta = 0.0;
  int lda_sweeps = 0;
  std::uint64_t seed = 0;

  std::size_t num_topics() const {
    return model ? model->num_topics() : static_cast<std::size_t>(lda_phi.rows());
  }

  // p(v | t) for every topic, T x V.
  Eigen::MatrixXd topic_word() const { return model ? topic_word_matrix(*model) : lda_phi; }
};

namespace detail {

template <class T>
void put(std::string& out, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.append(b, sizeof(T));
}

template <class T>
T take(const std::string& in, std::size_t& pos, const std::string& origin) {
  if (pos + sizeof(T) > in.size()) throw ParseError(origin + ": truncated checkpoint at offset " + std::to_string(pos));
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace detail

inline std::string serialize_checkpoint(const Checkpoint& c) {
  json header{{"kind", c.kind}, {"vocab", c.vocab}, {"seed", c.seed}};
  std::vector<std::pair<std::string, const Eigen::MatrixXd*>> tensors;
  Eigen::MatrixXd log_g0_col;
  if (c.model) {
    const Model& m = *c.model;
    header["topics"] = m.num_topics();
    header["dim"] = m.config.dim;
    header["hidden"] = m.config.hidden;
    header["init_std"] = m.config.init_std;
    header["activation"] = m.config.topic_activation == Activation::tanh ? "tanh" : "identity";
    header["freeze_word_emb"] = m.freeze_word_emb;
    header["cluster_hash"] = c.cluster_hash;
    header["cluster_of_doc"] = m.cluster_of_doc;
    m.params.for_each_block([&](std::string_view n, const Eigen::MatrixXd& w) { tensors.emplace_back(std::string(n), &w); });
    if (m.centres.size() > 0) tensors.emplace_back("const.centres", &m.centres);
    if (m.log_g0.size() > 0) {
      log_g0_col = m.log_g0.transpose();
      tensors.emplace_back("const.log_g0", &log_g0_col);
    }
  } else {
    header["topics"] = c.lda_phi.rows();
    header["alpha"] = c.lda_alpha;
    header["beta"] = c.lda_beta;
    header["sweeps"] = c.lda_sweeps;
    tensors.emplace_back("phi", &c.lda_phi);
  }
  json list = json::array();
  for (const auto& [name, m] : tensors) list.push_back({{"name", name}, {"rows", m->rows()}, {"cols", m->cols()}});
  header["tensors"] = std::move(list);

  const std::string h = header.dump();
  std::string out(kCheckpointMagic, sizeof kCheckpointMagic);
  detail::put<std::uint32_t>(out, kCheckpointVersion);
  detail::put<std::uint64_t>(out, h.size());
  out += h;
  for (const auto& [name, m] : tensors)
    out.append(reinterpret_cast<const char*>(m->data()), static_cast<std::size_t>(m->size()) * sizeof(double));
  return out;
}

inline Checkpoint deserialize_checkpoint(const std::string& bytes, const std::string& origin) {
  auto fail = [&](const std::string& msg) { throw ParseError(origin + ": " + msg); };
  if (bytes.size() < sizeof kCheckpointMagic || std::memcmp(bytes.data(), kCheckpointMagic, sizeof kCheckpointMagic) != 0)
    fail("not a checkpoint file (bad magic)");
  std::size_t pos = sizeof kCheckpointMagic;
  const auto version = detail::take<std::uint32_t>(bytes, pos, origin);
  if (version != kCheckpointVersion) fail("unsupported checkpoint version " + std::to_string(version));
  const auto hlen = detail::take<std::uint64_t>(bytes, pos, origin);
  if (pos + hlen > bytes.size()) fail("truncated header");
  const json header = parse_json(std::string_view(bytes).substr(pos, hlen), origin + " header");
  pos += hlen;

  Checkpoint c;
  std::vector<std::pair<std::string, Eigen::MatrixXd>> tensors;
  try {
    c.kind = header.at("kind").get<std::string>();
    c.vocab = header.at("vocab").get<std::vector<std::string>>();
    c.seed = header.value("seed", std::uint64_t{0});
    for (const auto& t : header.at("tensors")) {
      const auto rows = t.at("rows").get<Eigen::Index>(), cols = t.at("cols").get<Eigen::Index>();
      if (rows < 0 || cols < 0) fail("negative tensor shape");
      const auto n = static_cast<std::size_t>(rows * cols) * sizeof(double);
      if (pos + n > bytes.size()) fail("truncated tensor " + t.at("name").get<std::string>() + " at offset " + std::to_string(pos));
      Eigen::MatrixXd m(rows, cols);
      std::memcpy(m.data(), bytes.data() + pos, n);
      pos += n;
      tensors.emplace_back(t.at("name").get<std::string>(), std::move(m));
    }
    if (pos != bytes.size()) fail("trailing bytes after offset " + std::to_string(pos));

    if (c.kind == "lda") {
      c.lda_alpha = header.at("alpha").get<double>();
      c.lda_beta = header.at("beta").get<double>();
      c.lda_sweeps = header.at("sweeps").get<int>();
      for (auto& [name, m] : tensors)
        if (name == "phi") c.lda_phi = std::move(m);
      if (c.lda_phi.size() == 0) fail("LDA checkpoint has no phi tensor");
      if (static_cast<std::size_t>(c.lda_phi.cols()) != c.vocab.size()) fail("phi width does not match vocabulary");
    } else {
      Model m;
      m.config.kind = parse_model_kind(c.kind);
      m.config.num_topics = header.at("topics").get<std::size_t>();
      m.config.dim = header.at("dim").get<std::size_t>();
      m.config.hidden = header.at("hidden").get<std::size_t>();
      m.config.init_std = header.value("init_std", 0.02);
      m.config.topic_activation = header.value("activation", std::string("tanh")) == "identity" ? Activation::identity : Activation::tanh;
      m.freeze_word_emb = header.value("freeze_word_emb", false);
      m.cluster_of_doc = header.value("cluster_of_doc", std::vector<std::int32_t>{});
      c.cluster_hash = header.value("cluster_hash", std::string{});
      for (auto& [name, t] : tensors) {
        if (name == "const.centres") {
          m.centres = std::move(t);
        } else if (name == "const.log_g0") {
          m.log_g0 = t.transpose();
        } else if (auto* b = m.params.block(name)) {
          *b = std::move(t);
        } else {
          fail("unknown tensor " + name);
        }
      }
      if (m.vocab_size() != c.vocab.size()) fail("word embedding rows do not match vocabulary");
      if (m.kind() == ModelKind::modified && (m.centres.cols() != static_cast<Eigen::Index>(m.num_topics()) ||
                                              m.log_g0.size() != static_cast<Eigen::Index>(c.vocab.size())))
        fail("modified checkpoint lacks centres or G0");
      c.model = std::move(m);
    }
  } catch (const json::exception& e) {
    fail(std::string("malformed header: ") + e.what());
  } catch (const ConfigError& e) {
    fail(e.what());
  }
  return c;
}

inline void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  atomic_write(path, serialize_checkpoint(c));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(read_file(path), path.string());
}

}  // namespace cetm
