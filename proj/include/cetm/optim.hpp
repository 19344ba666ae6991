#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <string_view>

#include "cetm/model.hpp"

namespace cetm {

enum class OptimizerKind { adam, sgd };

inline OptimizerKind parse_optimizer_kind(std::string_view s) {
  if (s == "adam") return OptimizerKind::adam;
  if (s == "sgd") return OptimizerKind::sgd;
  throw ConfigError("unknown optimizer \"" + std::string(s) + "\"");
}

inline std::string to_string(OptimizerKind k) { return k == OptimizerKind::adam ? "adam" : "sgd"; }

// L2 weight decay applies to encoder weight matrices only.
inline bool decays(std::string_view block) {
  return block == "enc_w1" || block == "enc_w2" || block == "enc_wm" || block == "enc_ws";
}

// Minimizes: each step moves against `grad`. Decay is added to the gradient
// before the moment updates.
class Optimizer {
 public:
  struct Options {
    OptimizerKind kind = OptimizerKind::adam;
    double learning_rate = 2e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1.2e-6;
  };

  explicit Optimizer(Options options) : options_(options) {}

  // Blocks for which skip(name) is true are left untouched.
  void step(ModelParams& params, const ModelParams& grad,
            const std::function<bool(std::string_view)>& skip = {}) {
    ++steps_;
    const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(steps_));
    const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(steps_));
    params.for_each_block([&](std::string_view name, Eigen::MatrixXd& w) {
      if (skip && skip(name)) return;
      const Eigen::MatrixXd* g = grad.block(name);
      if (!g || g->size() != w.size()) throw ConfigError("gradient block " + std::string(name) + " has the wrong shape");
      Eigen::MatrixXd d = *g;
      if (options_.weight_decay != 0.0 && decays(name)) d += options_.weight_decay * w;
      if (options_.kind == OptimizerKind::sgd) {
        w -= options_.learning_rate * d;
        return;
      }
      auto& st = state_[std::string(name)];
      if (st.m.size() == 0) {
        st.m = Eigen::MatrixXd::Zero(w.rows(), w.cols());
        st.v = Eigen::MatrixXd::Zero(w.rows(), w.cols());
      }
      st.m = options_.beta1 * st.m + (1.0 - options_.beta1) * d;
      st.v = options_.beta2 * st.v + (1.0 - options_.beta2) * d.cwiseProduct(d);
      w.array() -= options_.learning_rate * (st.m.array() / bc1) / ((st.v.array() / bc2).sqrt() + options_.eps);
    });
  }

  long steps() const { return steps_; }

 private:
  struct Moments {
    Eigen::MatrixXd m, v;
  };
  Options options_;
  long steps_ = 0;
  std::map<std::string, Moments> state_;
};

// Rescales grad in place to global norm <= max_norm. Returns true when clipped.
inline bool clip_global_norm(ModelParams& grad, double max_norm) {
  double sq = 0.0;
  grad.for_each_block([&](std::string_view, const Eigen::MatrixXd& g) { sq += g.squaredNorm(); });
  const double norm = std::sqrt(sq);
  if (!(max_norm > 0.0) || norm <= max_norm) return false;
  const double scale = max_norm / norm;
  grad.for_each_block([&](std::string_view, Eigen::MatrixXd& g) { g *= scale; });
  return true;
}

}  // namespace cetm
