#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "proxyflow/errors.hpp"

namespace proxyflow {

enum class Activation { Identity, Relu, Sigmoid };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct MlpConfig {
  std::vector<int> dims;  // input, hidden..., output widths
  Activation hidden = Activation::Relu;
  Activation output = Activation::Identity;
  /// Per affine layer: normalize its input (plain layer norm, no affine).
  std::vector<char> layer_norm;
};

/// Recorded forward pass of one batch; consumed exactly once by backward.
struct Tape {
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> layer_inputs;  // post-normalization inputs
  std::vector<Eigen::MatrixXd> activations;   // post-activation outputs
  std::vector<Eigen::RowVectorXd> ln_inv_sd;  // per-sample 1/sd where LN used
  bool consumed = false;
};

/// Fully connected network over column-batches: x is (input_dim x batch).
/// Parameters live in one flat vector (per layer: column-major W, then b),
/// which is what the optimizer and checkpoints operate on. A model is
/// immutable during inference and may be shared across threads; training
/// mutates a single owner.
class Mlp {
 public:
  Mlp() = default;
  Mlp(MlpConfig cfg, std::uint64_t seed);

  int input_dim() const { return cfg_.dims.front(); }
  int output_dim() const { return cfg_.dims.back(); }
  int n_layers() const { return static_cast<int>(cfg_.dims.size()) - 1; }
  int n_params() const { return static_cast<int>(params_.size()); }
  const MlpConfig& config() const { return cfg_; }
  std::uint64_t init_seed() const { return seed_; }

  const Eigen::VectorXd& params() const { return params_; }
  Eigen::VectorXd& mutable_params() { return params_; }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Tape* tape = nullptr) const;

  /// Gradient of a scalar loss with cotangent dl_dy; optionally also the
  /// input cotangent. The tape is single-use.
  Eigen::VectorXd backward(Tape& tape, const Eigen::MatrixXd& dl_dy,
                           Eigen::MatrixXd* dl_dx = nullptr) const;

  Eigen::Map<const Eigen::MatrixXd> weight(int layer) const;
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;

 private:
  Eigen::Map<Eigen::MatrixXd> weight_mut(int layer);
  int weight_offset(int layer) const;
  int bias_offset(int layer) const;

  MlpConfig cfg_;
  Eigen::VectorXd params_;
  std::vector<int> offsets_;  // flat offset of each layer's W
  std::uint64_t seed_ = 0;
};

/// Elementwise box rescaling of a sigmoid output: y = lo + (hi - lo) s.
struct BoundMap {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& s) const {
    return (lo.replicate(1, s.cols()) +
            (hi - lo).asDiagonal() * s.matrix());
  }
  Eigen::MatrixXd pullback(const Eigen::MatrixXd& dl_dy) const {
    return (hi - lo).asDiagonal() * dl_dy;
  }
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(int n_params, double learning_rate = 1e-3)
      : m(Eigen::VectorXd::Zero(n_params)),
        v(Eigen::VectorXd::Zero(n_params)),
        lr(learning_rate) {}
};

/// Standard Adam update with bias correction, in place.
void adam_step(AdamState& state, Eigen::VectorXd& params,
               const Eigen::VectorXd& grad);

// --- gradient certification ---------------------------------------------

struct GradCheckEntry {
  int coordinate;
  double analytic;
  double numeric;
  double rel_err;
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::vector<GradCheckEntry> offending;  // entries above the tolerance
  bool pass = true;
};

/// Compares an analytic pullback against central finite differences of the
/// forward map, coordinate by coordinate, for one cotangent vector.
/// rel_err = |a - n| / max(1, |a|, |n|).
GradCheckReport grad_check(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& forward,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&,
                                        const Eigen::VectorXd&)>& pullback,
    const Eigen::VectorXd& x, const Eigen::VectorXd& cotangent, double h,
    double tol);

// --- checkpoints -----------------------------------------------------------

std::string mlp_to_json_text(const Mlp& mlp);
Mlp mlp_from_json_text(const std::string& text);

}  // namespace proxyflow
