#include "proxyflow/mlp.hpp"

#include <cmath>

#include "json.hpp"
#include "proxyflow/rng.hpp"

namespace proxyflow {

using nlohmann::json;

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "?";
}

Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::Identity;
  if (s == "relu") return Activation::Relu;
  if (s == "sigmoid") return Activation::Sigmoid;
  throw ParseError("unknown activation '" + s + "'");
}

namespace {

constexpr double kLnEps = 1e-5;

Eigen::MatrixXd activate(const Eigen::MatrixXd& z, Activation act) {
  switch (act) {
    case Activation::Identity:
      return z;
    case Activation::Relu:
      return z.cwiseMax(0.0);
    case Activation::Sigmoid:
      return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  }
  return z;
}

/// dL/dz from dL/da using the stored activation output.
Eigen::MatrixXd activate_pullback(const Eigen::MatrixXd& dl_da,
                                  const Eigen::MatrixXd& a, Activation act) {
  switch (act) {
    case Activation::Identity:
      return dl_da;
    case Activation::Relu:
      // Subgradient 0 at the kink.
      return (a.array() > 0.0).cast<double>() * dl_da.array();
    case Activation::Sigmoid:
      return dl_da.array() * a.array() * (1.0 - a.array());
  }
  return dl_da;
}

}  // namespace

Mlp::Mlp(MlpConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)), seed_(seed) {
  if (cfg_.dims.size() < 2) {
    throw ConfigError("mlp needs at least input and output dims");
  }
  if (cfg_.layer_norm.empty()) {
    cfg_.layer_norm.assign(n_layers(), 0);
  }
  if (static_cast<int>(cfg_.layer_norm.size()) != n_layers()) {
    throw ConfigError("layer_norm flags must match layer count");
  }

  int total = 0;
  offsets_.resize(n_layers());
  for (int l = 0; l < n_layers(); ++l) {
    offsets_[l] = total;
    total += cfg_.dims[l + 1] * cfg_.dims[l] + cfg_.dims[l + 1];
  }
  params_.resize(total);

  // Kaiming-style uniform fan-in init; biases start at zero.
  Rng rng(seed);
  for (int l = 0; l < n_layers(); ++l) {
    const int fan_in = cfg_.dims[l];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    auto w = weight_mut(l);
    for (int c = 0; c < w.cols(); ++c) {
      for (int r = 0; r < w.rows(); ++r) {
        w(r, c) = rng.uniform(-bound, bound);
      }
    }
    params_.segment(bias_offset(l), cfg_.dims[l + 1]).setZero();
  }
}

int Mlp::weight_offset(int layer) const { return offsets_[layer]; }

int Mlp::bias_offset(int layer) const {
  return offsets_[layer] + cfg_.dims[layer + 1] * cfg_.dims[layer];
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weight(int layer) const {
  return {params_.data() + weight_offset(layer), cfg_.dims[layer + 1],
          cfg_.dims[layer]};
}

Eigen::Map<Eigen::MatrixXd> Mlp::weight_mut(int layer) {
  return {params_.data() + weight_offset(layer), cfg_.dims[layer + 1],
          cfg_.dims[layer]};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(int layer) const {
  return {params_.data() + bias_offset(layer), cfg_.dims[layer + 1]};
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Tape* tape) const {
  if (x.rows() != input_dim()) {
    throw ShapeMismatch("forward input has " + std::to_string(x.rows()) +
                        " rows, expected " + std::to_string(input_dim()));
  }
  if (tape) {
    tape->input = x;
    tape->layer_inputs.assign(n_layers(), {});
    tape->activations.assign(n_layers(), {});
    tape->ln_inv_sd.assign(n_layers(), {});
    tape->consumed = false;
  }

  Eigen::MatrixXd a = x;
  for (int l = 0; l < n_layers(); ++l) {
    Eigen::MatrixXd in = a;
    if (cfg_.layer_norm[l]) {
      Eigen::RowVectorXd mean = in.colwise().mean();
      Eigen::MatrixXd centered = in.rowwise() - mean;
      Eigen::RowVectorXd var = centered.array().square().colwise().mean();
      Eigen::RowVectorXd inv_sd =
          (var.array() + kLnEps).sqrt().inverse().matrix();
      in = centered * inv_sd.asDiagonal();
      if (tape) tape->ln_inv_sd[l] = inv_sd;
    }

    Eigen::MatrixXd z =
        (weight(l) * in).colwise() + Eigen::VectorXd(bias(l));
    const Activation act = (l + 1 == n_layers()) ? cfg_.output : cfg_.hidden;
    a = activate(z, act);
    if (tape) {
      tape->layer_inputs[l] = std::move(in);
      tape->activations[l] = a;
    }
  }
  return a;
}

Eigen::VectorXd Mlp::backward(Tape& tape, const Eigen::MatrixXd& dl_dy,
                              Eigen::MatrixXd* dl_dx) const {
  if (tape.consumed) throw TapeReused("tape already consumed by backward");
  if (static_cast<int>(tape.layer_inputs.size()) != n_layers()) {
    throw ShapeMismatch("tape does not match this model");
  }
  if (dl_dy.rows() != output_dim() ||
      dl_dy.cols() != tape.activations.back().cols()) {
    throw ShapeMismatch("output cotangent shape mismatch");
  }
  tape.consumed = true;

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n_params());
  Eigen::MatrixXd da = dl_dy;
  for (int l = n_layers() - 1; l >= 0; --l) {
    const Activation act = (l + 1 == n_layers()) ? cfg_.output : cfg_.hidden;
    const Eigen::MatrixXd dz = activate_pullback(da, tape.activations[l], act);
    const Eigen::MatrixXd& in = tape.layer_inputs[l];

    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + weight_offset(l),
                                   cfg_.dims[l + 1], cfg_.dims[l]);
    gw = dz * in.transpose();
    grad.segment(bias_offset(l), cfg_.dims[l + 1]) = dz.rowwise().sum();

    if (l == 0 && !dl_dx) break;
    Eigen::MatrixXd din = weight(l).transpose() * dz;

    if (cfg_.layer_norm[l]) {
      // Pullback of xhat = (x - mean) * inv_sd, per column.
      const Eigen::MatrixXd& xhat = in;
      Eigen::RowVectorXd g_mean = din.colwise().mean();
      Eigen::RowVectorXd gx_mean =
          (din.array() * xhat.array()).colwise().mean();
      Eigen::MatrixXd adj = din;
      adj.rowwise() -= g_mean;
      adj -= xhat * gx_mean.asDiagonal();
      din = adj * tape.ln_inv_sd[l].asDiagonal();
    }
    if (l == 0) {
      if (dl_dx) *dl_dx = std::move(din);
    } else {
      da = std::move(din);
    }
  }
  return grad;
}

void adam_step(AdamState& state, Eigen::VectorXd& params,
               const Eigen::VectorXd& grad) {
  if (params.size() != grad.size() || params.size() != state.m.size()) {
    throw ShapeMismatch("adam_step: parameter/gradient size mismatch");
  }
  ++state.step;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v =
      state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(state.beta1, state.step);
  const double bc2 = 1.0 - std::pow(state.beta2, state.step);
  params -= (state.lr / bc1) * state.m.cwiseQuotient(
                (state.v / bc2).cwiseSqrt().array().matrix() +
                Eigen::VectorXd::Constant(params.size(), state.eps));
}

GradCheckReport grad_check(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& forward,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&,
                                        const Eigen::VectorXd&)>& pullback,
    const Eigen::VectorXd& x, const Eigen::VectorXd& cotangent, double h,
    double tol) {
  const Eigen::VectorXd analytic = pullback(x, cotangent);
  if (analytic.size() != x.size()) {
    throw ShapeMismatch("pullback result size must match input size");
  }
  GradCheckReport report;
  Eigen::VectorXd probe = x;
  for (int j = 0; j < x.size(); ++j) {
    probe[j] = x[j] + h;
    const double up = cotangent.dot(forward(probe));
    probe[j] = x[j] - h;
    const double dn = cotangent.dot(forward(probe));
    probe[j] = x[j];
    const double numeric = (up - dn) / (2.0 * h);
    const double denom =
        std::max({1.0, std::abs(analytic[j]), std::abs(numeric)});
    const double rel = std::abs(analytic[j] - numeric) / denom;
    report.max_rel_err = std::max(report.max_rel_err, rel);
    if (rel > tol) {
      report.offending.push_back({j, analytic[j], numeric, rel});
      report.pass = false;
    }
  }
  return report;
}

std::string mlp_to_json_text(const Mlp& mlp) {
  json j;
  j["version"] = 1;
  j["dims"] = mlp.config().dims;
  j["hidden"] = to_string(mlp.config().hidden);
  j["output"] = to_string(mlp.config().output);
  std::vector<int> ln(mlp.config().layer_norm.begin(),
                      mlp.config().layer_norm.end());
  j["layer_norm"] = ln;
  j["seed"] = mlp.init_seed();
  j["params"] = std::vector<double>(mlp.params().data(),
                                    mlp.params().data() + mlp.n_params());
  return j.dump();
}

Mlp mlp_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("mlp checkpoint: ") + e.what());
  }
  if (j.value("version", 0) != 1) {
    throw ParseError("mlp checkpoint: unsupported version");
  }
  MlpConfig cfg;
  cfg.dims = j.at("dims").get<std::vector<int>>();
  cfg.hidden = activation_from_string(j.at("hidden").get<std::string>());
  cfg.output = activation_from_string(j.at("output").get<std::string>());
  for (int v : j.at("layer_norm").get<std::vector<int>>()) {
    cfg.layer_norm.push_back(static_cast<char>(v));
  }
  Mlp mlp(cfg, j.value("seed", 0ULL));
  const auto params = j.at("params").get<std::vector<double>>();
  if (static_cast<int>(params.size()) != mlp.n_params()) {
    throw ParseError("mlp checkpoint: parameter count mismatch");
  }
  mlp.mutable_params() =
      Eigen::Map<const Eigen::VectorXd>(params.data(), params.size());
  return mlp;
}

}  // namespace proxyflow
