#include "lfh/controller.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>
#include <stdexcept>

namespace lfh {

using nlohmann::json;

std::vector<int> MLPParams::dims() const {
  std::vector<int> d;
  if (layers.empty()) return d;
  d.push_back(static_cast<int>(layers.front().w.cols()));
  for (const DenseLayer& l : layers) d.push_back(static_cast<int>(l.w.rows()));
  return d;
}

MLPParams MLPParams::zeros_like() const {
  MLPParams z;
  z.seed = seed;
  for (const DenseLayer& l : layers) {
    z.layers.push_back({Eigen::MatrixXd::Zero(l.w.rows(), l.w.cols()), Eigen::VectorXd::Zero(l.b.size())});
  }
  return z;
}

bool MLPParams::all_finite() const {
  return std::all_of(layers.begin(), layers.end(),
                     [](const DenseLayer& l) { return l.w.allFinite() && l.b.allFinite(); });
}

std::vector<int> default_dims(const ScanSpec& spec) {
  std::vector<int> d{input_dim(spec)};
  for (int i = 0; i < kHiddenLayers; ++i) d.push_back(kHiddenWidth);
  d.push_back(kOutputDim);
  return d;
}

MLPParams init_params(std::uint64_t seed, std::span<const int> dims) {
  if (dims.size() < 2) throw std::invalid_argument("init_params: need at least input and output dims");
  MLPParams p;
  p.seed = seed;
  Rng rng(seed);
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const int fan_in = dims[i], fan_out = dims[i + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseLayer l{Eigen::MatrixXd(fan_out, fan_in), Eigen::VectorXd::Zero(fan_out)};
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) l.w(r, c) = dist(rng);
    }
    p.layers.push_back(std::move(l));
  }
  return p;
}

MLPParams init_params(std::uint64_t seed, const ScanSpec& spec) {
  const std::vector<int> d = default_dims(spec);
  return init_params(seed, d);
}

Eigen::Vector2d forward(const MLPParams& params, std::span<const double> input) {
  if (params.layers.empty() || static_cast<int>(input.size()) != params.input_dim()) {
    throw std::invalid_argument("forward: input dimension mismatch");
  }
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(input.data(), static_cast<Eigen::Index>(input.size()));
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const DenseLayer& l = params.layers[i];
    Eigen::VectorXd z = l.w * a + l.b;
    if (i + 1 < params.layers.size()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  if (a.size() != kOutputDim) throw std::invalid_argument("forward: network must have two outputs");
  return a;
}

void pack_input(const TrainingSample& s, std::span<double> out) {
  if (out.size() != s.scan.size() + 4) throw std::invalid_argument("pack_input: wrong buffer size");
  std::copy(s.scan.begin(), s.scan.end(), out.begin());
  const std::size_t n = s.scan.size();
  out[n] = s.v;
  out[n + 1] = s.omega;
  out[n + 2] = s.goal.x;
  out[n + 3] = s.goal.y;
}

Batch make_batch(const Dataset& ds, std::span<const std::size_t> indices) {
  const int dim = input_dim(ds.meta.spec);
  Batch b{Eigen::MatrixXd(dim, static_cast<Eigen::Index>(indices.size())),
          Eigen::MatrixXd(kOutputDim, static_cast<Eigen::Index>(indices.size()))};
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const TrainingSample& s = ds.samples.at(indices[j]);
    const auto col = static_cast<Eigen::Index>(j);
    pack_input(s, std::span<double>(b.inputs.col(col).data(), static_cast<std::size_t>(dim)));
    b.targets(0, col) = s.label_v;
    b.targets(1, col) = s.label_omega;
  }
  return b;
}

Batch make_batch(const Dataset& ds) {
  std::vector<std::size_t> idx(ds.samples.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return make_batch(ds, idx);
}

namespace {

// Pre-activations of every layer for a batch; the last entry is the network output.
std::vector<Eigen::MatrixXd> forward_batch(const MLPParams& params, const Eigen::MatrixXd& x) {
  if (params.layers.empty() || x.rows() != params.input_dim()) {
    throw std::invalid_argument("batch input dimension mismatch");
  }
  std::vector<Eigen::MatrixXd> z(params.layers.size());
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const DenseLayer& l = params.layers[i];
    if (i == 0) {
      z[i].noalias() = l.w * x;
    } else {
      z[i].noalias() = l.w * z[i - 1].cwiseMax(0.0);
    }
    z[i].colwise() += l.b;
  }
  return z;
}

}  // namespace

double loss(const MLPParams& params, const Batch& batch) {
  if (batch.inputs.cols() == 0) throw std::invalid_argument("loss: empty batch");
  const auto z = forward_batch(params, batch.inputs);
  return (z.back() - batch.targets).squaredNorm() / static_cast<double>(batch.targets.size());
}

double loss_and_grad(const MLPParams& params, const Batch& batch, MLPParams& grad) {
  const Eigen::Index n = batch.inputs.cols();
  if (n == 0) throw std::invalid_argument("loss_and_grad: empty batch");
  const auto z = forward_batch(params, batch.inputs);
  const Eigen::MatrixXd err = z.back() - batch.targets;
  const auto count = static_cast<double>(batch.targets.size());
  const double value = err.squaredNorm() / count;

  if (grad.layers.size() != params.layers.size()) grad = params.zeros_like();
  // delta = dL/dz for the current layer.
  Eigen::MatrixXd delta = (2.0 / count) * err;
  for (std::size_t k = params.layers.size(); k-- > 0;) {
    DenseLayer& g = grad.layers[k];
    if (k == 0) {
      g.w.noalias() = delta * batch.inputs.transpose();
    } else {
      g.w.noalias() = delta * z[k - 1].cwiseMax(0.0).transpose();
    }
    g.b = delta.rowwise().sum();
    if (k > 0) {
      Eigen::MatrixXd back = params.layers[k].w.transpose() * delta;
      delta = back.cwiseProduct((z[k - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return value;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning_rate must be non-negative");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be at least 1");
  if (epochs < 0) throw std::invalid_argument("epochs must be non-negative");
}

TrainResult train(const Dataset& ds, const TrainConfig& cfg, const MLPParams* initial) {
  cfg.validate();
  if (ds.samples.empty()) throw std::invalid_argument("train: empty dataset");
  TrainResult result;
  result.params = initial ? *initial : init_params(cfg.seed, ds.meta.spec);
  MLPParams& p = result.params;
  if (p.input_dim() != input_dim(ds.meta.spec)) throw std::invalid_argument("train: model/dataset dims differ");

  const Batch all = make_batch(ds);
  MLPParams grad = p.zeros_like();
  MLPParams velocity = p.zeros_like();
  const bool use_momentum = cfg.optimizer == Optimizer::Momentum;

  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Eigen::Index> order(ds.samples.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto bs = static_cast<Eigen::Index>(cfg.batch_size);
  Batch batch;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0.0;
    int batches = 0;
    for (Eigen::Index start = 0; start < static_cast<Eigen::Index>(order.size()); start += bs) {
      const Eigen::Index m = std::min<Eigen::Index>(bs, static_cast<Eigen::Index>(order.size()) - start);
      batch.inputs.resize(all.inputs.rows(), m);
      batch.targets.resize(kOutputDim, m);
      for (Eigen::Index j = 0; j < m; ++j) {
        batch.inputs.col(j) = all.inputs.col(order[static_cast<std::size_t>(start + j)]);
        batch.targets.col(j) = all.targets.col(order[static_cast<std::size_t>(start + j)]);
      }
      sum += loss_and_grad(p, batch, grad);
      ++batches;
      if (cfg.learning_rate == 0.0) continue;
      for (std::size_t k = 0; k < p.layers.size(); ++k) {
        if (use_momentum) {
          velocity.layers[k].w = cfg.momentum * velocity.layers[k].w - cfg.learning_rate * grad.layers[k].w;
          velocity.layers[k].b = cfg.momentum * velocity.layers[k].b - cfg.learning_rate * grad.layers[k].b;
          p.layers[k].w += velocity.layers[k].w;
          p.layers[k].b += velocity.layers[k].b;
        } else {
          p.layers[k].w -= cfg.learning_rate * grad.layers[k].w;
          p.layers[k].b -= cfg.learning_rate * grad.layers[k].b;
        }
      }
    }
    result.epoch_loss.push_back(sum / batches);
  }
  return result;
}

Control predict(const MLPParams& params, const Scan& scan, Control current, Point2 goal, const Limits& limits,
                double goal_dist) {
  const int n = scan.spec.beam_count;
  std::vector<double> input(static_cast<std::size_t>(n) + 4);
  for (int k = 0; k < n; ++k) input[static_cast<std::size_t>(k)] = normalize_range(scan[k], scan.spec);
  const auto m = static_cast<std::size_t>(n);
  // Inputs are clamped to the ranges seen in training.
  input[m] = std::clamp(normalize_v(current.v, limits), 0.0, 1.0);
  input[m + 1] = std::clamp(normalize_omega(current.omega, limits), -1.0, 1.0);
  input[m + 2] = goal.x / goal_dist;
  input[m + 3] = goal.y / goal_dist;
  const Eigen::Vector2d out = forward(params, input);
  return limits.clamp({denormalize_v(out[0], limits), denormalize_omega(out[1], limits)});
}

void save_model(const MLPParams& params, const std::filesystem::path& path) {
  json layers = json::array();
  for (const DenseLayer& l : params.layers) {
    std::vector<double> w(static_cast<std::size_t>(l.w.size()));
    for (Eigen::Index r = 0; r < l.w.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.w.cols(); ++c) w[static_cast<std::size_t>(r * l.w.cols() + c)] = l.w(r, c);
    }
    layers.push_back({{"w", w}, {"b", std::vector<double>(l.b.data(), l.b.data() + l.b.size())}});
  }
  const json j = {{"dims", params.dims()}, {"seed", params.seed}, {"layers", layers}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << j.dump() << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

MLPParams load_model(const std::filesystem::path& path, std::span<const int> expected_dims) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed model file " + path.string() + ": " + e.what());
  }
  MLPParams p;
  try {
    const auto dims = j.at("dims").get<std::vector<int>>();
    if (!expected_dims.empty() && !std::equal(dims.begin(), dims.end(), expected_dims.begin(), expected_dims.end())) {
      throw std::invalid_argument("model dims do not match the expected architecture");
    }
    p.seed = j.at("seed").get<std::uint64_t>();
    const json& layers = j.at("layers");
    if (dims.size() < 2 || layers.size() != dims.size() - 1) throw std::invalid_argument("model layer count mismatch");
    for (std::size_t k = 0; k < layers.size(); ++k) {
      const auto w = layers[k].at("w").get<std::vector<double>>();
      const auto b = layers[k].at("b").get<std::vector<double>>();
      const int in_dim = dims[k], out_dim = dims[k + 1];
      if (w.size() != static_cast<std::size_t>(in_dim) * static_cast<std::size_t>(out_dim) ||
          b.size() != static_cast<std::size_t>(out_dim)) {
        throw std::invalid_argument("model layer " + std::to_string(k) + " has wrong size");
      }
      DenseLayer l{Eigen::MatrixXd(out_dim, in_dim), Eigen::VectorXd(out_dim)};
      for (int r = 0; r < out_dim; ++r) {
        for (int c = 0; c < in_dim; ++c) l.w(r, c) = w[static_cast<std::size_t>(r) * in_dim + c];
        l.b(r) = b[static_cast<std::size_t>(r)];
      }
      p.layers.push_back(std::move(l));
    }
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed model file " + path.string() + ": " + e.what());
  }
  return p;
}

}  // namespace lfh
