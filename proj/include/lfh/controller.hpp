#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lfh/datagen.hpp"
#include "lfh/kinematics.hpp"
#include "lfh/lidar.hpp"

namespace lfh {

struct DenseLayer {
  Eigen::MatrixXd w;  // out x in
  Eigen::VectorXd b;  // out
  friend bool operator==(const DenseLayer& a, const DenseLayer& b) { return a.w == b.w && a.b == b.b; }
};

/// Fully connected ReLU network with a linear output layer.
struct MLPParams {
  std::vector<DenseLayer> layers;
  std::uint64_t seed = 0;

  std::vector<int> dims() const;
  int input_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.front().w.cols()); }
  /// Same shapes, all entries zero.
  MLPParams zeros_like() const;
  bool all_finite() const;
  friend bool operator==(const MLPParams&, const MLPParams&) = default;
};

inline constexpr int kHiddenWidth = 256;
inline constexpr int kHiddenLayers = 3;
inline constexpr int kOutputDim = 2;

/// beam_count scan values, current (v, omega), local goal (x, y).
inline int input_dim(const ScanSpec& spec) { return spec.beam_count + 4; }

/// {input, 256, 256, 256, 2}.
std::vector<int> default_dims(const ScanSpec& spec = {});

/// Glorot-uniform weights, zero biases, deterministic per seed.
MLPParams init_params(std::uint64_t seed, std::span<const int> dims);
MLPParams init_params(std::uint64_t seed, const ScanSpec& spec = {});

/// Network output (v_norm, omega_norm) before any clamping.
Eigen::Vector2d forward(const MLPParams& params, std::span<const double> input);

/// Column-major batch: one sample per column.
struct Batch {
  Eigen::MatrixXd inputs;   // input_dim x B
  Eigen::MatrixXd targets;  // 2 x B
};

/// Packs one sample into a network input vector.
void pack_input(const TrainingSample& s, std::span<double> out);
Batch make_batch(const Dataset& ds, std::span<const std::size_t> indices);
Batch make_batch(const Dataset& ds);

/// Mean squared error over all outputs of the batch: sum((y_hat - y)^2) / (2 B).
double loss(const MLPParams& params, const Batch& batch);
/// Loss and its gradient by reverse-mode differentiation. ReLU'(0) is taken as 0.
double loss_and_grad(const MLPParams& params, const Batch& batch, MLPParams& grad);

enum class Optimizer { Sgd, Momentum };

struct TrainConfig {
  double learning_rate = 0.01;
  int batch_size = 32;
  int epochs = 60;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::Momentum;
  double momentum = 0.9;

  void validate() const;
};

struct TrainResult {
  MLPParams params;
  std::vector<double> epoch_loss;  // mean mini-batch loss per epoch
};

/// Shuffled mini-batch gradient descent, deterministic per seed. Starts from
/// init_params(cfg.seed) unless `initial` is given.
TrainResult train(const Dataset& ds, const TrainConfig& cfg, const MLPParams* initial = nullptr);

/// Normalizes raw inputs, evaluates the network and maps the output back to a clamped control.
/// `goal` is in the robot frame in meters.
Control predict(const MLPParams& params, const Scan& scan, Control current, Point2 goal,
                const Limits& limits = {}, double goal_dist = 1.0);

/// JSON model file: {"dims":[...], "seed":N, "layers":[{"w":[row-major], "b":[...]}, ...]}.
void save_model(const MLPParams& params, const std::filesystem::path& path);
/// Throws when the file's dims differ from `expected_dims` (if non-empty).
MLPParams load_model(const std::filesystem::path& path, std::span<const int> expected_dims = {});

}  // namespace lfh
