#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace reflexq {

enum class Activation { Tanh, Identity };

/// Fully connected layer, weights stored output-major: weights[j * inputs + i].
struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  Activation activation = Activation::Identity;
  std::vector<double> weights;
  std::vector<double> bias;

  bool operator==(const DenseLayer&) const = default;
};

/// Scratch buffers for forward/backward passes; reuse across calls to avoid allocation.
struct NetWorkspace {
  std::vector<std::vector<double>> activations;  // [0] = input, [L] = output
  std::vector<std::vector<double>> deltas;       // dLoss/dpre-activation per layer
};

/// Multilayer perceptron mapping a state to one Q-value per action.
class QNetwork {
 public:
  QNetwork() = default;
  explicit QNetwork(std::vector<DenseLayer> layers);

  /// tanh hidden layers, identity output, U(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
  static QNetwork init(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed);

  std::vector<std::size_t> layer_sizes() const;
  std::size_t input_dim() const { return layers_.front().inputs; }
  std::size_t output_dim() const { return layers_.back().outputs; }
  std::size_t parameter_count() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  std::vector<double> forward(std::span<const double> input) const;
  /// Forward pass leaving every layer's activation in `ws`; returns the output layer.
  std::span<const double> forward(std::span<const double> input, NetWorkspace& ws) const;

  /// Gradient of 1/2 (target - Q(s, action))^2 w.r.t. all parameters, in parameters() order.
  std::vector<double> gradient(std::span<const double> input, std::size_t action, double target) const;

  /// One SGD step on 1/2 (target - Q(s, action))^2. Returns target - Q before the step.
  /// Throws TrainingDiverged on a non-finite gradient.
  double train_on_target(std::span<const double> input, std::size_t action, double target, double step_size,
                         NetWorkspace& ws);
  double train_on_target(std::span<const double> input, std::size_t action, double target, double step_size);

  /// Flat copy of all parameters: per layer, weights then biases.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  bool operator==(const QNetwork&) const = default;

 private:
  void check_input(std::span<const double> input) const;
  void backward(std::size_t action, double error, NetWorkspace& ws) const;

  std::vector<DenseLayer> layers_;
};

QNetwork clone(const QNetwork& net);

/// Network plus the per-component input scales used to normalize raw states.
struct ModelCheckpoint {
  QNetwork net;
  std::vector<double> input_scale;
  std::vector<double> action_forces;

  bool operator==(const ModelCheckpoint&) const = default;
};

std::string to_text(const ModelCheckpoint& model);
ModelCheckpoint model_from_text(const std::string& text);
void save_model(const ModelCheckpoint& model, const std::filesystem::path& path);
ModelCheckpoint load_model(const std::filesystem::path& path);

}  // namespace reflexq
