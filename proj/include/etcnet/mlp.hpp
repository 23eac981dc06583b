#pragma once

#include <span>
#include <string>
#include <vector>

#include "etcnet/rng.hpp"

namespace etcnet {

enum class Activation { kNone, kRelu, kTanh, kSigmoid, kSoftmax };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation act);

/// Gradient of a scalar loss with respect to one Mlp's parameters, plus the
/// gradient with respect to the network input (used to chain encoder and
/// actor through message vectors).
struct MlpGradient {
  std::vector<std::vector<double>> weights;  // per layer, row-major, out x in
  std::vector<std::vector<double>> biases;   // per layer
  std::vector<double> input;                 // d loss / d input

  void accumulate(const MlpGradient& other);
  void scale(double factor);
};

struct AdamState {
  std::vector<std::vector<double>> m_weights, v_weights;
  std::vector<std::vector<double>> m_biases, v_biases;
  long step = 0;
};

/// Plain feed-forward network over doubles. Weights are row-major
/// (output x input). The last layer may use softmax; hidden layers may not.
class Mlp {
 public:
  static constexpr double kAdamBeta1 = 0.9;
  static constexpr double kAdamBeta2 = 0.999;
  static constexpr double kAdamEps = 1e-8;

  Mlp() = default;

  /// Zero-initialized network. Throws std::invalid_argument on an
  /// inconsistent architecture (softmax before the last layer, sizes < 1).
  Mlp(std::vector<int> layer_sizes, std::vector<Activation> activations);

  /// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
  static Mlp random_init(std::vector<int> layer_sizes, std::vector<Activation> activations, Rng& rng);

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(acts_.size()); }

  std::vector<double> forward(std::span<const double> input) const;

  /// Exact gradient of (upstream . output) with respect to all parameters
  /// and the input. upstream is taken as a constant row vector.
  MlpGradient backward(std::span<const double> input, std::span<const double> upstream) const;

  MlpGradient zero_gradient() const;

  /// One Adam update with bias correction. Throws std::runtime_error on a
  /// non-finite gradient component.
  void adam_step(const MlpGradient& grad, double lr);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  const std::vector<Activation>& activations() const { return acts_; }
  const std::vector<double>& weights(int layer) const { return w_[layer]; }
  const std::vector<double>& biases(int layer) const { return b_[layer]; }
  std::vector<double>& mutable_weights(int layer) { return w_[layer]; }
  std::vector<double>& mutable_biases(int layer) { return b_[layer]; }
  const AdamState& adam_state() const { return adam_; }
  AdamState& mutable_adam_state() { return adam_; }
  long adam_steps() const { return adam_.step; }

  friend bool operator==(const Mlp& a, const Mlp& b);

 private:
  void check_input(std::span<const double> input) const;

  std::vector<int> sizes_;
  std::vector<Activation> acts_;
  std::vector<std::vector<double>> w_;
  std::vector<std::vector<double>> b_;
  AdamState adam_;
};

/// Sample an index from a probability vector. The vector must be
/// nonnegative and sum to 1 within 1e-6.
int categorical_sample(std::span<const double> probs, Rng& rng);

/// Shannon entropy in nats with the 0 log 0 := 0 convention.
double categorical_entropy(std::span<const double> probs);

int argmax(std::span<const double> values);

}  // namespace etcnet
