#include "etcnet/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace etcnet {

namespace {

void apply_activation(Activation act, std::vector<double>& v) {
  switch (act) {
    case Activation::kNone:
      break;
    case Activation::kRelu:
      for (double& x : v) x = x > 0.0 ? x : 0.0;
      break;
    case Activation::kTanh:
      for (double& x : v) x = std::tanh(x);
      break;
    case Activation::kSigmoid:
      for (double& x : v) x = 1.0 / (1.0 + std::exp(-x));
      break;
    case Activation::kSoftmax: {
      const double zmax = *std::max_element(v.begin(), v.end());
      double sum = 0.0;
      for (double& x : v) {
        x = std::exp(x - zmax);
        sum += x;
      }
      for (double& x : v) x /= sum;
      break;
    }
  }
}

// d(loss)/d(pre-activation) from d(loss)/d(post-activation).
std::vector<double> activation_backward(Activation act, const std::vector<double>& post,
                                        const std::vector<double>& upstream) {
  std::vector<double> dz(post.size());
  switch (act) {
    case Activation::kNone:
      dz = upstream;
      break;
    case Activation::kRelu:
      for (std::size_t i = 0; i < post.size(); ++i) dz[i] = post[i] > 0.0 ? upstream[i] : 0.0;
      break;
    case Activation::kTanh:
      for (std::size_t i = 0; i < post.size(); ++i) dz[i] = upstream[i] * (1.0 - post[i] * post[i]);
      break;
    case Activation::kSigmoid:
      for (std::size_t i = 0; i < post.size(); ++i) dz[i] = upstream[i] * post[i] * (1.0 - post[i]);
      break;
    case Activation::kSoftmax: {
      double dot = 0.0;
      for (std::size_t i = 0; i < post.size(); ++i) dot += upstream[i] * post[i];
      for (std::size_t i = 0; i < post.size(); ++i) dz[i] = post[i] * (upstream[i] - dot);
      break;
    }
  }
  return dz;
}

}  // namespace

Activation activation_from_string(const std::string& name) {
  if (name == "none") return Activation::kNone;
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "softmax") return Activation::kSoftmax;
  throw std::invalid_argument("unknown activation: " + name);
}

std::string to_string(Activation act) {
  switch (act) {
    case Activation::kNone: return "none";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kSoftmax: return "softmax";
  }
  throw std::logic_error("bad activation enum");
}

void MlpGradient::accumulate(const MlpGradient& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (std::size_t i = 0; i < weights[l].size(); ++i) weights[l][i] += other.weights[l][i];
    for (std::size_t i = 0; i < biases[l].size(); ++i) biases[l][i] += other.biases[l][i];
  }
  for (std::size_t i = 0; i < input.size(); ++i) input[i] += other.input[i];
}

void MlpGradient::scale(double factor) {
  for (auto& layer : weights)
    for (double& x : layer) x *= factor;
  for (auto& layer : biases)
    for (double& x : layer) x *= factor;
  for (double& x : input) x *= factor;
}

Mlp::Mlp(std::vector<int> layer_sizes, std::vector<Activation> activations)
    : sizes_(std::move(layer_sizes)), acts_(std::move(activations)) {
  if (sizes_.size() < 2) throw std::invalid_argument("mlp needs at least one layer");
  if (acts_.size() != sizes_.size() - 1)
    throw std::invalid_argument("mlp needs one activation per layer");
  for (int s : sizes_)
    if (s < 1) throw std::invalid_argument("mlp layer sizes must be positive");
  for (std::size_t l = 0; l + 1 < acts_.size(); ++l)
    if (acts_[l] == Activation::kSoftmax)
      throw std::invalid_argument("softmax is only allowed as the final activation");

  const int layers = num_layers();
  w_.resize(layers);
  b_.resize(layers);
  for (int l = 0; l < layers; ++l) {
    w_[l].assign(static_cast<std::size_t>(sizes_[l + 1]) * sizes_[l], 0.0);
    b_[l].assign(sizes_[l + 1], 0.0);
  }
  adam_.m_weights = w_;
  adam_.v_weights = w_;
  adam_.m_biases = b_;
  adam_.v_biases = b_;
  adam_.step = 0;
}

Mlp Mlp::random_init(std::vector<int> layer_sizes, std::vector<Activation> activations, Rng& rng) {
  Mlp net(std::move(layer_sizes), std::move(activations));
  for (int l = 0; l < net.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.sizes_[l]));
    for (double& w : net.w_[l]) w = rng.uniform(-bound, bound);
  }
  return net;
}

void Mlp::check_input(std::span<const double> input) const {
  if (static_cast<int>(input.size()) != sizes_.front())
    throw std::invalid_argument("layer 0: input length " + std::to_string(input.size()) +
                                ", expected " + std::to_string(sizes_.front()));
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  check_input(input);
  std::vector<double> a(input.begin(), input.end());
  for (int l = 0; l < num_layers(); ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    std::vector<double> z(b_[l]);
    for (int r = 0; r < out; ++r) {
      const double* row = &w_[l][static_cast<std::size_t>(r) * in];
      double acc = 0.0;
      for (int c = 0; c < in; ++c) acc += row[c] * a[c];
      z[r] += acc;
    }
    apply_activation(acts_[l], z);
    a = std::move(z);
  }
  return a;
}

MlpGradient Mlp::backward(std::span<const double> input, std::span<const double> upstream) const {
  check_input(input);
  if (static_cast<int>(upstream.size()) != sizes_.back())
    throw std::invalid_argument("upstream length " + std::to_string(upstream.size()) +
                                ", expected " + std::to_string(sizes_.back()));

  // Forward pass keeping every post-activation.
  std::vector<std::vector<double>> acts(num_layers() + 1);
  acts[0].assign(input.begin(), input.end());
  for (int l = 0; l < num_layers(); ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    std::vector<double> z(b_[l]);
    for (int r = 0; r < out; ++r) {
      const double* row = &w_[l][static_cast<std::size_t>(r) * in];
      double acc = 0.0;
      for (int c = 0; c < in; ++c) acc += row[c] * acts[l][c];
      z[r] += acc;
    }
    apply_activation(acts_[l], z);
    acts[l + 1] = std::move(z);
  }

  MlpGradient grad = zero_gradient();
  std::vector<double> da(upstream.begin(), upstream.end());
  for (int l = num_layers() - 1; l >= 0; --l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const std::vector<double> dz = activation_backward(acts_[l], acts[l + 1], da);
    for (int r = 0; r < out; ++r) {
      double* wrow = &grad.weights[l][static_cast<std::size_t>(r) * in];
      for (int c = 0; c < in; ++c) wrow[c] = dz[r] * acts[l][c];
      grad.biases[l][r] = dz[r];
    }
    std::vector<double> prev(in, 0.0);
    for (int r = 0; r < out; ++r) {
      const double* row = &w_[l][static_cast<std::size_t>(r) * in];
      for (int c = 0; c < in; ++c) prev[c] += row[c] * dz[r];
    }
    da = std::move(prev);
  }
  grad.input = std::move(da);
  return grad;
}

MlpGradient Mlp::zero_gradient() const {
  MlpGradient g;
  g.weights.resize(num_layers());
  g.biases.resize(num_layers());
  for (int l = 0; l < num_layers(); ++l) {
    g.weights[l].assign(w_[l].size(), 0.0);
    g.biases[l].assign(b_[l].size(), 0.0);
  }
  g.input.assign(sizes_.front(), 0.0);
  return g;
}

void Mlp::adam_step(const MlpGradient& grad, double lr) {
  if (lr <= 0.0) throw std::invalid_argument("learning rate must be positive");
  if (grad.weights.size() != w_.size() || grad.biases.size() != b_.size())
    throw std::invalid_argument("gradient layer count mismatch");
  for (int l = 0; l < num_layers(); ++l) {
    if (grad.weights[l].size() != w_[l].size() || grad.biases[l].size() != b_[l].size())
      throw std::invalid_argument("gradient shape mismatch at layer " + std::to_string(l));
    for (double g : grad.weights[l])
      if (!std::isfinite(g)) throw std::runtime_error("non-finite weight gradient at layer " + std::to_string(l));
    for (double g : grad.biases[l])
      if (!std::isfinite(g)) throw std::runtime_error("non-finite bias gradient at layer " + std::to_string(l));
  }

  adam_.step += 1;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(adam_.step));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(adam_.step));
  auto update = [&](std::vector<double>& p, std::vector<double>& m, std::vector<double>& v,
                    const std::vector<double>& g) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g[i];
      v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
      p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + kAdamEps);
    }
  };
  for (int l = 0; l < num_layers(); ++l) {
    update(w_[l], adam_.m_weights[l], adam_.v_weights[l], grad.weights[l]);
    update(b_[l], adam_.m_biases[l], adam_.v_biases[l], grad.biases[l]);
  }
}

bool operator==(const Mlp& a, const Mlp& b) {
  return a.sizes_ == b.sizes_ && a.acts_ == b.acts_ && a.w_ == b.w_ && a.b_ == b.b_;
}

int categorical_sample(std::span<const double> probs, Rng& rng) {
  if (probs.empty()) throw std::invalid_argument("empty probability vector");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw std::invalid_argument("negative or NaN probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw std::invalid_argument("probabilities sum to " + std::to_string(sum));

  const double u = rng.uniform() * sum;
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

double categorical_entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw std::invalid_argument("negative or NaN probability");
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

int argmax(std::span<const double> values) {
  return static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
}

}  // namespace etcnet
