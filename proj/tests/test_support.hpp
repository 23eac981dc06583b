#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "etcnet/mlp.hpp"

namespace etcnet::test {

/// Scratch directory under the build tree, wiped per test that uses it.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "etcnet_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

/// Central finite differences of a scalar function of one Mlp parameter.
/// Perturbs in place, so the net is passed by mutable reference.
template <typename Loss>
double central_difference_weight(Mlp& net, int layer, std::size_t index, double h, Loss loss) {
  double& w = net.mutable_weights(layer)[index];
  const double saved = w;
  w = saved + h;
  const double hi = loss();
  w = saved - h;
  const double lo = loss();
  w = saved;
  return (hi - lo) / (2.0 * h);
}

template <typename Loss>
double central_difference_bias(Mlp& net, int layer, std::size_t index, double h, Loss loss) {
  double& b = net.mutable_biases(layer)[index];
  const double saved = b;
  b = saved + h;
  const double hi = loss();
  b = saved - h;
  const double lo = loss();
  b = saved;
  return (hi - lo) / (2.0 * h);
}

/// Standard gradient-check acceptance: tiny absolute error or small
/// relative error.
inline bool grad_close(double analytic, double numeric, double rel_tol = 1e-4, double abs_tol = 1e-9) {
  const double diff = std::abs(analytic - numeric);
  if (diff <= abs_tol) return true;
  return diff <= rel_tol * std::max(std::abs(analytic), std::abs(numeric));
}

/// Finite-difference check of every parameter of `net` against the
/// analytic gradient for the scalar loss upstream . net(input).
/// Returns the worst offender count (0 = pass).
inline int check_gradients(Mlp& net, const std::vector<double>& input, const std::vector<double>& upstream,
                           double h = 1e-5, double rel_tol = 1e-4) {
  const MlpGradient grad = net.backward(input, upstream);
  auto loss = [&]() {
    const std::vector<double> out = net.forward(input);
    double acc = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) acc += upstream[i] * out[i];
    return acc;
  };
  int failures = 0;
  for (int l = 0; l < net.num_layers(); ++l) {
    for (std::size_t k = 0; k < net.weights(l).size(); ++k) {
      const double fd = central_difference_weight(net, l, k, h, loss);
      if (!grad_close(grad.weights[l][k], fd, rel_tol)) failures += 1;
    }
    for (std::size_t k = 0; k < net.biases(l).size(); ++k) {
      const double fd = central_difference_bias(net, l, k, h, loss);
      if (!grad_close(grad.biases[l][k], fd, rel_tol)) failures += 1;
    }
  }
  return failures;
}

}  // namespace etcnet::test
