#include "etcnet/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace etcnet {

double gaussian_entropy_bound(double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be positive");
  return std::log(2.0 * std::numbers::pi * std::numbers::e * sigma2);
}

double sending_probability_bound(double bandwidth, int signal_levels, int msg_len, double sample_freq,
                                 int n_agents, double sigma2) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  if (signal_levels < 2) throw std::invalid_argument("signal_levels must be at least 2");
  if (msg_len < 1) throw std::invalid_argument("msg_len must be positive");
  if (!(sample_freq > 0.0)) throw std::invalid_argument("sample_freq must be positive");
  if (n_agents < 2) throw std::invalid_argument("n_agents must be at least 2");

  const double hx = gaussian_entropy_bound(sigma2);
  if (hx <= 0.0) {
    std::fprintf(stderr,
                 "warning: Gaussian entropy bound %.6g <= 0 for sigma2=%.6g; "
                 "sending probability clipped to 1\n",
                 hx, sigma2);
    return 1.0;
  }
  const double p = 4.0 * bandwidth * std::log2(static_cast<double>(signal_levels)) /
                   (hx * n_agents * (n_agents - 1) * msg_len * sample_freq);
  return std::clamp(p, 0.0, 1.0);
}

double penalty_threshold(double p_sup, double gamma) {
  if (p_sup < 0.0 || p_sup > 1.0) throw std::invalid_argument("p_sup must be in [0,1]");
  if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("gamma must be in [0,1)");
  return p_sup / (1.0 - gamma);
}

BandwidthBudget derive_budget(double bandwidth, int signal_levels, int msg_len, double sample_freq,
                              int n_agents, double sigma2, double gamma) {
  BandwidthBudget b;
  b.bandwidth = bandwidth;
  b.signal_levels = signal_levels;
  b.msg_len = msg_len;
  b.sample_freq = sample_freq;
  b.n_agents = n_agents;
  b.sigma2 = sigma2;
  b.gamma = gamma;
  b.entropy_bound = gaussian_entropy_bound(sigma2);
  b.p_sup = sending_probability_bound(bandwidth, signal_levels, msg_len, sample_freq, n_agents, sigma2);
  b.n_max = b.entropy_bound > 0.0
                ? 4.0 * bandwidth * std::log2(static_cast<double>(signal_levels)) / b.entropy_bound
                : std::numeric_limits<double>::infinity();
  b.c_sup = penalty_threshold(b.p_sup, gamma);
  return b;
}

double VarianceEstimator::update(std::span<const double> components) {
  for (double x : components) {
    if (window_.size() == capacity_) window_.pop_front();
    window_.push_back(x);
  }
  if (window_.size() < 2) return sigma2_;

  double mean = 0.0;
  for (double x : window_) mean += x;
  mean /= static_cast<double>(window_.size());
  double var = 0.0;
  for (double x : window_) var += (x - mean) * (x - mean);
  sigma2_ = var / static_cast<double>(window_.size());
  return sigma2_;
}

ChannelStats channel_stats(long triggers, long steps, const BandwidthBudget& budget) {
  if (steps <= 0) throw std::invalid_argument("steps must be positive");
  ChannelStats stats;
  stats.p_hat = static_cast<double>(triggers) / (static_cast<double>(budget.n_agents) * steps);
  stats.symbol_rate = budget.n_agents * (budget.n_agents - 1) * static_cast<double>(budget.msg_len) *
                      budget.sample_freq * stats.p_hat;
  stats.within_budget = stats.symbol_rate <= budget.n_max;
  return stats;
}

}  // namespace etcnet
