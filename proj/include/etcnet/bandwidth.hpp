#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

namespace etcnet {

/// Channel budget and the quantities derived from it. The chain is:
/// a Gaussian max-entropy bound on the message entropy caps the symbol
/// rate the channel can carry, which caps the per-step sending
/// probability, which caps the expected discounted number of gate opens.
struct BandwidthBudget {
  double bandwidth = 0.0;     // B, bit/s
  int signal_levels = 2;      // K
  int msg_len = 0;            // L, symbols per message
  double sample_freq = 0.0;   // F, Hz
  int n_agents = 0;           // N
  double sigma2 = 0.0;        // message variance estimate
  double gamma = 0.0;         // discount factor

  double entropy_bound = 0.0;  // ln(2 pi e sigma^2), nats
  double n_max = 0.0;          // max symbols per second
  double p_sup = 0.0;          // per-step sending probability cap
  double c_sup = 0.0;          // discounted penalty threshold
};

/// ln(2 pi e sigma^2). The natural log (not the 1/2-scaled differential
/// entropy) is what reproduces the published budget percentages.
double gaussian_entropy_bound(double sigma2);

/// clip(4 B log2(K) / (ln(2 pi e sigma^2) N (N-1) L F), 0, 1).
/// A degenerate entropy bound (<= 0, sigma^2 too small) clips to 1 and
/// warns on stderr.
double sending_probability_bound(double bandwidth, int signal_levels, int msg_len, double sample_freq,
                                 int n_agents, double sigma2);

/// C_sup = p_sup / (1 - gamma). Requires 0 <= gamma < 1.
double penalty_threshold(double p_sup, double gamma);

BandwidthBudget derive_budget(double bandwidth, int signal_levels, int msg_len, double sample_freq,
                              int n_agents, double sigma2, double gamma);

/// Sliding-window estimate of the scalar message variance, pooled over all
/// agents and vector components.
class VarianceEstimator {
 public:
  explicit VarianceEstimator(std::size_t capacity, double initial_sigma2 = 1.0)
      : capacity_(capacity), sigma2_(initial_sigma2) {}

  /// Appends all message components (evicting the oldest) and returns the
  /// population variance of the window. With fewer than 2 components the
  /// previous estimate is kept.
  double update(std::span<const double> components);

  double sigma2() const { return sigma2_; }
  std::size_t window_size() const { return window_.size(); }
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::deque<double> window_;
  double sigma2_;
};

struct ChannelStats {
  double p_hat = 0.0;        // empirical per-agent-step send probability
  double symbol_rate = 0.0;  // N (N-1) L F p_hat
  bool within_budget = false;
};

/// Empirical channel occupancy of a finished trace. triggers counts gate
/// opens summed over agents; steps counts environment steps.
ChannelStats channel_stats(long triggers, long steps, const BandwidthBudget& budget);

}  // namespace etcnet
