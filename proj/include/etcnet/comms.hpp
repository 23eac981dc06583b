#pragma once

#include <optional>
#include <span>
#include <vector>

namespace etcnet {

/// Event-trigger time points of one agent, strictly increasing.
class TriggerSet {
 public:
  void record(int t);
  /// Largest trigger time <= t, or nullopt if the agent has not triggered.
  std::optional<int> latest_at_or_before(int t) const;
  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  const std::vector<int>& times() const { return times_; }
  void clear() { times_.clear(); }

 private:
  std::vector<int> times_;
};

struct CommsOptions {
  /// Ablation: receivers read a zero vector instead of the held message
  /// whenever the sender did not transmit this step.
  bool zero_pad_receivers = false;
  /// Ablation: the gating net sees only the current message, not the one
  /// memorized at the last trigger.
  bool gate_sees_memory = true;
};

/// Per-episode communication state for N agents exchanging fixed-length
/// messages: trigger bookkeeping, the sender-side memory of the last sent
/// message, and each receiver's board of most recently received messages.
///
/// Usage per step follows the three-phase execution: read gate inputs and
/// decide all gates against the previous step's state, then commit all
/// gates at once, then read the receiver boards for the action policies.
class CommsState {
 public:
  CommsState(int n_agents, int msg_len, CommsOptions options = {});

  void begin_episode();

  /// Gating-net input for one agent: [m_now, m_last] (length 2L), or just
  /// m_now (length L) under the gate_sees_memory ablation. Throws if the
  /// sender memory was never initialized (no trigger yet this episode).
  std::vector<double> gate_input(int agent, std::span<const double> current_msg) const;

  /// Applies one step's gating decisions atomically: every agent with
  /// gate=1 gets time t appended to its trigger set, its sender memory
  /// replaced, and its slot on every other agent's board overwritten.
  void commit(int t, std::span<const int> gates, const std::vector<std::vector<double>>& messages);

  /// Concatenated messages available to one agent's action policy, in
  /// sender order, own slot skipped: length (N-1) L. Unfilled slots (and,
  /// under zero_pad_receivers, slots whose sender did not transmit this
  /// step) read as zeros.
  std::vector<double> received_concat(int agent) const;

  bool sender_memory_valid(int agent) const { return memory_valid_[agent]; }
  const std::vector<double>& sender_memory(int agent) const;
  const TriggerSet& triggers(int agent) const { return triggers_[agent]; }
  /// Board slot of `sender` as seen by `receiver`; nullopt before the
  /// sender's first trigger.
  std::optional<std::span<const double>> board_slot(int receiver, int sender) const;

  int n_agents() const { return n_agents_; }
  int msg_len() const { return msg_len_; }
  const CommsOptions& options() const { return options_; }

 private:
  int n_agents_;
  int msg_len_;
  CommsOptions options_;
  int current_time_ = -1;
  std::vector<TriggerSet> triggers_;
  std::vector<std::vector<double>> memory_;          // per sender
  std::vector<bool> memory_valid_;
  std::vector<std::vector<std::vector<double>>> board_;  // [receiver][sender]
  std::vector<std::vector<int>> board_time_;             // trigger time per slot, -1 = never
};

}  // namespace etcnet
