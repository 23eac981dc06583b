#include "etcnet/comms.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace etcnet {

void TriggerSet::record(int t) {
  if (!times_.empty() && t <= times_.back())
    throw std::invalid_argument("trigger times must be strictly increasing");
  times_.push_back(t);
}

std::optional<int> TriggerSet::latest_at_or_before(int t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return std::nullopt;
  return *(it - 1);
}

CommsState::CommsState(int n_agents, int msg_len, CommsOptions options)
    : n_agents_(n_agents), msg_len_(msg_len), options_(options) {
  if (n_agents < 2) throw std::invalid_argument("need at least 2 agents");
  if (msg_len < 1) throw std::invalid_argument("msg_len must be positive");
  begin_episode();
}

void CommsState::begin_episode() {
  current_time_ = -1;
  triggers_.assign(n_agents_, TriggerSet{});
  memory_.assign(n_agents_, std::vector<double>(msg_len_, 0.0));
  memory_valid_.assign(n_agents_, false);
  board_.assign(n_agents_, std::vector<std::vector<double>>(n_agents_, std::vector<double>(msg_len_, 0.0)));
  board_time_.assign(n_agents_, std::vector<int>(n_agents_, -1));
}

std::vector<double> CommsState::gate_input(int agent, std::span<const double> current_msg) const {
  if (static_cast<int>(current_msg.size()) != msg_len_)
    throw std::invalid_argument("message length " + std::to_string(current_msg.size()) +
                                ", expected " + std::to_string(msg_len_));
  std::vector<double> input(current_msg.begin(), current_msg.end());
  if (!options_.gate_sees_memory) return input;
  if (!memory_valid_[agent])
    throw std::logic_error("gate_input before first trigger of agent " + std::to_string(agent));
  input.insert(input.end(), memory_[agent].begin(), memory_[agent].end());
  return input;
}

void CommsState::commit(int t, std::span<const int> gates, const std::vector<std::vector<double>>& messages) {
  if (static_cast<int>(gates.size()) != n_agents_ || static_cast<int>(messages.size()) != n_agents_)
    throw std::invalid_argument("need one gate and one message per agent");
  for (const auto& m : messages)
    if (static_cast<int>(m.size()) != msg_len_) throw std::invalid_argument("bad message length in commit");
  if (t <= current_time_) throw std::invalid_argument("commit time must advance");
  current_time_ = t;

  for (int i = 0; i < n_agents_; ++i) {
    if (gates[i] == 0) continue;
    triggers_[i].record(t);
    memory_[i] = messages[i];
    memory_valid_[i] = true;
    for (int j = 0; j < n_agents_; ++j) {
      if (j == i) continue;
      board_[j][i] = messages[i];
      board_time_[j][i] = t;
    }
  }
}

std::vector<double> CommsState::received_concat(int agent) const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_agents_ - 1) * msg_len_);
  for (int sender = 0; sender < n_agents_; ++sender) {
    if (sender == agent) continue;
    const bool have = board_time_[agent][sender] >= 0;
    const bool fresh = board_time_[agent][sender] == current_time_;
    if (have && (!options_.zero_pad_receivers || fresh)) {
      out.insert(out.end(), board_[agent][sender].begin(), board_[agent][sender].end());
    } else {
      out.insert(out.end(), msg_len_, 0.0);
    }
  }
  return out;
}

const std::vector<double>& CommsState::sender_memory(int agent) const {
  if (!memory_valid_[agent])
    throw std::logic_error("sender memory of agent " + std::to_string(agent) + " not initialized");
  return memory_[agent];
}

std::optional<std::span<const double>> CommsState::board_slot(int receiver, int sender) const {
  if (board_time_[receiver][sender] < 0) return std::nullopt;
  return std::span<const double>(board_[receiver][sender]);
}

}  // namespace etcnet
