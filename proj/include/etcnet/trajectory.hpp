#pragma once

#include <filesystem>
#include <fstream>
#include <vector>

#include <json.hpp>

namespace etcnet {

/// One line of the line-delimited trajectory dump.
struct DumpRow {
  long t = 0;      // global step index within the dump
  int episode = 0;
  int ep_t = 0;    // step within the episode
  nlohmann::json state;
  std::vector<std::vector<double>> obs;
  std::vector<std::vector<double>> messages;
  std::vector<int> gates;
  std::vector<int> actions;
  std::vector<double> rewards;
  bool done = false;
  nlohmann::json info;
};

class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(const std::filesystem::path& path);
  void write(const DumpRow& row);

 private:
  std::ofstream out_;
};

std::vector<DumpRow> read_trajectory(const std::filesystem::path& path);

}  // namespace etcnet
