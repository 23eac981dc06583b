#include "etcnet/trajectory.hpp"

#include <stdexcept>

namespace etcnet {

using nlohmann::json;

TrajectoryWriter::TrajectoryWriter(const std::filesystem::path& path) : out_(path) {
  if (!out_) throw std::runtime_error("cannot write trajectory dump " + path.string());
}

void TrajectoryWriter::write(const DumpRow& row) {
  json line{{"t", row.t},           {"episode", row.episode}, {"ep_t", row.ep_t},
            {"state", row.state},   {"obs", row.obs},         {"messages", row.messages},
            {"gates", row.gates},   {"actions", row.actions}, {"rewards", row.rewards},
            {"done", row.done},     {"info", row.info}};
  out_ << line.dump() << "\n";
}

std::vector<DumpRow> read_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read trajectory dump " + path.string());
  std::vector<DumpRow> rows;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    lineno += 1;
    if (line.empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error("bad dump line " + std::to_string(lineno) + ": " + e.what());
    }
    DumpRow row;
    row.t = doc.at("t").get<long>();
    row.episode = doc.at("episode").get<int>();
    row.ep_t = doc.at("ep_t").get<int>();
    row.state = doc.at("state");
    row.obs = doc.at("obs").get<std::vector<std::vector<double>>>();
    row.messages = doc.at("messages").get<std::vector<std::vector<double>>>();
    row.gates = doc.at("gates").get<std::vector<int>>();
    row.actions = doc.at("actions").get<std::vector<int>>();
    row.rewards = doc.at("rewards").get<std::vector<double>>();
    row.done = doc.at("done").get<bool>();
    row.info = doc.at("info");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace etcnet
