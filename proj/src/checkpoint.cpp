#include "etcnet/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace etcnet {

using nlohmann::json;

void save_mlp(const std::filesystem::path& path, const Mlp& net) {
  json doc;
  doc["layer_sizes"] = net.layer_sizes();
  std::vector<std::string> acts;
  for (Activation a : net.activations()) acts.push_back(to_string(a));
  doc["activations"] = acts;
  json weights = json::array(), biases = json::array();
  for (int l = 0; l < net.num_layers(); ++l) {
    weights.push_back(net.weights(l));
    biases.push_back(net.biases(l));
  }
  doc["weights"] = weights;
  doc["biases"] = biases;
  const AdamState& adam = net.adam_state();
  doc["adam"] = {{"m_weights", adam.m_weights},
                 {"v_weights", adam.v_weights},
                 {"m_biases", adam.m_biases},
                 {"v_biases", adam.v_biases},
                 {"step", adam.step}};

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(1) << "\n";
}

Mlp load_mlp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw std::runtime_error("bad network file " + path.string() + ": " + e.what());
  }

  try {
    std::vector<int> sizes = doc.at("layer_sizes").get<std::vector<int>>();
    std::vector<Activation> acts;
    for (const auto& name : doc.at("activations")) acts.push_back(activation_from_string(name.get<std::string>()));
    Mlp net(std::move(sizes), std::move(acts));

    const auto& weights = doc.at("weights");
    const auto& biases = doc.at("biases");
    if (static_cast<int>(weights.size()) != net.num_layers() ||
        static_cast<int>(biases.size()) != net.num_layers())
      throw std::runtime_error("layer count mismatch");
    for (int l = 0; l < net.num_layers(); ++l) {
      std::vector<double> w = weights[l].get<std::vector<double>>();
      std::vector<double> b = biases[l].get<std::vector<double>>();
      if (w.size() != net.weights(l).size())
        throw std::runtime_error("weight shape mismatch at layer " + std::to_string(l));
      if (b.size() != net.biases(l).size())
        throw std::runtime_error("bias shape mismatch at layer " + std::to_string(l));
      net.mutable_weights(l) = std::move(w);
      net.mutable_biases(l) = std::move(b);
    }

    AdamState adam;
    const auto& j = doc.at("adam");
    adam.m_weights = j.at("m_weights").get<std::vector<std::vector<double>>>();
    adam.v_weights = j.at("v_weights").get<std::vector<std::vector<double>>>();
    adam.m_biases = j.at("m_biases").get<std::vector<std::vector<double>>>();
    adam.v_biases = j.at("v_biases").get<std::vector<std::vector<double>>>();
    adam.step = j.at("step").get<long>();
    for (int l = 0; l < net.num_layers(); ++l) {
      if (adam.m_weights.at(l).size() != net.weights(l).size() ||
          adam.v_weights.at(l).size() != net.weights(l).size() ||
          adam.m_biases.at(l).size() != net.biases(l).size() ||
          adam.v_biases.at(l).size() != net.biases(l).size())
        throw std::runtime_error("adam moment shape mismatch at layer " + std::to_string(l));
    }
    net.mutable_adam_state() = std::move(adam);
    return net;
  } catch (const json::exception& e) {
    throw std::runtime_error("bad network file " + path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error("bad network file " + path.string() + ": " + e.what());
  } catch (const std::out_of_range& e) {
    throw std::runtime_error("bad network file " + path.string() + ": " + e.what());
  }
}

}  // namespace etcnet
