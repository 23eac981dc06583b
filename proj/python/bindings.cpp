#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <json.hpp>

#include "etcnet/analysis.hpp"
#include "etcnet/bandwidth.hpp"
#include "etcnet/config.hpp"
#include "etcnet/env_nav.hpp"
#include "etcnet/env_pp.hpp"
#include "etcnet/training.hpp"

namespace py = pybind11;
using namespace etcnet;

namespace {

ExperimentConfig config_from_json_str(const std::string& text) {
  if (text.empty()) return ExperimentConfig{};
  return config_from_json(nlohmann::json::parse(text));
}

py::dict budget_dict(const BandwidthBudget& b) {
  py::dict d;
  d["bandwidth"] = b.bandwidth;
  d["signal_levels"] = b.signal_levels;
  d["msg_len"] = b.msg_len;
  d["sample_freq"] = b.sample_freq;
  d["n_agents"] = b.n_agents;
  d["sigma2"] = b.sigma2;
  d["gamma"] = b.gamma;
  d["entropy_bound"] = b.entropy_bound;
  d["n_max"] = b.n_max;
  d["p_sup"] = b.p_sup;
  d["c_sup"] = b.c_sup;
  return d;
}

py::dict run_result_dict(const RunResult& r) {
  py::dict d;
  d["out_dir"] = r.out_dir.string();
  d["checkpoint_dir"] = r.checkpoint_dir.string();
  d["steps_run"] = r.steps_run;
  d["final_eval_mean_steps"] = r.final_eval_mean_steps;
  d["final_send_prob"] = r.final_send_prob;
  d["final_sigma2"] = r.final_sigma2;
  d["final_p_sup"] = r.final_p_sup;
  d["final_c_sup"] = r.final_c_sup;
  d["final_lambda"] = r.final_lambda;
  return d;
}

py::dict eval_report_dict(const EvalReport& r) {
  py::dict d;
  d["episodes"] = r.episodes;
  d["mean_steps"] = r.mean_steps;
  d["std_steps"] = r.std_steps;
  d["send_prob"] = r.send_prob;
  d["trigger_counts"] = r.trigger_counts;
  d["symbol_rate"] = r.symbol_rate;
  d["within_budget"] = r.within_budget;
  return d;
}

py::tuple env_step_tuple(const EnvStep& out) {
  return py::make_tuple(out.rewards, out.obs, out.done, py::str(out.info.dump()));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Event-triggered multi-agent communication under a bandwidth budget";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<DivergenceError>(m, "DivergenceError");

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform", [](Rng& r) { return r.uniform(); })
      .def("uniform_int", &Rng::uniform_int, py::arg("n"))
      .def("fork", &Rng::fork, py::arg("tag"));

  // Budget calculus.
  m.def("gaussian_entropy_bound", &gaussian_entropy_bound, py::arg("sigma2"));
  m.def("sending_probability_bound", &sending_probability_bound, py::arg("bandwidth"),
        py::arg("signal_levels"), py::arg("msg_len"), py::arg("sample_freq"), py::arg("n_agents"),
        py::arg("sigma2"));
  m.def("penalty_threshold", &penalty_threshold, py::arg("p_sup"), py::arg("gamma"));
  m.def(
      "derive_budget",
      [](double bandwidth, int levels, int msg_len, double freq, int agents, double sigma2, double gamma) {
        return budget_dict(derive_budget(bandwidth, levels, msg_len, freq, agents, sigma2, gamma));
      },
      py::arg("bandwidth"), py::arg("signal_levels"), py::arg("msg_len"), py::arg("sample_freq"),
      py::arg("n_agents"), py::arg("sigma2"), py::arg("gamma") = 0.95);

  // Networks.
  py::class_<Mlp>(m, "Mlp")
      .def(py::init([](const std::vector<int>& sizes, const std::vector<std::string>& acts) {
             std::vector<Activation> a;
             for (const auto& s : acts) a.push_back(activation_from_string(s));
             return Mlp(sizes, a);
           }),
           py::arg("layer_sizes"), py::arg("activations"))
      .def_static(
          "random_init",
          [](const std::vector<int>& sizes, const std::vector<std::string>& acts, std::uint64_t seed) {
            std::vector<Activation> a;
            for (const auto& s : acts) a.push_back(activation_from_string(s));
            Rng rng(seed);
            return Mlp::random_init(sizes, a, rng);
          },
          py::arg("layer_sizes"), py::arg("activations"), py::arg("seed"))
      .def("forward",
           [](const Mlp& net, const std::vector<double>& input) { return net.forward(input); })
      .def("input_size", &Mlp::input_size)
      .def("output_size", &Mlp::output_size);

  m.def("categorical_entropy",
        [](const std::vector<double>& probs) { return categorical_entropy(probs); });
  m.def("categorical_sample",
        [](const std::vector<double>& probs, Rng& rng) { return categorical_sample(probs, rng); });

  // Environments.
  py::class_<NavEnv>(m, "NavEnv")
      .def(py::init([](int grid_size, int step_cap, double p_move) {
             return NavEnv(NavConfig{grid_size, step_cap, p_move});
           }),
           py::arg("grid_size") = 10, py::arg("step_cap") = 100, py::arg("p_move") = 0.1)
      .def("reset", [](NavEnv& env, Rng& rng) { return env.reset(rng); })
      .def("step",
           [](NavEnv& env, const std::vector<int>& actions, Rng& rng) {
             return env_step_tuple(env.step(actions, rng));
           })
      .def("obs_dim", &NavEnv::obs_dim)
      .def("n_agents", &NavEnv::n_agents)
      .def("state", [](const NavEnv& env) { return py::str(env.state_json().dump()); });

  py::class_<PpEnv>(m, "PpEnv")
      .def(py::init([](int grid_size, int n_predators, int n_preys, int step_cap) {
             return PpEnv(PpConfig{grid_size, n_predators, n_preys, step_cap});
           }),
           py::arg("grid_size") = 10, py::arg("n_predators") = 3, py::arg("n_preys") = 1,
           py::arg("step_cap") = 200)
      .def("reset", [](PpEnv& env, Rng& rng) { return env.reset(rng); })
      .def("step",
           [](PpEnv& env, const std::vector<int>& actions, Rng& rng) {
             return env_step_tuple(env.step(actions, rng));
           })
      .def("obs_dim", &PpEnv::obs_dim)
      .def("n_agents", &PpEnv::n_agents)
      .def("state", [](const PpEnv& env) { return py::str(env.state_json().dump()); });

  // Update arithmetic.
  m.def("td_error", &td_error, py::arg("reward"), py::arg("v_next"), py::arg("v_now"), py::arg("done"),
        py::arg("gamma"));
  m.def("shaped_reward", &shaped_reward, py::arg("reward"), py::arg("lambda_"), py::arg("gate"));
  m.def("lambda_update", &lambda_update, py::arg("lambda_"), py::arg("eta"), py::arg("v_penalty"),
        py::arg("c_sup"));

  // Training runs.
  // The GIL is dropped for the C++ work only; the result dicts are built
  // with it re-acquired.
  m.def(
      "run_stage1",
      [](const std::string& config_json, long seed, const std::string& out_dir) {
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_stage1(config_from_json_str(config_json), seed, out_dir);
        }
        return run_result_dict(r);
      },
      py::arg("config_json"), py::arg("seed"), py::arg("out_dir"));
  m.def(
      "run_stage2",
      [](const std::string& config_json, long seed, const std::string& out_dir) {
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_stage2(config_from_json_str(config_json), seed, out_dir);
        }
        return run_result_dict(r);
      },
      py::arg("config_json"), py::arg("seed"), py::arg("out_dir"));
  m.def(
      "run_baseline",
      [](const std::string& config_json, long seed, const std::string& out_dir) {
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_baseline(config_from_json_str(config_json), seed, out_dir);
        }
        return run_result_dict(r);
      },
      py::arg("config_json"), py::arg("seed"), py::arg("out_dir"));

  m.def(
      "evaluate_checkpoint",
      [](const std::string& checkpoint_dir, int episodes, long seed, bool greedy,
         const std::string& dump_path) {
        EvalReport report;
        {
          py::gil_scoped_release release;
          const Checkpoint ckpt = load_checkpoint(checkpoint_dir);
          const std::filesystem::path dump(dump_path);
          report = evaluate_checkpoint(ckpt, episodes, seed, greedy, dump_path.empty() ? nullptr : &dump);
        }
        return eval_report_dict(report);
      },
      py::arg("checkpoint_dir"), py::arg("episodes") = 1000, py::arg("seed") = 0,
      py::arg("greedy") = false, py::arg("dump_path") = std::string());

  // Analysis.
  m.def(
      "pca2d",
      [](const std::vector<std::vector<double>>& obs, const std::vector<int>& gates) {
        const Pca2d p = pca2d(obs, gates);
        py::dict d;
        d["points"] = p.points;
        d["gates"] = p.gates;
        d["explained"] = p.explained;
        d["total_variance"] = p.total_variance;
        return d;
      },
      py::arg("observations"), py::arg("gates") = std::vector<int>{});
}
