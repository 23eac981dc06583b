#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "etcnet/analysis.hpp"
#include "etcnet/bandwidth.hpp"
#include "etcnet/config.hpp"
#include "etcnet/csv.hpp"
#include "etcnet/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;

struct CommonArgs {
  std::string config_path;
  std::optional<long> seed;
  std::string out_dir;
  std::optional<double> bandwidth;
  std::optional<long> steps;
  std::string ablation;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Experiment config file (JSON)");
  cmd->add_option("--seed", args.seed, "Seed override (first entry of the config's seed list otherwise)");
  cmd->add_option("--out", args.out_dir, "Run output directory");
  cmd->add_option("--bandwidth", args.bandwidth, "Channel bandwidth override, bit/s");
  cmd->add_option("--steps", args.steps, "Training step override");
  cmd->add_option("--ablation", args.ablation, "Ablation switch: zoh-pad or gate-no-memory")
      ->check(CLI::IsMember({"none", "zoh-pad", "gate-no-memory"}));
}

etcnet::ExperimentConfig build_config(const CommonArgs& args) {
  etcnet::ExperimentConfig cfg;
  if (!args.config_path.empty()) cfg = etcnet::load_config(args.config_path);
  if (args.seed) cfg.seeds = {*args.seed};
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.bandwidth) cfg.budget.bandwidth = *args.bandwidth;
  if (args.steps) cfg.training.total_steps = *args.steps;
  if (!args.ablation.empty()) cfg.ablation = args.ablation;
  return cfg;
}

void print_budget(const etcnet::BandwidthBudget& b) {
  std::printf("%-22s %s\n", "bandwidth (bit/s)", etcnet::fmt_double(b.bandwidth).c_str());
  std::printf("%-22s %d\n", "signal levels K", b.signal_levels);
  std::printf("%-22s %d\n", "message length L", b.msg_len);
  std::printf("%-22s %s\n", "sample freq F (Hz)", etcnet::fmt_double(b.sample_freq).c_str());
  std::printf("%-22s %d\n", "agents N", b.n_agents);
  std::printf("%-22s %s\n", "sigma^2", etcnet::fmt_double(b.sigma2).c_str());
  std::printf("%-22s %s\n", "gamma", etcnet::fmt_double(b.gamma).c_str());
  std::printf("%-22s %s\n", "entropy bound (nats)", etcnet::fmt_double(b.entropy_bound).c_str());
  std::printf("%-22s %s\n", "max symbols/s", etcnet::fmt_double(b.n_max).c_str());
  std::printf("%-22s %s\n", "p_sup", etcnet::fmt_double(b.p_sup).c_str());
  std::printf("%-22s %s\n", "C_sup", etcnet::fmt_double(b.c_sup).c_str());
}

json budget_json(const etcnet::BandwidthBudget& b) {
  return json{{"bandwidth", b.bandwidth}, {"signal_levels", b.signal_levels},
              {"msg_len", b.msg_len},     {"sample_freq", b.sample_freq},
              {"n_agents", b.n_agents},   {"sigma2", b.sigma2},
              {"gamma", b.gamma},         {"entropy_bound", b.entropy_bound},
              {"n_max", b.n_max},         {"p_sup", b.p_sup},
              {"c_sup", b.c_sup}};
}

long pick_seed(const etcnet::ExperimentConfig& cfg) { return cfg.seeds.front(); }

void report_run(const etcnet::RunResult& r) {
  std::printf("run finished: %ld steps\n", r.steps_run);
  std::printf("  out dir:           %s\n", r.out_dir.string().c_str());
  std::printf("  checkpoint:        %s\n", r.checkpoint_dir.string().c_str());
  std::printf("  eval mean steps:   %.3f\n", r.final_eval_mean_steps);
  std::printf("  send probability:  %.4f\n", r.final_send_prob);
  if (r.final_p_sup > 0.0)
    std::printf("  p_sup / C_sup:     %.4f / %.4f (sigma2 %.4f, lambda %.4f)\n", r.final_p_sup,
                r.final_c_sup, r.final_sigma2, r.final_lambda);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-triggered communication for multi-agent RL under a bandwidth budget"};
  app.require_subcommand(1);

  // budget
  double b_bandwidth = 170.0;
  int b_levels = 2;
  int b_msg_len = 6;
  double b_freq = 45.0;
  int b_agents = 2;
  double b_sigma2 = 0.69;
  double b_gamma = 0.95;
  bool b_json = false;
  CLI::App* budget_cmd = app.add_subcommand("budget", "Derive p_sup and C_sup from channel parameters");
  budget_cmd->add_option("--bandwidth", b_bandwidth, "Channel bandwidth B, bit/s");
  budget_cmd->add_option("--levels", b_levels, "Discrete signal levels K");
  budget_cmd->add_option("--msg-len", b_msg_len, "Message length L, symbols");
  budget_cmd->add_option("--freq", b_freq, "System sampling frequency F, Hz");
  budget_cmd->add_option("--agents", b_agents, "Agent count N");
  budget_cmd->add_option("--sigma2", b_sigma2, "Message variance estimate");
  budget_cmd->add_option("--gamma", b_gamma, "Discount factor");
  budget_cmd->add_flag("--json", b_json, "Print JSON instead of the table");

  CommonArgs s1_args, s2_args, base_args;
  CLI::App* s1_cmd = app.add_subcommand("train-stage1", "Train encoder/actor/critic at full communication");
  add_common(s1_cmd, s1_args);

  CLI::App* s2_cmd = app.add_subcommand("train-stage2", "Train the gating policy against the budget");
  add_common(s2_cmd, s2_args);
  std::string s2_stage1;
  s2_cmd->add_option("--stage1", s2_stage1, "Stage-1 checkpoint directory");

  CLI::App* base_cmd = app.add_subcommand("baseline", "Train a fixed-gating baseline");
  std::string base_mode;
  base_cmd->add_option("mode", base_mode, "full | none | dropout")->required()
      ->check(CLI::IsMember({"full", "none", "dropout"}));
  double base_dropout_p = -1.0;
  base_cmd->add_option("--dropout-p", base_dropout_p, "Send probability for the dropout baseline");
  add_common(base_cmd, base_args);

  // eval
  std::string eval_ckpt;
  int eval_episodes = 1000;
  long eval_seed = 0;
  bool eval_greedy = false;
  std::string eval_dump, eval_out;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint without learning");
  eval_cmd->add_option("--checkpoint", eval_ckpt, "Checkpoint directory")->required();
  eval_cmd->add_option("--episodes", eval_episodes, "Evaluation episode count");
  eval_cmd->add_option("--seed", eval_seed, "Evaluation seed");
  eval_cmd->add_flag("--argmax", eval_greedy, "Greedy action selection instead of sampling");
  eval_cmd->add_option("--dump", eval_dump, "Write the trajectory dump (JSONL) here");
  eval_cmd->add_option("--out", eval_out, "Write the report JSON here (stdout otherwise)");

  // analyze
  CLI::App* analyze_cmd = app.add_subcommand("analyze", "Post-hoc analysis of runs and dumps");
  analyze_cmd->require_subcommand(1);

  std::vector<std::string> curves_inputs;
  std::string curves_keys = "eval_mean_steps,mean_penalty_per_step";
  std::string curves_out = ".";
  CLI::App* curves_cmd = analyze_cmd->add_subcommand("curves", "Render metric CSVs as SVG learning curves");
  curves_cmd->add_option("csvs", curves_inputs, "Metric CSV files")->required();
  curves_cmd->add_option("--keys", curves_keys, "Comma-separated metric keys");
  curves_cmd->add_option("--out", curves_out, "Output directory");

  std::string tl_dump, tl_out;
  CLI::App* timeline_cmd = analyze_cmd->add_subcommand("timeline", "Per-agent gate event table from a dump");
  timeline_cmd->add_option("--dump", tl_dump, "Trajectory dump (JSONL)")->required();
  timeline_cmd->add_option("--out", tl_out, "Output CSV (stdout summary otherwise)");

  std::string pca_dump, pca_out;
  int pca_agent = 0;
  CLI::App* pca_cmd = analyze_cmd->add_subcommand("pca", "2-D PCA of one agent's observations with gate markers");
  pca_cmd->add_option("--dump", pca_dump, "Trajectory dump (JSONL)")->required();
  pca_cmd->add_option("--agent", pca_agent, "Agent index");
  pca_cmd->add_option("--out", pca_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*budget_cmd) {
      const etcnet::BandwidthBudget b =
          etcnet::derive_budget(b_bandwidth, b_levels, b_msg_len, b_freq, b_agents, b_sigma2, b_gamma);
      if (b_json)
        std::cout << budget_json(b).dump(1) << "\n";
      else
        print_budget(b);
      return kExitOk;
    }

    if (*s1_cmd) {
      etcnet::ExperimentConfig cfg = build_config(s1_args);
      cfg.mode = "stage1";
      cfg = etcnet::resolve(cfg);
      report_run(etcnet::run_stage1(cfg, pick_seed(cfg), cfg.out_dir));
      return kExitOk;
    }

    if (*s2_cmd) {
      etcnet::ExperimentConfig cfg = build_config(s2_args);
      cfg.mode = "stage2";
      if (!s2_stage1.empty()) cfg.stage1_checkpoint = s2_stage1;
      cfg = etcnet::resolve(cfg);
      report_run(etcnet::run_stage2(cfg, pick_seed(cfg), cfg.out_dir));
      return kExitOk;
    }

    if (*base_cmd) {
      etcnet::ExperimentConfig cfg = build_config(base_args);
      cfg.mode = "baseline";
      cfg.baseline = base_mode;
      if (base_dropout_p >= 0.0) cfg.dropout_p = base_dropout_p;
      cfg = etcnet::resolve(cfg);
      report_run(etcnet::run_baseline(cfg, pick_seed(cfg), cfg.out_dir));
      return kExitOk;
    }

    if (*eval_cmd) {
      const etcnet::Checkpoint ckpt = etcnet::load_checkpoint(eval_ckpt);
      const fs::path dump_path = eval_dump;
      const etcnet::EvalReport report = etcnet::evaluate_checkpoint(
          ckpt, eval_episodes, eval_seed, eval_greedy, eval_dump.empty() ? nullptr : &dump_path);
      const json doc = etcnet::to_json(report);
      if (eval_out.empty()) {
        std::cout << doc.dump(1) << "\n";
      } else {
        std::ofstream out(eval_out);
        if (!out) throw std::runtime_error("cannot write " + eval_out);
        out << doc.dump(1) << "\n";
      }
      return kExitOk;
    }

    if (*curves_cmd) {
      std::vector<fs::path> inputs(curves_inputs.begin(), curves_inputs.end());
      std::vector<std::string> keys;
      std::string cur;
      for (char c : curves_keys + ",") {
        if (c == ',') {
          if (!cur.empty()) keys.push_back(cur);
          cur.clear();
        } else {
          cur += c;
        }
      }
      for (const auto& p : etcnet::render_curves(inputs, keys, curves_out))
        std::printf("wrote %s\n", p.string().c_str());
      return kExitOk;
    }

    if (*timeline_cmd) {
      const auto rows = etcnet::gating_timeline(etcnet::read_trajectory(tl_dump));
      if (tl_out.empty()) {
        long opens = 0;
        for (const auto& r : rows) opens += r.gate;
        std::printf("%zu agent-steps, %ld gate opens\n", rows.size(), opens);
      } else {
        etcnet::write_timeline_csv(rows, tl_out);
        std::printf("wrote %s\n", tl_out.c_str());
      }
      return kExitOk;
    }

    if (*pca_cmd) {
      const auto dump = etcnet::read_trajectory(pca_dump);
      std::vector<std::vector<double>> obs;
      std::vector<int> gates;
      for (const auto& row : dump) {
        if (pca_agent < 0 || pca_agent >= static_cast<int>(row.obs.size()))
          throw std::runtime_error("agent index out of range for this dump");
        obs.push_back(row.obs[pca_agent]);
        gates.push_back(row.gates[pca_agent]);
      }
      const etcnet::Pca2d pca = etcnet::pca2d(obs, gates);
      fs::create_directories(pca_out);
      etcnet::write_pca_csv(pca, fs::path(pca_out) / "pca.csv");
      etcnet::write_pca_svg(pca, fs::path(pca_out) / "pca.svg");
      std::printf("wrote %s and %s (explained variance %.4g + %.4g of %.4g)\n",
                  (fs::path(pca_out) / "pca.csv").string().c_str(),
                  (fs::path(pca_out) / "pca.svg").string().c_str(), pca.explained[0], pca.explained[1],
                  pca.total_variance);
      return kExitOk;
    }
  } catch (const etcnet::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const etcnet::DivergenceError& e) {
    std::fprintf(stderr, "divergence: %s\n", e.what());
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
