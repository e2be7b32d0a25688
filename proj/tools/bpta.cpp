// Copyright 2026 The BPTA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bpta/cli/commands.hpp"
#include "bpta/platform.hpp"

namespace {

int usage_error(const CLI::App& app, const std::string& msg) {
  std::cerr << "error: " << msg << "\n\n" << app.help();
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  bpta::tune_allocator();
  CLI::App app{"Back-propagation through agents: training and evaluation on cooperative matrix games"};
  app.require_subcommand(1);

  bpta::cli::TrainOptions train;
  std::string config_path, algo, env;
  std::uint64_t seed = 0;
  auto* t = app.add_subcommand("train", "train one configuration over its seed list");
  t->add_option("--config", config_path, "key = value config file");
  t->add_option("--seed", seed, "run this seed only");
  t->add_option("--algo", algo, "bppo | armappo | mappo | armappo_proj");
  t->add_option("--env", env, "climbing | penalty | quadratic");
  t->add_option("--out-dir", train.out_dir, "output directory (default $BPTA_OUT_DIR, then ./runs)");
  t->add_option("--override", train.overrides, "key=value, repeatable")->take_all();
  t->add_option("--label", train.label, "name used in file names and comparisons (default: algorithm)");
  bool list_keys = false;
  t->add_flag("--list-keys", list_keys, "print every config key with its default and exit");

  bpta::cli::EvalOptions eval;
  std::string eval_env;
  auto* e = app.add_subcommand("eval", "evaluate a checkpoint");
  e->add_option("checkpoint", eval.checkpoint, "checkpoint file")->required();
  e->add_option("--env", eval_env, "environment (default: the training environment)");
  e->add_option("--episodes", eval.episodes, "number of episodes")->capture_default_str();
  e->add_flag("--greedy", eval.greedy, "argmax / mean actions instead of sampling");
  e->add_option("--seed", eval.seed, "sampling seed")->capture_default_str();

  bpta::cli::CompareOptions cmp;
  double threshold = 0.0;
  auto* c = app.add_subcommand("compare", "align learning curves and tabulate final performance");
  c->add_option("runs", cmp.inputs, "manifests or directories holding them")->required();
  c->add_option("--out-dir", cmp.out_dir, "where curves.csv and final.csv go (default $BPTA_OUT_DIR, then ./runs)");
  auto* thr = c->add_option("--threshold", threshold, "count runs finishing at or above this return");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    return usage_error(app, ex.what());
  }

  try {
    if (t->parsed()) {
      if (list_keys) {
        const bpta::ExperimentConfig d;
        for (const auto& k : bpta::ExperimentConfig::keys())
          std::cout << k << " = " << d.get(k) << "    # " << bpta::ExperimentConfig::describe(k) << "\n";
        return 0;
      }
      if (!config_path.empty()) train.config_path = config_path;
      if (!algo.empty()) train.algo = algo;
      if (!env.empty()) train.env = env;
      if (t->count("--seed")) train.seed = seed;
      try {
        bpta::cli::resolve_config(train);
      } catch (const bpta::ConfigError& ex) {
        return usage_error(*t, ex.what());
      }
      auto res = bpta::cli::cmd_train(train, std::cout);
      std::cout << "manifest: " << res.manifest << "\n";
      return 0;
    }
    if (e->parsed()) {
      if (!eval_env.empty()) eval.env = eval_env;
      auto s = bpta::cli::cmd_eval(eval);
      std::cout << "episodes " << s.episodes << " mean " << s.mean << " std " << s.std << "\n";
      return 0;
    }
    if (c->parsed()) {
      std::optional<double> th;
      if (thr->count()) th = threshold;
      cmp.threshold = th;
      auto r = bpta::cli::cmd_compare(cmp);
      bpta::cli::print_table(std::cout, r, th);
      std::cout << "curves: " << r.curves_path << "\ntable: " << r.table_path << "\n";
      return 0;
    }
  } catch (const bpta::cli::TrainingAborted& ex) {
    std::cerr << "aborted: " << ex.what() << "\n";
    return 3;
  } catch (const bpta::ConfigError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
