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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bpta/cli/metrics.hpp"
#include "bpta/config.hpp"
#include "bpta/trainer/checkpoint.hpp"

namespace bpta::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ad::Matrix;

inline constexpr const char* kVersion = "0.1.0";

// Training diverged; the last good checkpoint was written.
class TrainingAborted : public Error {
 public:
  using Error::Error;
};

inline std::string resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("BPTA_OUT_DIR"); env && *env) return env;
  return "runs";
}

struct TrainOptions {
  std::optional<std::string> config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> algo;
  std::optional<std::string> env;
  std::string out_dir;
  std::string label;  // default: algorithm name
};

struct SeedRun {
  std::uint64_t seed = 0;
  std::string metrics;     // file name, relative to the output directory
  std::string checkpoint;  // file name, relative to the output directory
  std::size_t iterations = 0;
  double final_return = 0.0;
  double best_return = 0.0;
};

struct TrainResult {
  std::string out_dir;
  std::string manifest;  // full path
  ExperimentConfig config;
  std::vector<SeedRun> runs;
};

// Config file, then --algo / --env, then overrides in order, then --seed.
inline ExperimentConfig resolve_config(const TrainOptions& o) {
  ExperimentConfig c = o.config_path ? ExperimentConfig::load(*o.config_path) : ExperimentConfig{};
  if (o.algo) c.set("algorithm", *o.algo);
  if (o.env) c.set("env", *o.env);
  for (const auto& ov : o.overrides) c.apply_override(ov);
  if (o.seed) c.seeds = {*o.seed};
  c.validate();
  return c;
}

inline json config_json(const ExperimentConfig& c) {
  json j = json::object();
  for (const auto& k : ExperimentConfig::keys()) j[k] = c.get(k);
  return j;
}

inline TrainResult cmd_train(const TrainOptions& o, std::ostream& log) {
  TrainResult res;
  res.config = resolve_config(o);
  const ExperimentConfig& cfg = res.config;
  res.out_dir = resolve_out_dir(o.out_dir);
  fs::create_directories(res.out_dir);
  const std::string label = o.label.empty() ? cfg.algorithm : o.label;
  const std::string prefix = label + "_" + cfg.env;

  json manifest;
  manifest["format"] = "bpta-manifest";
  manifest["version"] = 1;
  manifest["label"] = label;
  manifest["algorithm"] = cfg.algorithm;
  manifest["env"] = cfg.env;
  manifest["config_hash"] = cfg.hash();
  manifest["config"] = config_json(cfg);
  manifest["versions"] = {{"bpta", kVersion}, {"compiler", __VERSION__}, {"cplusplus", static_cast<long>(__cplusplus)}};
  manifest["runs"] = json::array();
  res.manifest = (fs::path(res.out_dir) / (prefix + ".manifest.json")).string();
  auto write_manifest = [&] {
    std::ofstream f(res.manifest);
    if (!f) throw FormatError("manifest", "cannot write '" + res.manifest + "'");
    f << manifest.dump(2) << '\n';
  };

  for (std::uint64_t seed : cfg.seeds) {
    SeedRun run;
    run.seed = seed;
    run.metrics = prefix + "_seed" + std::to_string(seed) + ".csv";
    run.checkpoint = prefix + "_seed" + std::to_string(seed) + ".ckpt";
    const std::string csv_path = (fs::path(res.out_dir) / run.metrics).string();
    const std::string ckpt_path = (fs::path(res.out_dir) / run.checkpoint).string();
    trainer::Trainer t(cfg, seed);
    MetricsWriter writer(csv_path);
    std::string last_good = trainer::checkpoint_string(t);
    run.best_return = -std::numeric_limits<double>::infinity();
    try {
      while (t.env_steps() + t.steps_per_iteration_total() <= cfg.env_steps) {
        const MetricsRow m = t.iterate();
        writer.write(m);
        run.final_return = m.mean_return;
        run.best_return = std::max(run.best_return, m.mean_return);
        run.iterations = m.iteration;
        last_good = trainer::checkpoint_string(t);
      }
    } catch (const DomainError& e) {
      std::ofstream(ckpt_path) << last_good;
      throw TrainingAborted("train", "seed " + std::to_string(seed) + " diverged at iteration " +
                                         std::to_string(t.iteration() + 1) + ": " + e.what() +
                                         "; last good checkpoint kept at " + ckpt_path);
    }
    trainer::save_checkpoint(ckpt_path, t);
    log << label << " " << cfg.env << " seed " << seed << ": " << run.iterations << " iterations, final return "
        << run.final_return << ", best " << run.best_return << "\n";
    manifest["runs"].push_back({{"seed", seed},
                                {"metrics", run.metrics},
                                {"checkpoint", run.checkpoint},
                                {"iterations", run.iterations},
                                {"final_mean_return", run.final_return},
                                {"best_mean_return", run.best_return}});
    write_manifest();
    res.runs.push_back(run);
  }
  manifest["seeds"] = cfg.seeds;
  write_manifest();
  return res;
}

struct EvalOptions {
  std::string checkpoint;
  std::optional<std::string> env;
  std::size_t episodes = 10;
  bool greedy = false;
  std::uint64_t seed = 0;
};

struct EvalSummary {
  std::size_t episodes = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation over episodes
  std::vector<double> returns;  // per-episode mean per-step return
};

// Rolls out the joint policy for whole episodes. Greedy mode uses zero
// noise: argmax for categorical agents, the mean for Gaussian ones.
inline EvalSummary evaluate(const policy::JointPolicy& joint, envs::DecPomdpEnv& env, std::size_t episodes, bool greedy,
                            Rng& rng) {
  if (episodes == 0) throw ConfigError("eval", "episodes must be positive");
  const std::size_t n = joint.size();
  if (env.num_agents() != n) throw ConfigError("eval", "agent count mismatch");
  EvalSummary s;
  s.episodes = episodes;
  for (std::size_t e = 0; e < episodes; ++e) {
    auto obs = env.reset();
    double total = 0.0;
    std::size_t steps = 0;
    bool done = false;
    while (!done) {
      std::vector<Matrix> o(n), noise(n);
      for (std::size_t i = 0; i < n; ++i) {
        o[i] = Matrix(1, obs.at(i).size());
        std::copy(obs[i].begin(), obs[i].end(), o[i].data().begin());
        noise[i] = greedy ? Matrix(1, joint.space(i).size) : policy::sample_noise(joint.space(i), 1, rng);
      }
      ad::Tape tape;
      auto sample = joint.forward(tape, o, noise, policy::FeedMode::kHard);
      envs::JointAction ja(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (joint.space(i).is_discrete()) {
          ja[i].index = sample.actions[i].indices[0];
        } else {
          auto row = sample.actions[i].values.row_span(0);
          ja[i].values.assign(row.begin(), row.end());
        }
      }
      auto r = env.step(ja);
      total += r.reward;
      ++steps;
      done = r.done;
      obs = std::move(r.observations);
    }
    s.returns.push_back(total / static_cast<double>(steps));
  }
  double sum = 0.0;
  for (double r : s.returns) sum += r;
  s.mean = sum / static_cast<double>(episodes);
  double v = 0.0;
  for (double r : s.returns) v += (r - s.mean) * (r - s.mean);
  s.std = episodes > 1 ? std::sqrt(v / static_cast<double>(episodes - 1)) : 0.0;
  return s;
}

inline EvalSummary cmd_eval(const EvalOptions& o) {
  if (o.episodes == 0) throw ConfigError("eval", "episodes must be positive");
  auto t = trainer::load_checkpoint(o.checkpoint);
  const auto& cfg = t->config();
  const std::string key = o.env.value_or(cfg.env);
  auto env = envs::make_env(key, cfg.episode_length, cfg.quadratic_target);
  if (env->action_spaces() != t->env().action_spaces() || env->observation_dims() != t->env().observation_dims()) {
    throw ConfigError("eval", "checkpoint trained on '" + cfg.env + "' is incompatible with environment '" + key + "'");
  }
  Rng rng(o.seed, 0xe5a1);
  return evaluate(t->joint(), *env, o.episodes, o.greedy, rng);
}

struct CompareOptions {
  std::vector<std::string> inputs;  // manifest files or directories holding them
  std::string out_dir;
  std::optional<double> threshold;  // count runs whose final return reaches it
};

struct CompareRow {
  std::string label;
  std::string env;
  std::size_t runs = 0;
  double final_mean = 0.0;
  double final_std = 0.0;
  double best_mean = 0.0;
  std::size_t reached = 0;  // runs with final return >= threshold
};

struct CurvePoint {
  std::uint64_t step = 0;
  std::string label;
  double mean = 0.0;
  double std = 0.0;
};

struct CompareResult {
  std::vector<CompareRow> table;
  std::vector<CurvePoint> curves;
  std::string curves_path;
  std::string table_path;
};

namespace detail {

inline double mean_of(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

inline double std_of(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = mean_of(x);
  double v = 0.0;
  for (double a : x) v += (a - m) * (a - m);
  return std::sqrt(v / static_cast<double>(x.size() - 1));
}

// Row whose step count is nearest to `step`, earlier row on ties.
inline const MetricsRow& nearest(const std::vector<MetricsRow>& rows, std::uint64_t step) {
  std::size_t best = 0;
  std::uint64_t dist = std::numeric_limits<std::uint64_t>::max();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::uint64_t d = rows[k].env_steps > step ? rows[k].env_steps - step : step - rows[k].env_steps;
    if (d < dist) {
      dist = d;
      best = k;
    }
  }
  return rows[best];
}

}  // namespace detail

inline std::vector<std::string> find_manifests(const std::vector<std::string>& inputs) {
  std::vector<std::string> out;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<std::string> found;
      for (const auto& e : fs::directory_iterator(in)) {
        const std::string name = e.path().filename().string();
        if (name.size() > 14 && name.ends_with(".manifest.json")) found.push_back(e.path().string());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::exists(in)) {
      out.push_back(in);
    } else {
      throw ConfigError("compare", "no such run '" + in + "'");
    }
  }
  return out;
}

// Aligns every run on the step grid of the shortest run, resampling by
// nearest iteration, and tabulates final performance per label.
inline CompareResult cmd_compare(const CompareOptions& o) {
  const auto manifests = find_manifests(o.inputs);
  struct Group {
    std::string label, env;
    std::vector<std::vector<MetricsRow>> runs;
  };
  std::vector<Group> groups;
  for (const auto& path : manifests) {
    std::ifstream f(path);
    json m;
    try {
      m = json::parse(f);
    } catch (const json::exception& e) {
      throw FormatError("compare", "cannot parse manifest '" + path + "': " + e.what());
    }
    const std::string label = m.at("label"), env = m.at("env");
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) { return g.label == label && g.env == env; });
    if (it == groups.end()) {
      groups.push_back({label, env, {}});
      it = groups.end() - 1;
    }
    for (const auto& r : m.at("runs")) {
      auto rows = read_metrics((fs::path(path).parent_path() / r.at("metrics").get<std::string>()).string());
      if (!rows.empty()) it->runs.push_back(std::move(rows));
    }
  }
  std::size_t total = 0;
  for (const auto& g : groups) total += g.runs.size();
  if (total == 0) throw ConfigError("compare", "empty run set");

  const std::vector<MetricsRow>* grid = nullptr;
  for (const auto& g : groups)
    for (const auto& r : g.runs)
      if (!grid || r.size() < grid->size()) grid = &r;

  CompareResult res;
  for (const auto& g : groups) {
    if (g.runs.empty()) continue;
    for (const auto& point : *grid) {
      std::vector<double> vals;
      for (const auto& r : g.runs) vals.push_back(detail::nearest(r, point.env_steps).mean_return);
      res.curves.push_back({point.env_steps, g.label, detail::mean_of(vals), detail::std_of(vals)});
    }
    CompareRow row;
    row.label = g.label;
    row.env = g.env;
    row.runs = g.runs.size();
    std::vector<double> finals, bests;
    for (const auto& r : g.runs) {
      finals.push_back(r.back().mean_return);
      double b = -std::numeric_limits<double>::infinity();
      for (const auto& x : r) b = std::max(b, x.mean_return);
      bests.push_back(b);
      if (o.threshold && r.back().mean_return >= *o.threshold) ++row.reached;
    }
    row.final_mean = detail::mean_of(finals);
    row.final_std = detail::std_of(finals);
    row.best_mean = detail::mean_of(bests);
    res.table.push_back(row);
  }

  const std::string out = resolve_out_dir(o.out_dir);
  fs::create_directories(out);
  res.curves_path = (fs::path(out) / "curves.csv").string();
  res.table_path = (fs::path(out) / "final.csv").string();
  {
    std::ofstream f(res.curves_path);
    f << "step,algorithm,mean,std\n";
    char buf[128];
    for (const auto& p : res.curves) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g", p.mean, p.std);
      f << p.step << ',' << p.label << buf << '\n';
    }
  }
  {
    std::ofstream f(res.table_path);
    f << "algorithm,env,runs,final_mean,final_std,best_mean" << (o.threshold ? ",reached" : "") << '\n';
    char buf[128];
    for (const auto& r : res.table) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g", r.final_mean, r.final_std, r.best_mean);
      f << r.label << ',' << r.env << ',' << r.runs << buf;
      if (o.threshold) f << ',' << r.reached;
      f << '\n';
    }
  }
  return res;
}

inline void print_table(std::ostream& os, const CompareResult& r, std::optional<double> threshold) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-16s %-10s %5s %12s %10s %12s", "algorithm", "env", "runs", "final_mean", "final_std",
                "best_mean");
  os << buf << (threshold ? "  reached" : "") << '\n';
  for (const auto& row : r.table) {
    std::snprintf(buf, sizeof buf, "%-16s %-10s %5zu %12.4f %10.4f %12.4f", row.label.c_str(), row.env.c_str(), row.runs,
                  row.final_mean, row.final_std, row.best_mean);
    os << buf;
    if (threshold) os << "  " << row.reached << "/" << row.runs;
    os << '\n';
  }
}

}  // namespace bpta::cli
