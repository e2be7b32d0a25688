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

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bpta/error.hpp"

namespace bpta {

enum class Algorithm { kBppo, kArmappo, kMappo, kArmappoProj };

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "bppo") return Algorithm::kBppo;
  if (s == "armappo") return Algorithm::kArmappo;
  if (s == "mappo") return Algorithm::kMappo;
  if (s == "armappo_proj") return Algorithm::kArmappoProj;
  throw ConfigError("algorithm", "unknown algorithm '" + s + "' (expected bppo | armappo | mappo | armappo_proj)");
}

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kBppo: return "bppo";
    case Algorithm::kArmappo: return "armappo";
    case Algorithm::kMappo: return "mappo";
    case Algorithm::kArmappoProj: return "armappo_proj";
  }
  return "?";
}

// All run settings. Defaults follow the matrix-game hyperparameters, with
// 8 rollout workers instead of 50 for desk-scale runs.
struct ExperimentConfig {
  std::string algorithm = "bppo";
  std::string env = "climbing";
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};

  double actor_lr = 5e-4;
  double critic_lr = 5e-4;
  double entropy_coef = 0.01;
  std::size_t hidden_layers = 1;
  std::size_t hidden_dim = 64;
  std::size_t ppo_epoch = 15;
  double ppo_clip = 0.2;
  std::size_t num_mini_batch = 1;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double adam_eps = 1e-5;
  double weight_decay = 0.0;
  double max_grad_norm = 10.0;
  bool normalize_advantages = true;

  std::uint64_t env_steps = 1000000;
  std::size_t rollout_threads = 8;
  std::size_t episode_length = 200;
  std::size_t steps_per_iter = 0;  // 0: one episode length per iteration

  std::string update_scheme = "sequential";  // sequential | simultaneous
  std::string execution_order = "sequential";  // sequential | reverse | random
  double peer_coef = 1.0;
  std::string peer_path = "full";  // full | direct
  double tau = 1.0;
  bool proj_enabled = false;  // forced on by algorithm = armappo_proj
  std::size_t proj_dim = 32;
  bool proj_learned = false;

  double quadratic_target = 0.0;

  Algorithm algo() const { return parse_algorithm(algorithm); }
  bool uses_projection() const { return proj_enabled || algo() == Algorithm::kArmappoProj; }
  std::size_t iteration_steps() const { return steps_per_iter == 0 ? episode_length : steps_per_iter; }

  // Applies one `key = value` assignment. Unknown keys are rejected.
  void set(const std::string& key, const std::string& value) {
    auto it = fields().find(key);
    if (it == fields().end()) throw ConfigError("config", "unknown key '" + key + "'");
    try {
      it->second.set(*this, value);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("config", "bad value '" + value + "' for key '" + key + "'");
    }
  }

  std::string get(const std::string& key) const {
    auto it = fields().find(key);
    if (it == fields().end()) throw ConfigError("config", "unknown key '" + key + "'");
    return it->second.get(*this);
  }

  static std::vector<std::string> keys() {
    std::vector<std::string> out;
    for (const auto& [k, f] : fields()) out.push_back(k);
    return out;
  }

  static std::string describe(const std::string& key) { return fields().at(key).doc; }

  // Parses `key = value` lines; '#' starts a comment; blank lines ignored.
  static ExperimentConfig parse(const std::string& text) {
    ExperimentConfig c;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("config", "line " + std::to_string(lineno) + ": expected key = value");
      }
      c.set(trim(trimmed.substr(0, eq)), trim(trimmed.substr(eq + 1)));
    }
    c.validate();
    return c;
  }

  static ExperimentConfig load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
  }

  // Applies a `key=value` override.
  void apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override", "expected key=value, got '" + assignment + "'");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
  }

  void validate() const {
    parse_algorithm(algorithm);
    if (env != "climbing" && env != "penalty" && env != "quadratic") {
      throw ConfigError("env", "unknown environment '" + env + "' (expected climbing | penalty | quadratic)");
    }
    if (update_scheme != "sequential" && update_scheme != "simultaneous") {
      throw ConfigError("update_scheme", "expected sequential | simultaneous");
    }
    if (execution_order != "sequential" && execution_order != "reverse" && execution_order != "random") {
      throw ConfigError("execution_order", "expected sequential | reverse | random");
    }
    if (peer_path != "full" && peer_path != "direct") throw ConfigError("peer_path", "expected full | direct");
    if (!(tau > 0.0)) throw ConfigError("tau", "temperature must be positive");
    if (!(actor_lr >= 0.0) || !(critic_lr >= 0.0)) throw ConfigError("lr", "learning rates must be non-negative");
    if (!(ppo_clip > 0.0 && ppo_clip < 1.0)) throw ConfigError("ppo_clip", "must lie in (0, 1)");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma", "must lie in (0, 1]");
    if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ConfigError("gae_lambda", "must lie in [0, 1]");
    if (!(max_grad_norm > 0.0)) throw ConfigError("max_grad_norm", "must be positive");
    if (!(adam_eps > 0.0)) throw ConfigError("adam_eps", "must be positive");
    if (ppo_epoch == 0) throw ConfigError("ppo_epoch", "must be positive");
    if (num_mini_batch == 0) throw ConfigError("num_mini_batch", "must be positive");
    if (rollout_threads == 0) throw ConfigError("rollout_threads", "must be positive");
    if (episode_length == 0) throw ConfigError("episode_length", "must be positive");
    if (proj_dim == 0) throw ConfigError("proj.dim", "must be positive");
    if (seeds.empty()) throw ConfigError("seeds", "at least one seed required");
    const std::size_t ep = env == "quadratic" ? 1 : episode_length;
    if (iteration_steps() % ep != 0) {
      throw ConfigError("steps_per_iter", "must be a multiple of the episode length");
    }
    if (iteration_steps() * rollout_threads < num_mini_batch) {
      throw ConfigError("num_mini_batch", "exceeds the number of samples per iteration");
    }
  }

  // Canonical `key = value` listing in sorted key order.
  std::string to_text(bool include_seeds = true) const {
    std::string out;
    for (const auto& [k, f] : fields()) {
      if (!include_seeds && k == "seeds") continue;
      out += k + " = " + f.get(*this) + "\n";
    }
    return out;
  }

  // FNV-1a 64 of the canonical listing without seeds.
  std::string hash() const {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : to_text(false)) {
      h ^= ch;
      h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

 private:
  struct Field {
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
    std::string doc;
  };

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  static std::string fmt_double(double v) {
    char buf[32];
    for (int prec = 15; prec <= 17; ++prec) {
      std::snprintf(buf, sizeof buf, "%.*g", prec, v);
      if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
  }

  static bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    throw ConfigError("config", "expected boolean, got '" + v + "'");
  }

  static double parse_double(const std::string& v) {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw ConfigError("config", "trailing characters in '" + v + "'");
    return d;
  }

  static std::uint64_t parse_uint(const std::string& v) {
    if (v.empty() || v[0] == '-') throw ConfigError("config", "expected non-negative integer, got '" + v + "'");
    // Accept 1e6 style for step budgets.
    const double d = parse_double(v);
    const auto u = static_cast<std::uint64_t>(d);
    if (static_cast<double>(u) != d) throw ConfigError("config", "expected integer, got '" + v + "'");
    return u;
  }

  template <class T>
  static Field num(T ExperimentConfig::*member, std::string doc) {
    return Field{[member](ExperimentConfig& c, const std::string& v) {
                   if constexpr (std::is_floating_point_v<T>) c.*member = parse_double(v);
                   else c.*member = static_cast<T>(parse_uint(v));
                 },
                 [member](const ExperimentConfig& c) {
                   if constexpr (std::is_floating_point_v<T>) return fmt_double(c.*member);
                   else return std::to_string(c.*member);
                 },
                 std::move(doc)};
  }

  static Field str(std::string ExperimentConfig::*member, std::string doc) {
    return Field{[member](ExperimentConfig& c, const std::string& v) { c.*member = v; },
                 [member](const ExperimentConfig& c) { return c.*member; }, std::move(doc)};
  }

  static Field flag(bool ExperimentConfig::*member, std::string doc) {
    return Field{[member](ExperimentConfig& c, const std::string& v) { c.*member = parse_bool(v); },
                 [member](const ExperimentConfig& c) { return std::string(c.*member ? "true" : "false"); },
                 std::move(doc)};
  }

  static const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> f = [] {
      std::map<std::string, Field> m;
      m["algorithm"] = str(&ExperimentConfig::algorithm, "bppo | armappo | mappo | armappo_proj (bppo)");
      m["env"] = str(&ExperimentConfig::env, "climbing | penalty | quadratic (climbing)");
      m["seeds"] = Field{[](ExperimentConfig& c, const std::string& v) {
                           c.seeds.clear();
                           std::stringstream ss(v);
                           std::string item;
                           while (std::getline(ss, item, ',')) {
                             item = trim(item);
                             if (!item.empty()) c.seeds.push_back(parse_uint(item));
                           }
                         },
                         [](const ExperimentConfig& c) {
                           std::string s;
                           for (std::size_t i = 0; i < c.seeds.size(); ++i) s += (i ? "," : "") + std::to_string(c.seeds[i]);
                           return s;
                         },
                         "comma-separated seed list (0,1,2,3,4)"};
      m["actor_lr"] = num(&ExperimentConfig::actor_lr, "actor learning rate (5e-4)");
      m["critic_lr"] = num(&ExperimentConfig::critic_lr, "critic learning rate (5e-4)");
      m["entropy_coef"] = num(&ExperimentConfig::entropy_coef, "entropy bonus coefficient (0.01)");
      m["hidden_layers"] = num(&ExperimentConfig::hidden_layers, "hidden layers per network (1)");
      m["hidden_dim"] = num(&ExperimentConfig::hidden_dim, "hidden layer width (64)");
      m["ppo_epoch"] = num(&ExperimentConfig::ppo_epoch, "optimisation epochs per iteration (15)");
      m["ppo_clip"] = num(&ExperimentConfig::ppo_clip, "ratio clip range (0.2)");
      m["num_mini_batch"] = num(&ExperimentConfig::num_mini_batch, "minibatches per epoch (1)");
      m["gamma"] = num(&ExperimentConfig::gamma, "discount (0.99)");
      m["gae_lambda"] = num(&ExperimentConfig::gae_lambda, "GAE lambda (0.95)");
      m["adam_eps"] = num(&ExperimentConfig::adam_eps, "Adam epsilon (1e-5)");
      m["weight_decay"] = num(&ExperimentConfig::weight_decay, "L2 weight decay (0)");
      m["max_grad_norm"] = num(&ExperimentConfig::max_grad_norm, "global gradient norm clip (10)");
      m["normalize_advantages"] = flag(&ExperimentConfig::normalize_advantages, "per-batch advantage normalisation (true)");
      m["env_steps"] = num(&ExperimentConfig::env_steps, "total environment steps (1000000)");
      m["rollout_threads"] = num(&ExperimentConfig::rollout_threads, "parallel rollout workers (8)");
      m["episode_length"] = num(&ExperimentConfig::episode_length, "matrix-game episode length (200)");
      m["steps_per_iter"] = num(&ExperimentConfig::steps_per_iter, "steps per worker per iteration, 0 = episode_length (0)");
      m["update_scheme"] = str(&ExperimentConfig::update_scheme, "sequential | simultaneous (sequential)");
      m["execution_order"] = str(&ExperimentConfig::execution_order, "sequential | reverse | random (sequential)");
      m["peer_coef"] = num(&ExperimentConfig::peer_coef, "scale of the peer-learning term (1.0)");
      m["peer_path"] = str(&ExperimentConfig::peer_path, "full | direct successor re-materialisation (full)");
      m["tau"] = num(&ExperimentConfig::tau, "Gumbel-softmax temperature (1.0)");
      m["proj.enabled"] = flag(&ExperimentConfig::proj_enabled, "project preceding one-hot actions (false)");
      m["proj.dim"] = num(&ExperimentConfig::proj_dim, "projection width (32)");
      m["proj.learned"] = flag(&ExperimentConfig::proj_learned, "train the projection (false)");
      m["quadratic.target"] = num(&ExperimentConfig::quadratic_target, "target sum c of the quadratic game (0)");
      return m;
    }();
    return f;
  }
};

}  // namespace bpta
