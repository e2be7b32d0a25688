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

#include <cstdio>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bpta/trainer/trainer.hpp"

namespace bpta::trainer {

// Structured text checkpoint:
//
//   bpta-checkpoint 1
//   config_hash <fnv1a>
//   seed <u64>
//   iteration <k>
//   env_steps <n>
//   order <agent ids in execution order>
//   config <line count>
//   ...config lines...
//   rng <worker> <engine state>
//   adam <name> <steps>
//   matrix <name> <rows> <cols> <hexfloat values...>
//   end
//
// Matrices cover every policy, projection and critic tensor plus the Adam
// moments of each optimiser.
inline constexpr int kCheckpointVersion = 1;

namespace detail {

inline void write_matrix(std::ostream& os, const std::string& name, const Matrix& m) {
  os << "matrix " << name << ' ' << m.rows() << ' ' << m.cols();
  char buf[40];
  for (double x : m.data()) {
    std::snprintf(buf, sizeof buf, " %a", x);
    os << buf;
  }
  os << '\n';
}

inline Matrix read_matrix(std::istringstream& is, const std::string& name) {
  std::size_t rows = 0, cols = 0;
  if (!(is >> rows >> cols)) throw FormatError("checkpoint", "bad matrix header for " + name);
  Matrix m(rows, cols);
  for (double& x : m.data()) {
    std::string tok;
    if (!(is >> tok)) throw FormatError("checkpoint", "truncated matrix " + name);
    char* end = nullptr;
    x = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) throw FormatError("checkpoint", "bad value '" + tok + "' in " + name);
  }
  return m;
}

struct Slot {
  std::string name;
  Matrix* target;
};

inline std::vector<Slot> parameter_slots(Trainer& t) {
  std::vector<Slot> out;
  auto& joint = t.joint();
  for (std::size_t i = 0; i < joint.size(); ++i) {
    auto& a = joint.agent(i);
    const auto names = a.parameter_names();
    const auto params = a.parameters();
    for (std::size_t k = 0; k < params.size(); ++k) out.push_back({"agent" + std::to_string(i) + "." + names[k], params[k]});
  }
  auto cp = t.critic().parameters();
  for (std::size_t k = 0; k < cp.size(); ++k) out.push_back({"critic.p" + std::to_string(k), cp[k]});
  return out;
}

inline void write_adam(std::ostream& os, const std::string& name, const Adam& a) {
  os << "adam " << name << ' ' << a.steps() << ' ' << a.first_moments().size() << '\n';
  for (std::size_t k = 0; k < a.first_moments().size(); ++k) {
    write_matrix(os, name + ".m" + std::to_string(k), a.first_moments()[k]);
    write_matrix(os, name + ".v" + std::to_string(k), a.second_moments()[k]);
  }
}

}  // namespace detail

inline void save_checkpoint(std::ostream& os, Trainer& t) {
  os << "bpta-checkpoint " << kCheckpointVersion << '\n';
  os << "config_hash " << t.config().hash() << '\n';
  os << "seed " << t.seed() << '\n';
  os << "iteration " << t.iteration() << '\n';
  os << "env_steps " << t.env_steps() << '\n';
  os << "order";
  for (std::size_t a : t.joint().order().agents()) os << ' ' << a;
  os << '\n';
  const std::string cfg = t.config().to_text(false);
  std::size_t lines = 0;
  for (char c : cfg) lines += c == '\n';
  os << "config " << lines << '\n' << cfg;
  for (std::size_t w = 0; w < t.worker_rngs().size(); ++w) os << "rng " << w << ' ' << t.worker_rngs()[w].serialize() << '\n';
  for (std::size_t i = 0; i < t.joint().size(); ++i) detail::write_adam(os, "adam.agent" + std::to_string(i), t.actor_optimizer(i));
  detail::write_adam(os, "adam.critic", t.critic_optimizer());
  for (const auto& s : detail::parameter_slots(t)) detail::write_matrix(os, s.name, *s.target);
  os << "end\n";
}

inline void save_checkpoint(const std::string& path, Trainer& t) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp);
    if (!f) throw FormatError("checkpoint", "cannot write '" + tmp + "'");
    save_checkpoint(f, t);
    if (!f) throw FormatError("checkpoint", "write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw FormatError("checkpoint", "cannot rename to '" + path + "'");
}

inline std::string checkpoint_string(Trainer& t) {
  std::ostringstream os;
  save_checkpoint(os, t);
  return os.str();
}

// Rebuilds a trainer from its stored config and seed, then restores every
// tensor, optimiser moment, counter and random stream.
inline std::unique_ptr<Trainer> load_checkpoint(std::istream& is) {
  std::string line, key;
  auto next = [&](const char* expect) {
    if (!std::getline(is, line)) throw FormatError("checkpoint", std::string("missing '") + expect + "'");
    std::istringstream ls(line);
    ls >> key;
    if (key != expect) throw FormatError("checkpoint", "expected '" + std::string(expect) + "', got '" + key + "'");
    std::string rest;
    std::getline(ls, rest);
    if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
    return rest;
  };
  if (next("bpta-checkpoint") != std::to_string(kCheckpointVersion)) {
    throw FormatError("checkpoint", "unsupported checkpoint version");
  }
  const std::string hash = next("config_hash");
  const std::uint64_t seed = std::stoull(next("seed"));
  const std::size_t iteration = std::stoull(next("iteration"));
  const std::uint64_t steps = std::stoull(next("env_steps"));
  const std::string order = next("order");
  const std::size_t lines = std::stoull(next("config"));
  std::string cfg_text;
  for (std::size_t k = 0; k < lines; ++k) {
    if (!std::getline(is, line)) throw FormatError("checkpoint", "truncated config block");
    cfg_text += line + '\n';
  }
  ExperimentConfig cfg = ExperimentConfig::parse(cfg_text);
  if (cfg.hash() != hash) throw FormatError("checkpoint", "config hash mismatch");
  cfg.seeds = {seed};
  auto t = std::make_unique<Trainer>(cfg, seed);
  std::ostringstream expect_order;
  for (std::size_t a : t->joint().order().agents()) expect_order << (expect_order.tellp() > 0 ? " " : "") << a;
  if (expect_order.str() != order) throw FormatError("checkpoint", "execution order mismatch");
  t->set_counters(iteration, steps);

  auto slots = detail::parameter_slots(*t);
  std::size_t next_slot = 0;
  struct PendingAdam {
    Adam* opt;
    std::size_t steps, count;
    std::vector<Matrix> m, v;
  };
  std::vector<PendingAdam> adams;
  bool done = false;
  while (!done && std::getline(is, line)) {
    std::istringstream ls(line);
    ls >> key;
    if (key == "end") {
      done = true;
    } else if (key == "rng") {
      std::size_t w = 0;
      ls >> w;
      std::string state;
      std::getline(ls, state);
      if (w >= t->worker_rngs().size()) throw FormatError("checkpoint", "rng worker out of range");
      t->worker_rngs()[w].deserialize(state);
    } else if (key == "adam") {
      std::string name;
      PendingAdam p{nullptr, 0, 0, {}, {}};
      ls >> name >> p.steps >> p.count;
      if (name == "adam.critic") {
        p.opt = &t->critic_optimizer();
      } else if (name.rfind("adam.agent", 0) == 0) {
        p.opt = &t->actor_optimizer(std::stoull(name.substr(10)));
      } else {
        throw FormatError("checkpoint", "unknown optimiser " + name);
      }
      adams.push_back(std::move(p));
    } else if (key == "matrix") {
      std::string name;
      ls >> name;
      Matrix m = detail::read_matrix(ls, name);
      if (name.rfind("adam.", 0) == 0) {
        if (adams.empty()) throw FormatError("checkpoint", "moment before optimiser header");
        auto& p = adams.back();
        (name[name.rfind('.') + 1] == 'm' ? p.m : p.v).push_back(std::move(m));
      } else {
        if (next_slot >= slots.size() || slots[next_slot].name != name) {
          throw FormatError("checkpoint", "unexpected tensor " + name);
        }
        if (m.shape() != slots[next_slot].target->shape()) throw FormatError("checkpoint", "shape mismatch for " + name);
        *slots[next_slot++].target = std::move(m);
      }
    } else {
      throw FormatError("checkpoint", "unknown record '" + key + "'");
    }
  }
  if (!done) throw FormatError("checkpoint", "missing end marker");
  if (next_slot != slots.size()) throw FormatError("checkpoint", "missing tensors");
  for (auto& p : adams) {
    if (p.m.size() != p.count || p.v.size() != p.count) throw FormatError("checkpoint", "optimiser moment count");
    p.opt->restore(p.steps, std::move(p.m), std::move(p.v));
  }
  return t;
}

inline std::unique_ptr<Trainer> load_checkpoint(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("checkpoint", "cannot open '" + path + "'");
  return load_checkpoint(static_cast<std::istream&>(f));
}

}  // namespace bpta::trainer
