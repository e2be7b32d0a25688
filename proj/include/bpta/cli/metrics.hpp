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
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bpta/error.hpp"
#include "bpta/trainer/trainer.hpp"

namespace bpta::cli {

using MetricsRow = trainer::IterationMetrics;

inline const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> c{"iteration",  "env_steps",   "seed",    "mean_return",
                                          "policy_loss", "value_loss", "entropy", "mean_ratio",
                                          "mean_grad_m", "wall_clock"};
  return c;
}

inline std::string metrics_header() {
  std::string h;
  for (const auto& c : metrics_columns()) h += (h.empty() ? "" : ",") + c;
  return h;
}

inline std::string to_csv(const MetricsRow& m) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%zu,%llu,%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", m.iteration,
                static_cast<unsigned long long>(m.env_steps), static_cast<unsigned long long>(m.seed), m.mean_return,
                m.policy_loss, m.value_loss, m.entropy, m.mean_ratio, m.mean_grad_m, m.wall_clock);
  return buf;
}

inline MetricsRow parse_csv_row(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) f.push_back(item);
  if (f.size() != metrics_columns().size()) {
    throw FormatError("metrics", "expected " + std::to_string(metrics_columns().size()) + " fields, got " +
                                     std::to_string(f.size()));
  }
  MetricsRow m;
  try {
    m.iteration = std::stoull(f[0]);
    m.env_steps = std::stoull(f[1]);
    m.seed = std::stoull(f[2]);
    m.mean_return = std::stod(f[3]);
    m.policy_loss = std::stod(f[4]);
    m.value_loss = std::stod(f[5]);
    m.entropy = std::stod(f[6]);
    m.mean_ratio = std::stod(f[7]);
    m.mean_grad_m = std::stod(f[8]);
    m.wall_clock = std::stod(f[9]);
  } catch (const std::exception&) {
    throw FormatError("metrics", "bad row '" + line + "'");
  }
  return m;
}

// Streams rows as they arrive; the header is written on open.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::string& path) : out_(path) {
    if (!out_) throw FormatError("metrics", "cannot open '" + path + "'");
    out_ << metrics_header() << '\n';
    out_.flush();
  }

  void write(const MetricsRow& m) {
    if (m.env_steps < last_steps_) throw InternalError("metrics", "step counter went backwards");
    last_steps_ = m.env_steps;
    out_ << to_csv(m) << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
  std::uint64_t last_steps_ = 0;
};

inline std::vector<MetricsRow> read_metrics(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("metrics", "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != metrics_header()) throw FormatError("metrics", "unexpected header '" + line + "'");
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) rows.push_back(parse_csv_row(line));
  }
  return rows;
}

inline std::vector<MetricsRow> read_metrics(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("metrics", "cannot open '" + path + "'");
  return read_metrics(static_cast<std::istream&>(f));
}

}  // namespace bpta::cli
