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

#include <stdexcept>
#include <string>

namespace bpta {

// Base of every error thrown by the library. `where` names the operation or
// component that raised it so diagnostics can be attributed without a trace.
class Error : public std::runtime_error {
 public:
  Error(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}

  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

// Operand shapes do not conform.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Input outside an operation's domain, or a non-finite result.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value or key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Violated precondition on call order or internal bookkeeping.
class InternalError : public Error {
 public:
  using Error::Error;
};

// Malformed or incompatible file.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace bpta
