// Copyright 2026 The TrojanScan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TROJANSCAN_ERROR_HPP_
#define TROJANSCAN_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace trojanscan {

enum class ErrorKind {
  kInvalidParameter,
  kOracle,
  kIo,
  kConfig,
  kMetric,
};

inline const char *to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidParameter: return "invalid-parameter";
    case ErrorKind::kOracle: return "oracle-error";
    case ErrorKind::kIo: return "io-error";
    case ErrorKind::kConfig: return "config-error";
    case ErrorKind::kMetric: return "metric-error";
  }
  return "error";
}

// Base of every error thrown by the library. what() is prefixed with the kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        message_(message) {}

  ErrorKind kind() const { return kind_; }
  // what() without the kind prefix.
  const std::string &message() const { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

class InvalidParameter : public Error {
 public:
  explicit InvalidParameter(const std::string &message)
      : Error(ErrorKind::kInvalidParameter, message) {}
};

class OracleError : public Error {
 public:
  explicit OracleError(const std::string &message)
      : Error(ErrorKind::kOracle, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string &message) : Error(ErrorKind::kIo, message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string &message)
      : Error(ErrorKind::kConfig, message) {}
};

class MetricError : public Error {
 public:
  explicit MetricError(const std::string &message)
      : Error(ErrorKind::kMetric, message) {}
};

}  // namespace trojanscan

#endif  // TROJANSCAN_ERROR_HPP_
