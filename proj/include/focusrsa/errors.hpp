// Copyright 2026 The FocusRSA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace focusrsa {

// Exit-code classes used by the command line: usage (1), data/format (2),
// degenerate model state (3).

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Emotion label not present in the catalog. Carries the 1-based input line
// when the label came from a file.
class LabelError : public DataError {
 public:
  LabelError(const std::string& label, std::size_t line = 0)
      : DataError(line == 0 ? "unknown emotion label '" + label + "'"
                            : "line " + std::to_string(line) +
                                  ": unknown emotion label '" + label + "'"),
        label_(label),
        line_(line) {}

  const std::string& label() const { return label_; }
  std::size_t line() const { return line_; }

 private:
  std::string label_;
  std::size_t line_;
};

// Model-file load failures. Each kind is its own type so callers can tell
// a stale file from a damaged one.
class LoadError : public DataError {
 public:
  using DataError::DataError;
};
class VersionError : public LoadError {
 public:
  using LoadError::LoadError;
};
class TruncatedFileError : public LoadError {
 public:
  using LoadError::LoadError;
};
class ChecksumError : public LoadError {
 public:
  using LoadError::LoadError;
};

class DegenerateDistribution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CannotReplaceError : public DegenerateDistribution {
 public:
  using DegenerateDistribution::DegenerateDistribution;
};

class BridgeProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace focusrsa
