// Copyright 2026 The ilba-cpp Authors
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

#ifndef ILBA_ERROR_HPP_
#define ILBA_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace ilba {

// Invalid arguments, malformed user data, or inputs that break a documented
// precondition. Maps to process exit code 1 in the CLI.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what)
      : std::runtime_error(what) {}
};

// Filesystem failures and files that cannot be decoded at all. Maps to
// process exit code 3 in the CLI.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// A file decoded structurally but its contents contradict the stored
// metadata (checksum, row count, masking rule). Subtype of IoError so the
// CLI exit code stays 3.
class IntegrityError : public IoError {
 public:
  explicit IntegrityError(const std::string& what) : IoError(what) {}
};

}  // namespace ilba

#endif  // ILBA_ERROR_HPP_
