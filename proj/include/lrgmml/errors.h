// Copyright 2026 The LR-GMML Authors. All Rights Reserved.
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

#ifndef LRGMML_ERRORS_H_
#define LRGMML_ERRORS_H_

#include <stdexcept>
#include <string>

namespace lrgmml {

// Exit-code taxonomy shared by the library and the command-line tool.
enum class ErrorKind {
  kUsage = 1,
  kIo = 2,
  kNumerical = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

// Violated precondition: wrong shapes, out-of-range parameters, bad flags.
class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorKind::kUsage, what) {}
};

// Missing or malformed files.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

// Non-finite values, eigensolver failure, degenerate projections.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::kNumerical, what) {}
};

}  // namespace lrgmml

#endif  // LRGMML_ERRORS_H_
