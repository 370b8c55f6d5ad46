// Copyright 2026 The Forge Authors
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

namespace forge {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (JSON syntax or schema shape). Carries a location
// string such as "line 3, column 7" or "functions[1].body[0].trip_count".
class ParseError : public Error {
 public:
  ParseError(std::string location, const std::string& what)
      : Error(location + ": " + what), location_(std::move(location)) {}
  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

// Well-formed input that violates a design invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Bad command-line or run-directory input.
class InputError : public Error {
 public:
  using Error::Error;
};

class InterpretError : public Error {
 public:
  using Error::Error;
};

class TransformError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// External adapter/agent process failures: nonzero exit, timeout, bad reply.
class AdapterError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public AdapterError {
 public:
  using AdapterError::AdapterError;
};

}  // namespace forge
