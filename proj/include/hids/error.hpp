//  Copyright 2026 The hids Authors
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.

#ifndef HIDS_ERROR_HPP_
#define HIDS_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hids {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed identifier, pattern or other value rejected at construction.
class InvalidValue : public Error {
 public:
  using Error::Error;
};

/// Syntax problem in a line-oriented input. `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DuplicateFieldError : public ParseError {
 public:
  using ParseError::ParseError;
};

class SubjectMismatch : public Error {
 public:
  using Error::Error;
};

class MachineHalted : public Error {
 public:
  MachineHalted() : Error("machine halted after an unsafe condition") {}
};

class UnknownStage : public Error {
 public:
  explicit UnknownStage(const std::string& stage) : Error("unknown stage '" + stage + "'") {}
};

class UnknownSignatureId : public Error {
 public:
  explicit UnknownSignatureId(const std::string& id) : Error("unknown signature id '" + id + "'") {}
};

class PosetError : public Error {
 public:
  using Error::Error;
};

class UnmappedOperation : public Error {
 public:
  explicit UnmappedOperation(const std::string& op)
      : Error("operation '" + op + "' has no entry in the normalization op_map") {}
};

class UnmappedProgram : public Error {
 public:
  explicit UnmappedProgram(const std::string& prog)
      : Error("program '" + prog + "' has no entry in the normalization prog_map") {}
};

class LevelMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyModelSet : public Error {
 public:
  EmptyModelSet() : Error("validity check needs at least one model descriptor") {}
};

class AllZeroWeights : public Error {
 public:
  AllZeroWeights() : Error("at least one criterion weight must be positive") {}
};

class UnknownScenario : public Error {
 public:
  explicit UnknownScenario(const std::string& name) : Error("unknown scenario '" + name + "'") {}
};

}  // namespace hids

#endif  // HIDS_ERROR_HPP_
